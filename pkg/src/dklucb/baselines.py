"""Reference sampling rules that share Double KL-UCB's stopping and recommendation.

Only the sampling rule changes. Candidates, confidence bounds and the stopping
test come from the same compiled code path as :func:`dklucb.algorithm.run`.
"""

from .algorithm import DEFAULT_HORIZON_CAP, TrialResult, run, run_stepwise


def run_klucb_stop(instance, delta, seed, horizon_cap=DEFAULT_HORIZON_CAP, schedule="3log") -> TrialResult:
    """Always pull the f-leader (plain KL-UCB), stopping as soon as the g-bounds separate.

    ``schedule="3log"`` uses the same ``3 log t`` budget as Double KL-UCB, which
    makes this exactly Double KL-UCB with a coin that always lands heads.
    ``schedule="log_loglog"`` is the classical ``log t + log log t`` budget; with
    it the f-budget grows strictly slower than the stopping budget
    ``log(2 K t^2 / delta)``, so the stopping test essentially never fires and
    runs end at the horizon cap.
    """
    return run(instance, delta, seed, horizon_cap, rule="klucb_stop", schedule=schedule)


def run_uniform_stop(instance, delta, seed, horizon_cap=DEFAULT_HORIZON_CAP) -> TrialResult:
    """Round-robin sampling (arm ``t mod K`` at round ``t + 1``) with the same stopping rule."""
    return run(instance, delta, seed, horizon_cap, rule="uniform_stop")


def run_klucb_stop_stepwise(instance, delta, seed, horizon_cap=DEFAULT_HORIZON_CAP, schedule="3log",
                            on_step=None) -> TrialResult:
    return run_stepwise(instance, delta, seed, horizon_cap, rule="klucb_stop", schedule=schedule,
                        on_step=on_step)


def run_uniform_stop_stepwise(instance, delta, seed, horizon_cap=DEFAULT_HORIZON_CAP, on_step=None) -> TrialResult:
    return run_stepwise(instance, delta, seed, horizon_cap, rule="uniform_stop", on_step=on_step)
