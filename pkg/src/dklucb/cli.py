"""Command-line front end.

    dklucb oracle   --config F [--delta D ...]
    dklucb run      --config F [--format csv|json] [--out P] [--trace P]
    dklucb validate [--suite NAME ...]

Exit codes: 0 ok, 1 validation failure, 2 configuration error, 3 I/O error.
``BAI_THREADS`` overrides the configured worker count.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DomainError
from .families import RewardFamily
from .harness import ExperimentConfig, ratio_table, run_campaign, trial_seed
from .oracles import BanditInstance, gamma_star, gaps, hardness_i_star, regret_lower_bound, sample_optimal_regret_ratio

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

COLUMNS = (
    "algorithm", "delta", "trials", "error_rate", "error_ub99", "mean_pseudo_regret",
    "mean_realized_regret", "mean_tau", "regret_ratio", "regret_lb_ratio", "tau_ratio",
    "censored", "version", "config_hash",
)
_INT_COLUMNS = {"trials", "censored"}
_STR_COLUMNS = {"algorithm", "version", "config_hash"}

_TOP_KEYS = {"family", "means", "algorithms", "deltas", "trials", "seed", "horizon_cap", "parallelism", "output"}
_FAMILY_PARAMS = {"bernoulli": set(), "gaussian": {"variance"}, "poisson": set(), "exponential": set()}


@dataclass(frozen=True)
class OutputSpec:
    format: str = "csv"
    path: str | None = None


@dataclass(frozen=True)
class LoadedConfig:
    instance: BanditInstance
    document: dict
    config_hash: str
    experiment: ExperimentConfig | None
    output: OutputSpec


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def parse_family(doc) -> RewardFamily:
    _require(isinstance(doc, dict), "family must be an object with 'type' and optional 'params'")
    unknown = set(doc) - {"type", "params"}
    _require(not unknown, f"unknown keys in family: {sorted(unknown)}")
    kind = doc.get("type")
    _require(kind in _FAMILY_PARAMS, f"family.type must be one of {sorted(_FAMILY_PARAMS)}")
    params = doc.get("params", {}) or {}
    _require(isinstance(params, dict), "family.params must be an object")
    unknown = set(params) - _FAMILY_PARAMS[kind]
    _require(not unknown, f"unknown {kind} parameters: {sorted(unknown)}")
    try:
        if kind == "gaussian":
            return RewardFamily.gaussian(float(params.get("variance", 1.0)))
        return RewardFamily(kind)
    except (DomainError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def config_hash(document: dict) -> str:
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def parse_config(document: dict, require_experiment: bool = True) -> LoadedConfig:
    _require(isinstance(document, dict), "configuration must be a JSON object")
    unknown = set(document) - _TOP_KEYS
    _require(not unknown, f"unknown configuration keys: {sorted(unknown)}")
    _require("family" in document and "means" in document, "configuration needs 'family' and 'means'")
    family = parse_family(document["family"])
    means = document["means"]
    _require(isinstance(means, list) and all(isinstance(m, (int, float)) and not isinstance(m, bool)
                                             for m in means), "means must be an array of numbers")
    instance = BanditInstance(family, tuple(means))

    out_doc = document.get("output", {}) or {}
    _require(isinstance(out_doc, dict), "output must be an object")
    unknown = set(out_doc) - {"format", "path"}
    _require(not unknown, f"unknown output keys: {sorted(unknown)}")
    fmt = out_doc.get("format", "csv")
    _require(fmt in ("csv", "json"), "output.format must be 'csv' or 'json'")
    output = OutputSpec(fmt, out_doc.get("path"))

    experiment = None
    if require_experiment:
        for key in ("algorithms", "deltas", "trials"):
            _require(key in document, f"configuration needs '{key}'")
        _require(isinstance(document["algorithms"], list), "algorithms must be an array")
        _require(isinstance(document["deltas"], list), "deltas must be an array")
        for key in ("trials", "seed", "horizon_cap", "parallelism"):
            if key in document:
                _require(isinstance(document[key], int) and not isinstance(document[key], bool),
                         f"{key} must be an integer")
        kwargs = {}
        if "seed" in document:
            kwargs["base_seed"] = document["seed"]
        if "horizon_cap" in document:
            kwargs["horizon_cap"] = document["horizon_cap"]
        if "parallelism" in document:
            kwargs["parallelism"] = document["parallelism"]
        experiment = ExperimentConfig(instance, tuple(document["algorithms"]), tuple(document["deltas"]),
                                      document["trials"], **kwargs)
    return LoadedConfig(instance, document, config_hash(document), experiment, output)


def load_config(path, require_experiment: bool = True) -> LoadedConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return parse_config(document, require_experiment)


# --- result rows ----------------------------------------------------------

def result_rows(stats, config_hash_value: str) -> list[dict]:
    ratios = {(r.algorithm, r.delta): r for r in ratio_table(stats)}
    rows = []
    cfg = stats.config
    for algorithm in cfg.algorithms:
        for delta in cfg.delta_grid:
            cell = stats.cell(algorithm, delta)
            ratio = ratios[(algorithm, delta)]
            rows.append({
                "algorithm": algorithm,
                "delta": delta,
                "trials": cell.trials,
                "error_rate": cell.error_rate,
                "error_ub99": cell.error_ub99,
                "mean_pseudo_regret": cell.pseudo_regret.mean,
                "mean_realized_regret": cell.realized_regret.mean,
                "mean_tau": cell.tau.mean,
                "regret_ratio": ratio.regret_ratio,
                "regret_lb_ratio": ratio.regret_lb_ratio,
                "tau_ratio": ratio.tau_ratio,
                "censored": cell.censored,
                "version": __version__,
                "config_hash": config_hash_value,
            })
    return rows


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in COLUMNS])
    return buf.getvalue()


def rows_from_csv(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    _require(tuple(reader.fieldnames or ()) == COLUMNS, "unexpected CSV header")
    rows = []
    for raw in reader:
        row = {}
        for key in COLUMNS:
            if key in _STR_COLUMNS:
                row[key] = raw[key]
            elif key in _INT_COLUMNS:
                row[key] = int(raw[key])
            else:
                row[key] = float(raw[key])
        rows.append(row)
    return rows


def rows_to_json(rows: list[dict]) -> str:
    def clean(v):
        return "inf" if isinstance(v, float) and math.isinf(v) else v
    return json.dumps([{c: clean(r[c]) for c in COLUMNS} for r in rows], indent=1) + "\n"


def rows_from_json(text: str) -> list[dict]:
    rows = json.loads(text)
    return [{c: (float(r[c]) if r[c] == "inf" else r[c]) for c in COLUMNS} for r in rows]


# --- commands -------------------------------------------------------------

def cmd_oracle(args, out) -> int:
    loaded = load_config(args.config, require_experiment=False)
    inst = loaded.instance
    deltas = args.delta or loaded.document.get("deltas") or [0.1, 0.01, 0.001]
    for d in deltas:
        _require(isinstance(d, (int, float)) and 0 < d < 1, f"delta {d} outside (0, 1)")
    i_star = hardness_i_star(inst)
    opt = gamma_star(inst)
    np.set_printoptions(precision=6, suppress=False)
    out(f"K = {inst.n_arms}")
    out(f"family = {inst.family.kind.value}" + (f" (variance {inst.family.variance:g})"
                                                if inst.family.kind.value == "gaussian" else ""))
    out(f"means = {list(inst.means)}")
    out(f"best arm = {inst.best_arm}")
    out(f"gaps = {[float(g) for g in gaps(inst)]}")
    out(f"I* = {i_star:.10g}")
    for d in deltas:
        out(f"regret lower bound at delta={d:g}: {regret_lower_bound(inst, d):.10g}")
    out(f"Gamma* = {opt.value:.10g}")
    out(f"optimal weights = {[float(w) for w in opt.w]}")
    if inst.n_arms == 2:
        out(f"regret ratio, sample-optimal allocation vs regret-optimal = {sample_optimal_regret_ratio(inst):.10g}")
    return EXIT_OK


def cmd_run(args, out) -> int:
    loaded = load_config(args.config)
    cfg = loaded.experiment
    fmt = args.format or loaded.output.format
    path = args.out or loaded.output.path
    stats = run_campaign(cfg)
    rows = result_rows(stats, loaded.config_hash)
    text = rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows)
    if path:
        Path(path).write_text(text)
        out(f"wrote {len(rows)} rows to {path}")
    else:
        sys.stdout.write(text)
    if args.trace:
        write_traces(cfg, args.trace, loaded.config_hash)
    return EXIT_OK


def write_traces(cfg: ExperimentConfig, path, hash_value: str):
    """Per-round records of the first trial of every cell, one JSON object per line."""
    from .validation import trace_trial

    with open(path, "w") as fh:
        for algorithm in cfg.algorithms:
            for di, delta in enumerate(cfg.delta_grid):
                recs = trace_trial(cfg.instance, delta, trial_seed(cfg.base_seed, algorithm, di, 0),
                                   cfg.horizon_cap, rule=algorithm)
                for rec in recs:
                    rec = {"algorithm": algorithm, "delta": delta, "config_hash": hash_value, **rec}
                    fh.write(json.dumps(rec) + "\n")


def cmd_validate(args, out) -> int:
    from .validation import SUITES, run_suites

    names = args.suite or None
    if names:
        bad = [n for n in names if n not in SUITES]
        _require(not bad, f"unknown suites {bad}; available: {sorted(SUITES)}")
    return EXIT_OK if run_suites(names, out=out) else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dklucb", description="Best-arm identification with minimal regret")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle", help="print gaps, I*, regret lower bounds and Gamma*")
    p.add_argument("--config", required=True)
    p.add_argument("--delta", type=float, action="append")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("run", help="run a Monte Carlo campaign")
    p.add_argument("--config", required=True)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out")
    p.add_argument("--trace")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="run the property suites")
    p.add_argument("--suite", action="append")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None, out=print) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry_point():
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
