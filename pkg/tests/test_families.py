import math

import mpmath
import numpy as np
import pytest

from dklucb import DomainError, RewardFamily, kl, kl_bernoulli, kl_lower_inverse, kl_upper_inverse
from dklucb import sample, variance_bound
from dklucb import _kernels as K
from dklucb.validation import FAMILIES, bisect_bounds, check_kl, check_pinsker, random_means

BER = RewardFamily.bernoulli()
GAU = RewardFamily.gaussian(1.0)
POI = RewardFamily.poisson()
EXP = RewardFamily.exponential()

# Reference values evaluated with mpmath at 40 digits.
KL_B_04_06 = 0.0810930216216328764
KL_B_01_09 = 1.7577796618689755062
KL_B_001_099 = 4.5032174531318981283
KL_P_1_2 = 0.3068528194400546906


def mp_kl(family, p, q):
    mpmath.mp.dps = 40
    p, q = mpmath.mpf(p), mpmath.mpf(q)
    if family.kind.value == "bernoulli":
        return float(p * mpmath.log(p / q) + (1 - p) * mpmath.log((1 - p) / (1 - q)))
    if family.kind.value == "gaussian":
        return float((p - q) ** 2 / (2 * mpmath.mpf(family.variance)))
    if family.kind.value == "poisson":
        return float(p * mpmath.log(p / q) + q - p)
    return float(p / q - 1 - mpmath.log(p / q))


class TestKL:
    def test_identical_means(self):
        assert kl(BER, 0.5, 0.5) == 0.0

    def test_bernoulli_value(self):
        assert kl(BER, 0.4, 0.6) == pytest.approx(KL_B_04_06, abs=1e-12)

    def test_gaussian_value(self):
        assert kl(GAU, 0.0, 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_poisson_value(self):
        assert kl(POI, 1.0, 2.0) == pytest.approx(KL_P_1_2, abs=1e-14)

    def test_bernoulli_boundary_limits(self):
        assert kl(BER, 0.0, 0.3) == pytest.approx(math.log(1 / 0.7), abs=1e-15)
        assert kl(BER, 1.0, 0.3) == pytest.approx(math.log(1 / 0.3), abs=1e-15)

    @pytest.mark.parametrize("fam", [BER, GAU, POI, EXP, RewardFamily.gaussian(2.5)], ids=str)
    def test_matches_high_precision(self, fam):
        rng = np.random.default_rng(11)
        p = random_means(fam, rng, 25)
        q = random_means(fam, rng, 25)
        for a, b in zip(p, q):
            assert kl(fam, a, b) == pytest.approx(mp_kl(fam, a, b), rel=1e-10, abs=1e-14)

    @pytest.mark.parametrize("fam", FAMILIES, ids=str)
    def test_kernel_agrees_with_vectorized(self, fam):
        rng = np.random.default_rng(12)
        p = random_means(fam, rng, 500)
        q = random_means(fam, rng, 500)
        vec = kl(fam, p, q)
        scalar = np.array([K.kl_scalar(fam.code, fam.variance, a, b) for a, b in zip(p, q)])
        np.testing.assert_allclose(scalar, vec, rtol=1e-12, atol=1e-15)

    @pytest.mark.parametrize("bad", [(1.5, 0.5), (0.5, 1.0), (float("nan"), 0.5), (0.5, -0.1)])
    def test_bernoulli_domain(self, bad):
        with pytest.raises(DomainError):
            kl(BER, *bad)

    def test_exponential_rejects_zero_mean(self):
        with pytest.raises(DomainError):
            kl(EXP, 0.0, 1.0)

    def test_poisson_accepts_zero_empirical_mean(self):
        assert kl(POI, 0.0, 2.0) == pytest.approx(2.0)

    def test_increasing_away_from_mean(self):
        q = np.linspace(0.41, 0.99, 50)
        assert np.all(np.diff(kl(BER, 0.4, q)) > 0)

    def test_random_pairs_property(self):
        check_kl()
        check_pinsker()


class TestKLBernoulli:
    def test_equal(self):
        assert kl_bernoulli(0.3, 0.3) == 0.0

    def test_values(self):
        assert kl_bernoulli(0.1, 0.9) == pytest.approx(KL_B_01_09, abs=1e-12)
        assert kl_bernoulli(0.01, 0.99) == pytest.approx(KL_B_001_099, abs=1e-12)
        assert kl_bernoulli(0.1, 0.9) == pytest.approx(0.8 * math.log(9), abs=1e-12)

    @pytest.mark.parametrize("p,q", [(0.0, 0.5), (0.5, 1.0), (1.0, 0.2)])
    def test_boundary_rejected(self, p, q):
        with pytest.raises(DomainError):
            kl_bernoulli(p, q)


class TestInversion:
    def test_zero_budget(self):
        assert kl_upper_inverse(BER, 0.5, 0.0) == 0.5
        assert kl_lower_inverse(BER, 0.5, 0.0) == 0.5

    def test_gaussian_closed_form(self):
        assert kl_upper_inverse(GAU, 0.0, 0.5) == pytest.approx(1.0, abs=1e-15)
        assert kl_lower_inverse(GAU, 0.0, 0.5) == pytest.approx(-1.0, abs=1e-15)

    def test_large_budget_root_near_endpoint(self):
        # kl(0.5, .) is unbounded on (0, 1), so budget 10 still has a root, about 5e-10 below 1.
        u = kl_upper_inverse(BER, 0.5, 10.0)
        assert 1.0 - 1e-9 < u < 1.0
        # The root sits below float resolution near 1: u brackets it to one ulp.
        assert kl(BER, 0.5, u) <= 10.0 < kl(BER, 0.5, np.nextafter(u, 1.0))

    def test_clamps_to_endpoint(self):
        # Budget 50 puts the root within float resolution of the endpoint.
        assert kl_upper_inverse(BER, 0.5, 50.0) == 1.0
        # Near 0 floats are fine enough that budget 50 still has a root (~9.3e-45); 1000 does not.
        assert kl_lower_inverse(BER, 0.5, 50.0) == pytest.approx(0.25 * math.exp(-100), rel=1e-6)
        assert kl_lower_inverse(BER, 0.5, 1000.0) == 0.0
        assert kl_upper_inverse(BER, 1.0, 0.2) == 1.0
        assert kl_lower_inverse(BER, 0.0, 0.2) == 0.0

    def test_inverts_bernoulli_example(self):
        u = kl_upper_inverse(BER, 0.4, KL_B_04_06)
        lo = kl_lower_inverse(BER, 0.6, KL_B_04_06)
        assert abs(kl(BER, 0.4, u) - KL_B_04_06) <= 1e-9
        assert abs(kl(BER, 0.6, lo) - KL_B_04_06) <= 1e-9
        # kl has slope ~0.42 near the root, so a 1e-9 kl tolerance gives ~3e-9 in the mean.
        assert u == pytest.approx(0.6, abs=5e-9)
        ref = bisect_bounds(BER, np.array([0.6]), np.array([KL_B_04_06]), upper=False)[0]
        assert lo == pytest.approx(ref, abs=5e-9)
        assert lo == pytest.approx(0.4, abs=5e-9)

    @pytest.mark.parametrize("mu_hat", [0.0, 1.0])
    def test_bernoulli_boundary_means(self, mu_hat):
        u = kl_upper_inverse(BER, mu_hat, 0.3)
        lo = kl_lower_inverse(BER, mu_hat, 0.3)
        assert lo <= mu_hat <= u
        if mu_hat == 0.0:
            assert abs(kl(BER, 0.0, u) - 0.3) <= 1e-9

    def test_gaussian_matches_generic_bisection(self):
        rng = np.random.default_rng(5)
        for fam in (GAU, RewardFamily.gaussian(2.5)):
            mu = rng.uniform(-10, 10, 2000)
            c = rng.uniform(0, 5, 2000)
            np.testing.assert_allclose(kl_upper_inverse(fam, mu, c), bisect_bounds(fam, mu, c, True), atol=1e-9)
            np.testing.assert_allclose(kl_lower_inverse(fam, mu, c), bisect_bounds(fam, mu, c, False), atol=1e-9)

    @pytest.mark.parametrize("fam", FAMILIES, ids=str)
    def test_monotone_in_budget(self, fam):
        rng = np.random.default_rng(6)
        for mu in random_means(fam, rng, 20):
            c = np.linspace(0, 4, 60)
            up = kl_upper_inverse(fam, np.full_like(c, mu), c)
            lo = kl_lower_inverse(fam, np.full_like(c, mu), c)
            assert up[0] == mu and lo[0] == mu
            assert np.all(np.diff(up) >= 0)
            assert np.all(np.diff(lo) <= 0)

    def test_scalar_and_array_paths_agree(self):
        mu = np.array([0.1, 0.5, 0.93])
        c = np.array([0.2, 1.0, 0.01])
        arr = kl_upper_inverse(BER, mu, c)
        assert arr.tolist() == [kl_upper_inverse(BER, m, b) for m, b in zip(mu, c)]

    @pytest.mark.parametrize("c", [-0.1, float("nan"), float("inf")])
    def test_bad_budget(self, c):
        with pytest.raises(DomainError):
            kl_upper_inverse(BER, 0.5, c)
        with pytest.raises(DomainError):
            kl_lower_inverse(BER, 0.5, c)

    def test_bad_mean(self):
        with pytest.raises(DomainError):
            kl_upper_inverse(BER, 1.2, 0.5)
        with pytest.raises(DomainError):
            kl_lower_inverse(EXP, 0.0, 0.5)


class TestSampling:
    def test_bernoulli_support_and_reproducible(self):
        a = [sample(BER, 0.5, np.random.default_rng(3)) for _ in range(3)]
        assert a[0] in (0.0, 1.0)
        assert a[0] == a[1] == a[2]

    def test_gaussian_mean(self):
        draws = GAU.sample_block(0.0, np.random.default_rng(8), 10**6)
        assert abs(draws.mean()) <= 4 / 1000

    def test_exponential_mean(self):
        draws = EXP.sample_block(2.0, np.random.default_rng(9), 10**6)
        assert abs(draws.mean() - 2.0) <= 4 * 2.0 / 1000

    def test_poisson_mean(self):
        draws = POI.sample_block(3.0, np.random.default_rng(10), 10**6)
        assert abs(draws.mean() - 3.0) <= 4 * math.sqrt(3.0) / 1000

    def test_domain(self):
        with pytest.raises(DomainError):
            sample(BER, 1.0, np.random.default_rng(0))
        with pytest.raises(DomainError):
            sample(EXP, -1.0, np.random.default_rng(0))


class TestVarianceBound:
    def test_examples(self):
        assert variance_bound(BER, 0.1, 0.9) == 0.25
        assert variance_bound(RewardFamily.gaussian(2.0), -3.0, 7.0) == 2.0
        assert variance_bound(POI, 1.0, 5.0) == 5.0
        assert variance_bound(EXP, 1.0, 3.0) == 9.0

    def test_bernoulli_one_sided_range(self):
        assert variance_bound(BER, 0.6, 0.9) == pytest.approx(0.24)
        assert variance_bound(BER, 0.1, 0.3) == pytest.approx(0.21)

    def test_empty_range(self):
        with pytest.raises(DomainError):
            variance_bound(POI, 5.0, 1.0)


def test_family_rejects_bad_variance():
    with pytest.raises(DomainError):
        RewardFamily.gaussian(0.0)
