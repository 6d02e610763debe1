"""Path simulation and the empirical correlation statistic."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.signal import lfilter
from scipy.special import ndtri

from ar1corr.simulation import (
    DegenerateSampleError,
    ModelSpec,
    PathPair,
    ThetaSampleSet,
    empirical_stats,
    sample_theta,
    simulate_pair,
    substream,
)

_TWO53 = 1 << 53


def _manual_normals(rng, size):
    return ndtri(rng.integers(1, _TWO53, size=size).astype(float) / _TWO53)


class TestModelSpecValidation:
    def test_accepts_each_family(self):
        ModelSpec("gaussian_independent", 10, 0.3)
        ModelSpec("gaussian_correlated", 10, 0.3, r=-0.5)
        ModelSpec("second_chaos", 10, 0.3, beta=0.7, sigma=(1.0, 0.5))

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="family"):
            ModelSpec("gaussian", 10, 0.3)

    def test_short_sample(self):
        with pytest.raises(ValueError, match="n >= 2"):
            ModelSpec("gaussian_independent", 1, 0.3)

    @pytest.mark.parametrize("a", [1.0, -1.0, 1.5, np.nan])
    def test_alpha_outside_unit_interval(self, a):
        with pytest.raises(ValueError, match="alpha"):
            ModelSpec("gaussian_independent", 10, a)

    def test_gaussian_families_share_one_memory_parameter(self):
        with pytest.raises(ValueError, match="beta"):
            ModelSpec("gaussian_independent", 10, 0.3, beta=0.4)
        spec = ModelSpec("gaussian_correlated", 10, 0.3, beta=0.3, r=0.1)
        assert spec.beta == 0.3

    def test_r_only_for_correlated_family(self):
        with pytest.raises(ValueError, match="r is not"):
            ModelSpec("gaussian_independent", 10, 0.3, r=0.2)
        with pytest.raises(ValueError, match="r is not"):
            ModelSpec("second_chaos", 10, 0.3, r=0.2)

    def test_r_range(self):
        with pytest.raises(ValueError, match="-1, 1"):
            ModelSpec("gaussian_correlated", 10, 0.3, r=1.2)

    def test_chaos_weights_validated(self):
        with pytest.raises(ValueError, match="nonempty"):
            ModelSpec("second_chaos", 10, 0.3, sigma=())
        with pytest.raises(ValueError, match="finite"):
            ModelSpec("second_chaos", 10, 0.3, tau=(np.inf,))

    def test_chaos_beta_defaults_to_alpha(self):
        assert ModelSpec("second_chaos", 10, 0.25).beta == 0.25


class TestPathMechanics:
    def test_paths_have_requested_length(self):
        spec = ModelSpec("gaussian_independent", 17, 0.4)
        p = simulate_pair(spec, substream(5, 0))
        assert p.x.shape == (17,) and p.y.shape == (17,)

    def test_recursion_holds_exactly(self):
        # x[k] - alpha x[k-1] must reproduce the innovation sequence,
        # and x[0] is the first innovation itself (zero start)
        spec = ModelSpec("gaussian_independent", 200, 0.6)
        p = simulate_pair(spec, substream(9, 3))
        innov = np.empty(200)
        innov[0] = p.x[0]
        innov[1:] = p.x[1:] - 0.6 * p.x[:-1]
        rebuilt = lfilter([1.0], [1.0, -0.6], innov)
        np.testing.assert_allclose(rebuilt, p.x, rtol=0, atol=1e-12)

    def test_filter_matches_naive_loop(self):
        rng = np.random.default_rng(42)
        innov = rng.normal(size=50)
        a = -0.35
        direct = np.empty(50)
        prev = 0.0
        for k in range(50):
            prev = a * prev + innov[k]
            direct[k] = prev
        np.testing.assert_allclose(
            lfilter([1.0], [1.0, -a], innov), direct, rtol=0, atol=1e-13)

    def test_chaos_memory_parameters_differ_per_side(self):
        spec = ModelSpec("second_chaos", 100, 0.2, beta=0.8)
        p = simulate_pair(spec, substream(11, 0))
        # recover innovations under each side's own coefficient;
        # the wrong coefficient leaves visible serial correlation
        ix = p.x[1:] - 0.2 * p.x[:-1]
        iy = p.y[1:] - 0.8 * p.y[:-1]
        rx = np.corrcoef(ix[1:], ix[:-1])[0, 1]
        ry = np.corrcoef(iy[1:], iy[:-1])[0, 1]
        assert abs(rx) < 0.25 and abs(ry) < 0.25

    def test_pathpair_rejects_mismatch(self):
        with pytest.raises(ValueError, match="equal-length"):
            PathPair(np.zeros(3), np.zeros(4))
        with pytest.raises(ValueError, match="finite"):
            PathPair(np.array([1.0, np.nan]), np.zeros(2))


class TestDrawOrder:
    """The documented draw order is part of the reproducibility contract."""

    def test_independent_family(self):
        spec = ModelSpec("gaussian_independent", 25, 0.3)
        p = simulate_pair(spec, substream(77, 4))
        rng = substream(77, 4)
        xi = _manual_normals(rng, 25)
        eta = _manual_normals(rng, 25)
        np.testing.assert_array_equal(p.x, lfilter([1.0], [1.0, -0.3], xi))
        np.testing.assert_array_equal(p.y, lfilter([1.0], [1.0, -0.3], eta))

    def test_correlated_family(self):
        spec = ModelSpec("gaussian_correlated", 25, 0.3, r=0.6)
        p = simulate_pair(spec, substream(77, 4))
        rng = substream(77, 4)
        xi = _manual_normals(rng, 25)
        zeta = _manual_normals(rng, 25)
        eta = 0.6 * xi + math.sqrt(1 - 0.36) * zeta
        np.testing.assert_array_equal(p.y, lfilter([1.0], [1.0, -0.3], eta))

    def test_chaos_family(self):
        spec = ModelSpec("second_chaos", 25, 0.3, beta=0.5,
                         sigma=(1.0, 0.5), tau=(2.0,))
        p = simulate_pair(spec, substream(77, 4))
        rng = substream(77, 4)
        s = _manual_normals(rng, (25, 2))
        t = _manual_normals(rng, (25, 1))
        xi = (s * s - 1.0) @ np.array([1.0, 0.5])
        eta = (t * t - 1.0) @ np.array([2.0])
        np.testing.assert_array_equal(p.x, lfilter([1.0], [1.0, -0.3], xi))
        np.testing.assert_array_equal(p.y, lfilter([1.0], [1.0, -0.5], eta))


class TestEmpiricalStats:
    def test_exact_rational_pair(self):
        xf = [Fraction(1), Fraction(1, 2), Fraction(-3, 2), Fraction(2),
              Fraction(0), Fraction(1, 3)]
        yf = [Fraction(-1), Fraction(1, 4), Fraction(5), Fraction(-2),
              Fraction(1, 2), Fraction(3)]
        nf = Fraction(6)
        mx = sum(xf) / nf
        my = sum(yf) / nf
        z11f = sum(v * v for v in xf) / nf - mx * mx
        z22f = sum(v * v for v in yf) / nf - my * my
        z12f = sum(a * b for a, b in zip(xf, yf)) / nf - mx * my
        p = PathPair(np.array([float(v) for v in xf]),
                     np.array([float(v) for v in yf]))
        z11, z12, z22, theta = empirical_stats(p)
        assert z11 == pytest.approx(float(z11f), rel=1e-14)
        assert z22 == pytest.approx(float(z22f), rel=1e-14)
        assert z12 == pytest.approx(float(z12f), rel=1e-14)
        want = float(z12f) / math.sqrt(float(z11f) * float(z22f))
        assert theta == pytest.approx(want, abs=1e-14)

    def test_perfect_correlation(self):
        x = np.array([0.5, -1.0, 2.0, 0.25])
        _, _, _, theta = empirical_stats(PathPair(x, 3.0 * x + 1.0))
        assert theta == pytest.approx(1.0, abs=1e-12)
        _, _, _, theta = empirical_stats(PathPair(x, -0.5 * x))
        assert theta == pytest.approx(-1.0, abs=1e-12)

    def test_constant_path_is_degenerate(self):
        with pytest.raises(DegenerateSampleError):
            empirical_stats(PathPair(np.ones(5), np.arange(5.0)))
        with pytest.raises(DegenerateSampleError):
            empirical_stats(PathPair(np.arange(5.0), np.full(5, 2.0)))

    @given(seed=st.integers(0, 2**32 - 1),
           mag=st.floats(0.25, 4.0), neg=st.booleans(),
           b=st.floats(-4, 4))
    @settings(max_examples=40, deadline=None)
    def test_affine_equivariance(self, seed, mag, neg, b):
        a = -mag if neg else mag
        rng = np.random.default_rng(seed)
        x = rng.normal(size=12)
        y = rng.normal(size=12)
        base = empirical_stats(PathPair(x, y))[3]
        moved = empirical_stats(PathPair(a * x + b, y))[3]
        assert moved == pytest.approx(math.copysign(1.0, a) * base, abs=1e-9)

    def test_theta_always_in_unit_interval(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            x = rng.normal(size=3)
            y = rng.normal(size=3)
            theta = empirical_stats(PathPair(x, y))[3]
            assert -1.0 <= theta <= 1.0


class TestSampleTheta:
    def test_runs_are_bitwise_identical(self):
        spec = ModelSpec("gaussian_independent", 30, 0.1)
        a = sample_theta(spec, 50, seed=123)
        b = sample_theta(spec, 50, seed=123)
        np.testing.assert_array_equal(a.values, b.values)
        assert a.redraws == b.redraws == 0

    def test_each_replication_owns_its_substream(self):
        # value i depends only on (seed, i), never on how many other
        # replications ran before it
        spec = ModelSpec("gaussian_correlated", 20, 0.2, r=0.4)
        full = sample_theta(spec, 8, seed=55)
        _, _, _, solo = empirical_stats(simulate_pair(spec, substream(55, 5)))
        assert full.values[5] == solo

    def test_thread_count_never_changes_output(self):
        spec = ModelSpec("second_chaos", 15, 0.2, sigma=(1.0, 0.5))
        serial = sample_theta(spec, 37, seed=4)
        for threads in (2, 5, 64):
            pooled = sample_theta(spec, 37, seed=4, threads=threads)
            np.testing.assert_array_equal(serial.values, pooled.values)
            assert pooled.redraws == serial.redraws

    def test_rejects_bad_threads(self):
        spec = ModelSpec("gaussian_independent", 10, 0.1)
        with pytest.raises(ValueError, match="threads"):
            sample_theta(spec, 5, seed=1, threads=0)

    def test_seeds_decorrelate(self):
        spec = ModelSpec("gaussian_independent", 20, 0.1)
        a = sample_theta(spec, 20, seed=1)
        b = sample_theta(spec, 20, seed=2)
        assert not np.array_equal(a.values, b.values)

    def test_scale_transform_matches_manual(self):
        spec = ModelSpec("gaussian_correlated", 40, 0.3, r=0.25)
        raw = sample_theta(spec, 30, seed=7)
        scaled = sample_theta(spec, 30, seed=7, scale=True)
        c = math.sqrt((1 - 0.09) / (1 + 0.09)) / (1 - 0.0625)
        want = c * math.sqrt(40) * (raw.values - 0.25)
        np.testing.assert_array_equal(scaled.values, want)

    def test_chaos_scale_uses_both_memory_parameters(self):
        spec = ModelSpec("second_chaos", 40, 0.3, beta=0.5)
        raw = sample_theta(spec, 10, seed=7)
        scaled = sample_theta(spec, 10, seed=7, scale=True)
        c = math.sqrt((1 - 0.15) / (1 + 0.15))
        np.testing.assert_array_equal(
            scaled.values, c * math.sqrt(40) * raw.values)

    def test_rejects_bad_reps(self):
        spec = ModelSpec("gaussian_independent", 10, 0.1)
        with pytest.raises(ValueError, match="reps"):
            sample_theta(spec, 0, seed=1)

    def test_sampleset_validates_raw_range(self):
        spec = ModelSpec("gaussian_independent", 10, 0.1)
        with pytest.raises(ValueError, match="must lie in"):
            ThetaSampleSet(spec, 0, False, np.array([0.5, 1.5]))
        # scaled values are allowed outside the unit interval
        ThetaSampleSet(spec, 0, True, np.array([0.5, 1.5]))


class TestDistributionalSanity:
    def test_inverse_cdf_normals_have_normal_moments(self):
        # alpha = 0 exposes raw innovations; pool two million draws
        spec = ModelSpec("gaussian_independent", 2000, 0.0)
        pool = []
        for i in range(500):
            p = simulate_pair(spec, substream(2026, i))
            pool.append(p.x)
            pool.append(p.y)
        draws = np.concatenate(pool)
        assert abs(np.mean(draws)) < 0.005
        assert abs(np.var(draws) - 1.0) < 0.01
        kurt = np.mean(draws ** 4) / np.var(draws) ** 2
        assert abs(kurt - 3.0) < 0.05

    def test_correlated_innovations_hit_target_r(self):
        spec = ModelSpec("gaussian_correlated", 200_000, 0.0, r=0.3)
        p = simulate_pair(spec, substream(17, 0))
        assert np.corrcoef(p.x, p.y)[0, 1] == pytest.approx(0.3, abs=0.01)

    def test_chaos_innovations_centered_with_known_variance(self):
        spec = ModelSpec("second_chaos", 100_000, 0.0, sigma=(1.0, 0.5),
                         tau=(1.0,))
        p = simulate_pair(spec, substream(23, 0))
        # Var(xi) = 2 sum sigma^2 = 2.5, Var(eta) = 2
        assert abs(np.mean(p.x)) < 0.05
        assert np.var(p.x) == pytest.approx(2.5, rel=0.04)
        assert np.var(p.y) == pytest.approx(2.0, rel=0.04)

    def test_variance_of_scaled_theta_near_exact_value(self):
        # exact second moment of sqrt(n) theta_n at n = 50, alpha = 0.1
        # is 1.03863; 4000 replications pin it to a few percent
        spec = ModelSpec("gaussian_independent", 50, 0.1)
        out = sample_theta(spec, 4000, seed=31)
        v = 50 * np.var(out.values)
        assert v == pytest.approx(1.03863, abs=0.09)
