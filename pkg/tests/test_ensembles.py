"""Ensemble tests: standardization, determinism, smoothness constants,
and the subgaussian tail proxy."""

import math

import numpy as np
import pytest

from circulant_clt import (
    EnsembleSpec,
    RandomStream,
    SmoothnessRequiredError,
    custom_smooth,
    from_family,
    gaussian,
    rademacher,
    sample_sequence,
    smooth_transform_value,
    uniform_symmetric,
    verify_standardization,
)

SQRT3 = math.sqrt(3.0)
ALL_FAMILIES = [gaussian(), rademacher(), uniform_symmetric()]


class TestSpecConstruction:
    def test_builtin_constants(self):
        g = gaussian()
        assert (g.c1, g.c2) == (1.0, 0.0)
        assert g.subgaussian_sigma == 1.0 and g.symmetric

        r = rademacher()
        assert r.c1 is None and r.c2 is None and not r.is_smooth
        assert r.subgaussian_sigma == 1.0 and r.symmetric

        u = uniform_symmetric()
        assert u.c1 == pytest.approx(2 * SQRT3 / math.sqrt(2 * math.pi))
        assert u.c2 == pytest.approx(2 * SQRT3 / math.sqrt(2 * math.pi * math.e))
        assert u.subgaussian_sigma == pytest.approx(SQRT3)

    def test_from_family(self):
        assert from_family("gaussian").family == "gaussian"
        with pytest.raises(ValueError, match="family"):
            from_family("cauchy")

    def test_validation(self):
        with pytest.raises(ValueError):
            EnsembleSpec("gaussian", subgaussian_sigma=1.0)  # missing c1, c2
        with pytest.raises(ValueError):
            EnsembleSpec("rademacher", subgaussian_sigma=1.0, c1=1.0, c2=0.0)
        with pytest.raises(ValueError):
            EnsembleSpec("gaussian", subgaussian_sigma=0.0, c1=1.0, c2=0.0)
        with pytest.raises(ValueError):
            EnsembleSpec("custom_smooth", subgaussian_sigma=1.0, c1=1.0, c2=1.0)


class TestRandomStream:
    def test_validation(self):
        with pytest.raises(ValueError):
            RandomStream(-1, 0)
        with pytest.raises(ValueError):
            RandomStream(2**64, 0)
        with pytest.raises(ValueError):
            RandomStream(0, -1)
        RandomStream(2**64 - 1, 10**9)  # extremes are fine

    def test_child(self):
        assert RandomStream(5).child(3) == RandomStream(5, 3)


class TestSampling:
    @pytest.mark.parametrize("spec", ALL_FAMILIES, ids=lambda s: s.family)
    def test_deterministic_given_stream(self, spec):
        a = sample_sequence(spec, 257, RandomStream(11, 4))
        b = sample_sequence(spec, 257, RandomStream(11, 4))
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("spec", ALL_FAMILIES, ids=lambda s: s.family)
    def test_replicas_are_distinct_substreams(self, spec):
        a = sample_sequence(spec, 64, RandomStream(11, 0))
        b = sample_sequence(spec, 64, RandomStream(11, 1))
        assert not np.array_equal(a, b)

    def test_rademacher_support(self):
        xs = sample_sequence(rademacher(), 4, RandomStream(0, 0))
        assert set(xs) <= {-1.0, 1.0}
        xs = sample_sequence(rademacher(), 4096, RandomStream(1, 0))
        assert set(np.unique(xs)) == {-1.0, 1.0}

    def test_gaussian_standardized_at_scale(self):
        xs = sample_sequence(gaussian(), 10**6, RandomStream(3, 0))
        assert abs(xs.mean()) <= 4 / math.sqrt(10**6)
        assert abs(xs.var() - 1.0) <= 0.01

    def test_uniform_support_and_variance(self):
        xs = sample_sequence(uniform_symmetric(), 10**6, RandomStream(4, 0))
        assert np.all(np.abs(xs) <= SQRT3)
        assert abs(xs.var() - 1.0) <= 0.01

    @pytest.mark.parametrize("spec", ALL_FAMILIES, ids=lambda s: s.family)
    def test_standardization_five_sigma(self, spec):
        m = 10**5
        xs = sample_sequence(spec, m, RandomStream(12, 0))
        se_mean = xs.std(ddof=1) / math.sqrt(m)
        assert abs(xs.mean()) <= 5 * max(se_mean, 1e-12)
        mu4 = np.mean((xs - xs.mean()) ** 4)
        se_var = math.sqrt(max(mu4 - xs.var() ** 2, 0.0) / m)
        assert abs(xs.var(ddof=1) - 1.0) <= 5 * max(se_var, 1e-12)

    @pytest.mark.parametrize("spec", ALL_FAMILIES, ids=lambda s: s.family)
    def test_subgaussian_tail_proxy(self, spec):
        m = 10**6
        xs = np.abs(sample_sequence(spec, m, RandomStream(13, 0)))
        sigma = spec.subgaussian_sigma
        for t in (1.0, 2.0, 3.0):
            phat = np.mean(xs > t)
            assert phat <= 2 * math.exp(-(t**2) / (2 * sigma**2)) * 1.05

    def test_n_validation(self):
        with pytest.raises(ValueError):
            sample_sequence(gaussian(), 0, RandomStream(0, 0))


class TestSmoothTransform:
    def test_gaussian_identity(self):
        z = np.linspace(-10, 10, 101)
        assert np.array_equal(smooth_transform_value(gaussian(), z), z)

    def test_uniform_at_zero_and_range(self):
        u = uniform_symmetric()
        assert smooth_transform_value(u, 0.0) == pytest.approx(0.0)
        z = np.linspace(-10, 10, 2001)
        vals = smooth_transform_value(u, z)
        assert np.all(np.abs(vals) <= SQRT3)
        # odd symmetry of the transform
        assert np.allclose(vals, -smooth_transform_value(u, -z))

    @pytest.mark.parametrize(
        "spec", [gaussian(), uniform_symmetric()], ids=lambda s: s.family
    )
    def test_derivative_bounds_by_finite_differences(self, spec):
        z = np.linspace(-10, 10, 4001)
        h = 1e-5
        up = (
            smooth_transform_value(spec, z + h) - smooth_transform_value(spec, z - h)
        ) / (2 * h)
        upp = (
            smooth_transform_value(spec, z + h)
            - 2 * smooth_transform_value(spec, z)
            + smooth_transform_value(spec, z - h)
        ) / h**2
        assert np.max(np.abs(up)) <= spec.c1 + 1e-6
        assert np.max(np.abs(upp)) <= spec.c2 + 1e-4

    def test_uniform_derivative_peaks_at_zero(self):
        u = uniform_symmetric()
        h = 1e-6
        d0 = (smooth_transform_value(u, h) - smooth_transform_value(u, -h)) / (2 * h)
        assert d0 == pytest.approx(u.c1, rel=1e-6)

    def test_rejects_rademacher(self):
        with pytest.raises(SmoothnessRequiredError):
            smooth_transform_value(rademacher(), 0.0)


class TestCustomSmooth:
    def test_matches_uniform_when_given_its_transform(self):
        from scipy.special import ndtr

        spec = custom_smooth(
            transform=lambda z: 2 * SQRT3 * (ndtr(z) - 0.5),
            c1=uniform_symmetric().c1,
            c2=uniform_symmetric().c2,
            subgaussian_sigma=SQRT3,
        )
        stream = RandomStream(21, 2)
        a = sample_sequence(spec, 500, stream)
        b = sample_sequence(uniform_symmetric(), 500, stream)
        assert np.allclose(a, b)


class TestVerifyStandardization:
    def test_rademacher_even_abs_moments_exact(self):
        report = verify_standardization(rademacher(), 1000, RandomStream(5, 0), 6)
        for k in (2, 4, 6):
            assert report.abs_moments[k - 1] == 1.0

    def test_gaussian_fourth_moment(self):
        report = verify_standardization(gaussian(), 10**5, RandomStream(6, 0), 4)
        assert abs(report.abs_moments[3] - 3.0) <= 0.2

    def test_uniform_fourth_moment(self):
        report = verify_standardization(
            uniform_symmetric(), 10**5, RandomStream(7, 0), 4
        )
        assert abs(report.abs_moments[3] - 9.0 / 5.0) <= 0.1

    def test_report_consistency(self):
        report = verify_standardization(gaussian(), 5000, RandomStream(8, 0), 5)
        assert report.m == 5000
        assert len(report.abs_moments) == 5
        assert all(se >= 0 for se in report.abs_moment_ses)
        assert abs(report.mean) <= 5 * report.mean_se

    def test_preconditions(self):
        with pytest.raises(ValueError):
            verify_standardization(gaussian(), 99, RandomStream(0, 0), 4)
        with pytest.raises(ValueError):
            verify_standardization(gaussian(), 1000, RandomStream(0, 0), 2)
