import math

import mpmath
import numpy as np
import pytest

from vmfkit import SamplerConfig, VmfParams, log_density, log_norm_const, normalize, sample_vmf
from vmfkit.vmf import as_unit_rows


def test_normalize():
    v = normalize(np.array([3.0, 4.0]))
    assert np.allclose(v, [0.6, 0.8])
    with pytest.raises(ValueError):
        normalize(np.zeros(3))
    with pytest.raises(ValueError):
        normalize(np.array([1.0, np.nan]))


class TestVmfParams:
    def test_valid_construction(self):
        p = VmfParams(mu=np.array([1.0, 0.0, 0.0]), kappa=2.5)
        assert p.d == 3
        assert not p.mu.flags.writeable

    def test_rejects_off_sphere_mu(self):
        with pytest.raises(ValueError):
            VmfParams(mu=np.array([1.0, 1e-4, 0.0]), kappa=1.0)

    def test_rejects_bad_kappa(self):
        mu = np.array([1.0, 0.0])
        with pytest.raises(ValueError):
            VmfParams(mu=mu, kappa=-1.0)
        with pytest.raises(ValueError):
            VmfParams(mu=mu, kappa=math.inf)

    def test_rejects_scalar_dimension(self):
        with pytest.raises(ValueError):
            VmfParams(mu=np.array([1.0]), kappa=1.0)


class TestLogNormConst:
    def test_three_dim_closed_form(self):
        # C_3(kappa) = kappa / (4 pi sinh kappa)
        assert log_norm_const(3, 1.0) == pytest.approx(
            math.log(1.0 / (4.0 * math.pi * math.sinh(1.0))), rel=1e-12
        )

    def test_uniform_limit(self):
        assert log_norm_const(3, 0.0) == pytest.approx(math.log(1.0 / (4.0 * math.pi)), rel=1e-12)

    def test_continuity_at_zero(self):
        assert log_norm_const(7, 1e-12) == pytest.approx(log_norm_const(7, 0.0), rel=1e-9)

    def test_high_dimension_small_kappa_no_underflow(self):
        v = log_norm_const(100, 0.01)
        assert math.isfinite(v)
        d, kappa = 100, mpmath.mpf("0.01")
        with mpmath.workprec(300):
            s = mpmath.mpf(d) / 2 - 1
            ref = float(
                s * mpmath.log(kappa)
                - mpmath.mpf(d) / 2 * mpmath.log(2 * mpmath.pi)
                - mpmath.log(mpmath.besseli(s, kappa))
            )
        assert v == pytest.approx(ref, rel=1e-10)

    def test_rejects_low_dimension(self):
        with pytest.raises(ValueError):
            log_norm_const(1, 1.0)


class TestLogDensity:
    def test_uniform_case_ignores_location(self):
        p = VmfParams(mu=np.array([0.0, 0.0, 1.0]), kappa=0.0)
        assert log_density(p, p.mu) == pytest.approx(log_norm_const(3, 0.0), rel=1e-12)

    def test_mode_value_closed_form(self):
        p = VmfParams(mu=np.array([1.0, 0.0, 0.0]), kappa=2.0)
        expected = 2.0 + math.log(2.0 / (4.0 * math.pi * math.sinh(2.0)))
        assert log_density(p, p.mu) == pytest.approx(expected, rel=1e-12)

    def test_depends_only_on_projection(self):
        # equal mu @ x gives bitwise-equal log densities
        p = VmfParams(mu=np.array([1.0, 0.0, 0.0, 0.0]), kappa=7.0)
        t = 0.3
        r = math.sqrt(1.0 - t * t)
        x1 = np.array([t, r, 0.0, 0.0])
        x2 = np.array([t, 0.0, 0.0, r])
        assert log_density(p, x1) == log_density(p, x2)

    def test_mode_is_maximal(self):
        rng = np.random.default_rng(11)
        p = VmfParams(mu=normalize(rng.standard_normal(6)), kappa=9.0)
        at_mode = log_density(p, p.mu)
        xs = rng.standard_normal((200, 6))
        xs /= np.linalg.norm(xs, axis=1, keepdims=True)
        assert np.all(log_density(p, xs) <= at_mode + 1e-12)

    def test_batch_matches_single(self):
        rng = np.random.default_rng(5)
        p = VmfParams(mu=normalize(rng.standard_normal(4)), kappa=3.0)
        xs = rng.standard_normal((10, 4))
        xs /= np.linalg.norm(xs, axis=1, keepdims=True)
        batch = log_density(p, xs)
        singles = [log_density(p, x) for x in xs]
        assert np.allclose(batch, singles, rtol=0, atol=0)

    def test_rejects_off_sphere_and_mismatched_input(self):
        p = VmfParams(mu=np.array([1.0, 0.0, 0.0]), kappa=1.0)
        with pytest.raises(ValueError):
            log_density(p, np.array([1.0, 2e-3, 0.0]))
        with pytest.raises(ValueError):
            log_density(p, np.array([1.0, 0.0]))

    def test_monte_carlo_normalization(self):
        # the density integrates to 1 over S^2 (uniform importance sampling)
        p = VmfParams(mu=np.array([0.0, 1.0, 0.0]), kappa=2.0)
        rng = np.random.default_rng(42)
        n = 1_000_000
        u = rng.standard_normal((n, 3))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        vals = np.exp(log_density(p, u)) * 4.0 * math.pi
        estimate = float(vals.mean())
        stderr = float(vals.std(ddof=1)) / math.sqrt(n)
        assert abs(estimate - 1.0) <= 3.0 * stderr


def test_as_unit_rows_rejects_rather_than_renormalizes():
    x = np.ones((3, 4)) / 2.0
    x[1] *= 1.01
    with pytest.raises(ValueError, match="norm"):
        as_unit_rows(x)


def test_sampled_rows_pass_validation():
    p = VmfParams(mu=np.array([1.0, 0.0, 0.0]), kappa=5.0)
    x = sample_vmf(p, 100, SamplerConfig(seed=1))
    assert as_unit_rows(x) is not None
