import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistlab import gallery
from twistlab.decomp import decompose, decompose_curve, ode_residuals
from twistlab.errors import InsufficientSamples
from twistlab.frenet import CurveDef, frenet_apparatus, sample_curve, synthesize_curve


@pytest.fixture(scope="module")
def example1_samples():
    return sample_curve(gallery.example1(0.3, 0.6), 512)


@pytest.fixture(scope="module")
def helix_samples():
    return sample_curve(gallery.helix(1.0, 1.0, (0.0, 10.0)), 512)


def test_example1_point():
    c = gallery.example1(0.3, 0.6)
    d = decompose(frenet_apparatus(c, 2.0, 2.0))
    # rho = s*sqrt(k^2 + a^2) = c*s
    assert d.rho == pytest.approx(1.2, rel=1e-14)
    assert d.grad_norm == pytest.approx(0.6, rel=1e-14)


def test_helix_tangential_component(helix_samples):
    # <x, T> = u/sqrt(2) at parameter u, and s = sqrt(2) u, so m0 = s/2
    D = decompose_curve(helix_samples)
    assert np.allclose(D.m0, helix_samples.s / 2, atol=1e-12)


def test_origin_passage_marks_grad_undefined():
    c = CurveDef.from_strings("thru", "t", "t^2", "t^3", "t", (-1.0, 1.0))
    sc = sample_curve(c, 101, allow_degenerate=True)
    D = decompose_curve(sc)
    assert D.undefined_grad.size >= 1
    i = int(np.argmin(D.rho))
    assert D[i].grad_norm is None
    assert D.summary()["undefined_grad_norm_points"] == D.undefined_grad.size


def test_pythagoras_and_grad_bound(example1_samples, helix_samples):
    for sc in (example1_samples, helix_samples):
        D = decompose_curve(sc, (0.3, -1.0, 2.0))
        lhs = D.m0 ** 2 + D.m1 ** 2 + D.m2 ** 2
        assert np.allclose(lhs, D.rho ** 2, rtol=0, atol=1e-9 * (1 + D.rho.max() ** 2))
        g = D.grad_norm[np.isfinite(D.grad_norm)]
        assert np.all((g >= 0) & (g <= 1 + 1e-9))
        assert np.allclose(D.normal_norm ** 2 + D.m0 ** 2, D.rho ** 2, atol=1e-9 * (1 + D.rho.max() ** 2))


@settings(max_examples=20, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_origin_covariance(px, py, pz):
    p = np.array([px, py, pz])
    base = sample_curve(gallery.helix(2.0, 0.5, (0.0, 6.0)), 64)
    moved = base.transformed(np.eye(3), -p)
    a = decompose_curve(base, p)
    b = decompose_curve(moved)
    for name in ("m0", "m1", "m2", "rho"):
        assert np.allclose(getattr(a, name), getattr(b, name), atol=1e-12)


def test_sample_level_matches_series(helix_samples):
    D = decompose_curve(helix_samples, (1.0, 0.0, 0.0))
    single = decompose(helix_samples[17], (1.0, 0.0, 0.0), D.scale)
    assert single.m0 == pytest.approx(D.m0[17], abs=1e-14)
    assert single.normal_norm == pytest.approx(D.normal_norm[17], abs=1e-14)
    assert single.tangential_norm == pytest.approx(abs(D.m0[17]), abs=1e-14)


class TestOdeResiduals:
    def test_smooth_curve_small(self, example1_samples, helix_samples):
        for sc in (example1_samples, helix_samples):
            r = ode_residuals(sc, decompose_curve(sc, (0.2, 0.1, -0.3)))
            assert r.max < 1e-5

    def test_helix_residuals_tiny(self, helix_samples):
        # m0 = s/2, m1 = -1, m2 = s/2 are linear, so the stencil is exact
        r = ode_residuals(helix_samples, decompose_curve(helix_samples))
        assert r.max < 1e-9

    def test_perturbation_is_linear(self, helix_samples):
        D = decompose_curve(helix_samples)
        base = ode_residuals(helix_samples, D)
        D.m1 = D.m1 + 0.1
        bumped = ode_residuals(helix_samples, D)
        assert np.allclose(bumped.tangent - base.tangent, -0.1 * helix_samples.kappa1, atol=1e-9)
        assert np.allclose(bumped.binormal - base.binormal, 0.1 * helix_samples.kappa2, atol=1e-9)

    def test_truncation_error_is_fourth_order(self):
        prof = gallery.make_canonical(gallery.CanonicalSpec("CONCHO_PROFILE", {}))
        errs = []
        for steps in (511, 1023):
            sc = synthesize_curve(prof, steps)
            errs.append(ode_residuals(sc, decompose_curve(sc)).max)
        assert 8 < errs[0] / errs[1] < 32

    def test_too_few_samples(self):
        sc = sample_curve(gallery.helix(), 6)
        with pytest.raises(InsufficientSamples):
            ode_residuals(sc, decompose_curve(sc))

    def test_stats_shape(self, helix_samples):
        stats = ode_residuals(helix_samples, decompose_curve(helix_samples)).stats()
        assert set(stats) == {"tangent", "normal", "binormal"}
        assert set(stats["normal"]) == {"max", "rms"}
