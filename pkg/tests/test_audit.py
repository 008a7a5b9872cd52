import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistlab import audit, gallery
from twistlab.classify import fit_rectifying_origin, fit_t_constant_origin
from twistlab.decomp import decompose_curve
from twistlab.errors import DegenerateFrame, InsufficientSamples, NotTConstant, ParamError, RangeError
from twistlab.frenet import CurvatureProfile, sample_curve, synthesize_curve

HOLDS, FAILS, CORRECTED = audit.HOLDS, audit.FAILS, audit.CORRECTED


class TestFirstKind:
    def test_example4_fails_with_known_residual(self):
        r = audit.audit_c7(gallery.example4_profile())
        assert r.verdict == FAILS
        # k1 = s, k2 = 1/((ln s + 1) s^2): k2/k1 = 1/(s^3 (ln s + 1)) while (k1'/(k1^2 k2))' = 1/s
        s = r.s
        oracle = 1 / (s ** 3 * (np.log(s) + 1)) - 1 / s
        assert np.allclose(r.residual, oracle, rtol=0, atol=1e-14)

    def test_c9_profile_holds(self):
        r = audit.audit_c7(gallery.c9_profile())
        assert r.verdict == HOLDS and r.residual_max < 1e-12

    def test_c9_profile_with_polynomial_torsion(self):
        r = audit.audit_c7(gallery.c9_profile("0.5 + s", (-0.8, 0.5)))
        assert r.verdict == HOLDS

    def test_zero_torsion_is_a_domain_error(self):
        from twistlab.errors import DomainError

        with pytest.raises(DomainError):
            audit.audit_c7(CurvatureProfile.from_strings("1", "s", (-1.0, 1.0)), points=9)


class TestSecondKind:
    def test_const_k1_profile_holds(self):
        r = audit.audit_c11(1.0, 1.0, 1.0, (0.0, 3.0))
        assert r.verdict == HOLDS and r.residual_max < 1e-12

    @pytest.mark.parametrize("k, m0, c1", [(2.0, 0.5, 0.3), (0.5, 3.0, -0.1)])
    def test_const_k1_family(self, k, m0, c1):
        assert audit.audit_c11(k, m0, c1, (0.1, 2.0)).verdict == HOLDS

    def test_wrong_m0_fails(self):
        r = audit.audit_c10(audit.const_k1_profile(1.0, 1.0, 1.0), 2.0)
        assert r.verdict == FAILS

    def test_bad_parameters(self):
        with pytest.raises(ParamError):
            audit.const_k1_profile(k=0.0)
        with pytest.raises(ParamError):
            audit.audit_c10(audit.const_k1_profile(), 0.0)
        with pytest.raises(RangeError):
            audit.audit_c11(domain=(2.0, 1.0))
        with pytest.raises(InsufficientSamples):
            audit.audit_c11(points=5)


class TestGeneralHelix:
    def test_default_needs_correction(self):
        r = audit.audit_c12()
        assert r.verdict == CORRECTED
        assert r.residual_max > 0.1
        assert r.details["derived_form_deviation_max"] < 1e-10
        assert r.details["second_kind_verdict"] == HOLDS

    def test_ode_oracle_matches_closed_form(self):
        # k1' = -k1^3 (m0 - lam^2 s - lam c1) has the closed form 1/sqrt(-lam^2 s^2 + 2 c2 s + K)
        lam, m0, c1 = -1.0, 0.5, 0.2
        r = audit.audit_c12(lam, m0, c1, (0.0, 0.5), kappa1_0=1.0)
        assert r.details["derived_constant_K"] == pytest.approx(1.0)
        assert r.details["derived_form_deviation_max"] < 1e-10
        assert r.details["second_kind_residual_max"] < audit.TOL_GRID

    def test_lambda_zero_rejected(self):
        with pytest.raises(ParamError):
            audit.audit_c12(lam=0.0)


class TestStructureSolutions:
    def test_w_curve(self):
        r = audit.audit_c6(1.0, 0.5)
        assert r.verdict == CORRECTED
        assert r.details["corrected_residual_max"] < 1e-12
        assert r.details["constraint_kappa2c1_minus_kappa1c0"] == 0.0

    def test_w_curve_constraint_is_reported(self):
        r = audit.audit_c6(1.0, 0.5, c0=1.0, c1=1.0)
        assert r.details["constraint_kappa2c1_minus_kappa1c0"] == pytest.approx(-0.5)
        assert r.verdict == FAILS

    def test_plane_equiangular(self):
        r = audit.audit_d2()
        assert r.verdict == CORRECTED
        assert r.residual_max == pytest.approx(1.0)
        assert r.details["corrected_residual_max"] < 1e-12

    def test_plane_equiangular_without_slope(self):
        r = audit.audit_d2(a=0.0, b=1.0)
        assert math.isinf(r.residual_max)
        assert r.verdict == CORRECTED

    def test_concho(self):
        r = audit.audit_d4()
        assert r.verdict == CORRECTED
        assert r.details["derived_vs_quadrature_max"] < 1e-12
        assert not r.details["m0_constant"]

    def test_concho_similar_radii_holds(self):
        assert audit.audit_d4(a=0.2, b=1.0, c=0.2, d=1.0).verdict == HOLDS

    def test_plane_curvature_times_s(self):
        r = audit.audit_cor1iv()
        assert r.verdict == CORRECTED
        # kappa s = sqrt(1 - c^2)/c for the plane curve with |grad rho| = c
        assert r.details["kappa_s_mean"] == pytest.approx(0.8 / 0.6, rel=1e-12)
        assert r.details["kappa_s_max_deviation"] < 1e-12


class TestSampledChecks:
    def test_circle_is_n_constant(self):
        r = audit.audit_n_constant(sample_curve(gallery.circle(2.0), 256))
        assert r.verdict == HOLDS and r.details["kind"] == "second"

    def test_off_axis_helix_is_not(self):
        r = audit.audit_n_constant(sample_curve(gallery.helix(1.0, 1.0), 256), (3.0, 0.0, 0.0))
        assert r.verdict == FAILS

    def test_ratio_linear_curve_about_fitted_origin(self):
        sc = synthesize_curve(gallery.ratio_linear_profile(0.5, 2.0), 2048)
        origin = fit_rectifying_origin(sc).origin
        r = audit.audit_n_constant(sc, origin)
        assert r.verdict == HOLDS
        assert abs(r.details["lambda"]) == pytest.approx(0.5, abs=1e-6)
        assert abs(r.details["mu"]) == pytest.approx(2.0, abs=1e-6)

    def test_line_has_no_frame(self):
        sc = sample_curve(gallery.line(), 64, allow_degenerate=True)
        with pytest.raises(DegenerateFrame):
            audit.audit_n_constant(sc)

    def test_distance_slope_is_twice_m0(self):
        sc = synthesize_curve(audit.const_k1_profile(1.0, 1.0, 1.0), 2048)
        r = audit.audit_rho_t_second(sc, audit.t_constant_origin(sc))
        assert r.verdict == CORRECTED
        assert r.details["slope"] == pytest.approx(2 * r.params["m0"], rel=1e-6)

    def test_circle_distance_is_first_kind(self):
        r = audit.audit_rho_t_second(sample_curve(gallery.circle(1.5), 128))
        assert r.verdict == HOLDS and r.details["kind"] == "first"

    def test_rectifying_curve_is_not_t_constant(self):
        sc = synthesize_curve(CurvatureProfile.from_strings("1", "s", (0.1, 3.0)), 1024)
        with pytest.raises(NotTConstant):
            audit.audit_rho_t_second(sc, fit_rectifying_origin(sc).origin)


def test_report_is_deterministic():
    a = audit.audit_c12().as_dict()
    b = audit.audit_c12().as_dict()
    assert a == b
    assert list(a) == ["characterization_id", "params", "residual_max", "residual_rms", "tolerance",
                       "verdict", "correction_note", "details"]


@settings(max_examples=15, deadline=None)
@given(st.floats(0.25, 8.0))
def test_first_kind_residual_is_scale_free(L):
    # kappa -> kappa/L under x -> L x(s/L); the first-kind residual is dimensionless
    base = audit.audit_c7(gallery.example4_profile(), points=64)
    prof = CurvatureProfile.from_strings(
        "(s/L)/L", "1/((ln(s/L) + 1)*(s/L)^2*L)", (L, 3 * L), {"L": L}
    )
    scaled = audit.audit_c7(prof, points=64)
    assert np.allclose(scaled.s / L, base.s, rtol=1e-13)
    assert np.allclose(scaled.residual, base.residual, rtol=1e-9, atol=1e-13)
    assert scaled.verdict == base.verdict


@settings(max_examples=10, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.2, 3.0), st.floats(0.0, 2.0))
def test_second_kind_profiles_always_hold(k, m0, c1):
    assert audit.audit_c11(k, m0, c1, (0.1, 2.0), points=64).verdict == HOLDS


def test_constant_curvatures_fail_both_kinds():
    # constant kappa1, kappa2: the first-kind residual is k2/k1 and the second-kind one is -1 when k1 = k2
    r = audit.audit_c7(CurvatureProfile.from_strings("2", "0.5", (0.0, 1.0)), points=16)
    assert r.verdict == FAILS and np.allclose(r.residual, 0.25)
    r = audit.audit_c10(CurvatureProfile.from_strings("0.7", "0.7", (0.0, 1.0)), 1.0, points=16)
    assert r.verdict == FAILS and np.allclose(r.residual, -1.0)


def test_general_helix_satisfies_second_kind_numerically():
    assert audit.audit_c12(0.5).details["second_kind_residual_max"] < 1e-6


def test_w_curve_constraint_shows_in_the_normal_equation():
    r = audit.audit_c6(1.0, 0.5, c0=1.0, c1=1.0)
    res = r.details["corrected_residuals"]
    assert res["normal"] == pytest.approx(0.5, rel=1e-12)
    assert res["tangent"] < 1e-12 and res["binormal"] < 1e-12


def test_plane_circle_case():
    r = audit.audit_d2(a=0.0, b=2.0)
    assert r.details["corrected_residual_max"] < 1e-10


def test_concho_with_constant_torsion_radius():
    r = audit.audit_d4(c=0.0)
    assert r.details["derived_vs_quadrature_max"] < 1e-8


def test_curvature_times_s_vanishes_as_c_tends_to_one():
    values = [audit.audit_cor1iv(c=c).details["kappa_s_mean"] for c in (0.6, 0.9, 0.99, 0.999)]
    assert values == sorted(values, reverse=True) and values[-1] < 0.05


def test_c9_family_has_zero_tangential_component():
    sc = synthesize_curve(gallery.c9_profile(), 2048)
    fit = fit_t_constant_origin(sc)
    D = decompose_curve(sc, fit.origin)
    assert np.max(np.abs(D.m0)) < 1e-5


@pytest.mark.parametrize(
    "run",
    [
        lambda n: audit.audit_c7(gallery.example4_profile(), n),
        lambda n: audit.audit_c7(gallery.c9_profile(), n),
        lambda n: audit.audit_c11(points=n),
        lambda n: audit.audit_c12(points=n),
        lambda n: audit.audit_c6(0.6, 0.8, c1=1.0, points=n),
        lambda n: audit.audit_d2(points=n),
        lambda n: audit.audit_d4(points=n),
        lambda n: audit.audit_cor1iv(points=n),
    ],
)
def test_verdict_does_not_flip_with_resolution(run):
    assert run(256).verdict == run(512).verdict
