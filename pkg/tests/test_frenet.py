import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistlab import gallery
from twistlab.errors import DegenerateFrame, DomainError, NonOrthonormalInitialFrame, RangeError
from twistlab.frenet import (
    CurvatureProfile,
    CurveDef,
    arc_length,
    estimate_curvatures,
    frenet_apparatus,
    param_at_arclength,
    sample_curve,
    synthesize_curve,
)


def helix(p, q, domain=(0.0, 10.0)):
    return CurveDef.from_strings("helix", "p*cos(t)", "p*sin(t)", "q*t", "t", domain, {"p": p, "q": q})


def helix_from_frame(k1, k2, s):
    """Closed-form curve with constant curvatures starting at 0 with frame (e1, e2, e3)."""
    a = math.hypot(k1, k2)
    return np.column_stack(
        (
            k2 * k2 / (a * a) * s + k1 * k1 / a ** 3 * np.sin(a * s),
            k1 / (a * a) * (1 - np.cos(a * s)),
            k1 * k2 / (a * a) * (s - np.sin(a * s) / a),
        )
    )


def rotation(ax, ay, az):
    cx, sx, cy, sy, cz, sz = math.cos(ax), math.sin(ax), math.cos(ay), math.sin(ay), math.cos(az), math.sin(az)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return rz @ ry @ rx


class TestApparatus:
    @pytest.mark.parametrize("p, q", [(1.0, 1.0), (3.0, 4.0), (2.0, -0.5)])
    def test_helix_curvatures(self, p, q):
        c = helix(p, q)
        for t in (0.0, 1.3, 7.9):
            f = frenet_apparatus(c, t)
            assert f.kappa1 == pytest.approx(p / (p * p + q * q), abs=1e-12)
            assert f.kappa2 == pytest.approx(q / (p * p + q * q), abs=1e-12)

    def test_frame_is_orthonormal_and_right_handed(self):
        f = frenet_apparatus(helix(1.0, 1.0), 0.4)
        M = np.vstack((f.T, f.N1, f.N2))
        assert np.allclose(M @ M.T, np.eye(3), atol=1e-12)
        assert np.allclose(np.cross(f.T, f.N1), f.N2, atol=1e-12)

    def test_circle(self):
        c = CurveDef.from_strings("circle", "r*cos(t)", "r*sin(t)", "0", "t", (0.0, 6.0), {"r": 2.5})
        assert c.planar
        f = frenet_apparatus(c, 1.0)
        assert f.kappa1 == pytest.approx(1 / 2.5, rel=1e-14)
        assert f.kappa2 == 0.0
        assert np.allclose(f.N2, [0, 0, 1])
        assert f.signed_kappa == pytest.approx(1 / 2.5, rel=1e-14)

    def test_clockwise_circle_signed_curvature(self):
        c = CurveDef.from_strings("cw", "cos(t)", "-sin(t)", "0", "t", (0.0, 6.0))
        f = frenet_apparatus(c, 1.0)
        assert f.kappa1 == pytest.approx(1.0)
        assert f.signed_kappa == pytest.approx(-1.0)

    def test_line_is_degenerate(self):
        c = CurveDef.from_strings("line", "t", "2*t", "3*t", "t", (0.0, 1.0))
        with pytest.raises(DegenerateFrame) as info:
            frenet_apparatus(c, 0.5)
        assert np.allclose(info.value.tangent, np.array([1, 2, 3]) / math.sqrt(14))

    def test_stationary_point_is_degenerate(self):
        c = CurveDef.from_strings("cusp", "t^2", "t^3", "0", "t", (-1.0, 1.0))
        with pytest.raises(DegenerateFrame):
            frenet_apparatus(c, 0.0)

    def test_outside_domain(self):
        with pytest.raises(RangeError):
            frenet_apparatus(helix(1, 1, (0, 1)), 2.0)

    def test_planar_requires_flat_z(self):
        with pytest.raises(Exception):
            CurveDef.from_strings("bad", "t", "t^2", "t", "t", (0.0, 1.0), planar=True)


@settings(max_examples=25, deadline=None)
@given(
    st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3),
    st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5),
    st.floats(0.2, 9.8),
)
def test_rigid_motion_invariance(ax, ay, az, tx, ty, tz, t):
    R = rotation(ax, ay, az)
    cons = {f"r{i}{j}": float(R[i, j]) for i in range(3) for j in range(3)}
    cons.update(tx=tx, ty=ty, tz=tz)
    x, y, z = "cos(t)", "sin(t)", "0.5*t + 0.1*t^2"
    comps = [f"r{i}0*({x}) + r{i}1*({y}) + r{i}2*({z}) + {d}" for i, d in enumerate(("tx", "ty", "tz"))]
    moved = CurveDef.from_strings("moved", *comps, "t", (0.0, 10.0), cons)
    base = CurveDef.from_strings("base", x, y, z, "t", (0.0, 10.0))
    a, b = frenet_apparatus(base, t), frenet_apparatus(moved, t)
    assert b.kappa1 == pytest.approx(a.kappa1, abs=1e-9)
    assert b.kappa2 == pytest.approx(a.kappa2, abs=1e-9)
    assert np.allclose(R @ a.T, b.T, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(0.1, 2.0), st.floats(0.05, 0.95))
def test_reparametrization_invariance(alpha, beta, u):
    # t = alpha*u + beta*u^3 is monotone on [0, 1]
    base = CurveDef.from_strings("b", "cos(t)", "sin(2*t)", "t^2", "t", (0.0, 4.0))
    sub = f"({alpha}*u + {beta}*u^3)"
    rep = CurveDef.from_strings("r", f"cos({sub})", f"sin(2*{sub})", f"{sub}^2", "u", (0.0, 1.0))
    t = alpha * u + beta * u ** 3
    a, b = frenet_apparatus(base, t), frenet_apparatus(rep, u)
    assert b.kappa1 == pytest.approx(a.kappa1, rel=1e-7)
    assert b.kappa2 == pytest.approx(a.kappa2, rel=1e-7)


class TestArcLength:
    def test_circle(self):
        c = CurveDef.from_strings("c", "2*cos(t)", "2*sin(t)", "0", "t", (0.0, 2 * math.pi))
        assert arc_length(c, 0.0, 2 * math.pi) == pytest.approx(4 * math.pi, abs=1e-10)

    def test_helix(self):
        assert arc_length(helix(3, 4), 0.0, 1.0) == pytest.approx(5.0, abs=1e-10)

    def test_example1_is_unit_speed(self):
        c = gallery.example1()
        assert arc_length(c, 0.5, 5.0) == pytest.approx(4.5, abs=1e-10)

    def test_inverse_helix(self):
        assert param_at_arclength(helix(3, 4), 0.0, 5.0) == pytest.approx(1.0, abs=1e-9)

    def test_inverse_unit_speed(self):
        c = gallery.example1()
        assert param_at_arclength(c, 0.5, 2.25) == pytest.approx(2.75, abs=1e-9)

    @pytest.mark.parametrize("s", [-1.0, 1e6])
    def test_inverse_out_of_range(self, s):
        with pytest.raises(RangeError):
            param_at_arclength(helix(3, 4, (0, 2)), 0.0, s)

    def test_inverse_is_monotone(self):
        c = CurveDef.from_strings("c", "t", "t^2", "t^3/3", "t", (0.0, 2.0))
        ts = [param_at_arclength(c, 0.0, s) for s in np.linspace(0.0, 3.0, 31)]
        assert np.all(np.diff(ts) > 0)
        for s, t in zip(np.linspace(0.0, 3.0, 31), ts):
            assert arc_length(c, 0.0, t) == pytest.approx(s, abs=1e-9)

    def test_domain_error_propagates(self):
        c = CurveDef.from_strings("c", "ln(t)", "t", "0", "t", (-1.0, 1.0))
        with pytest.raises(DomainError):
            arc_length(c, -1.0, 1.0)


class TestSampling:
    def test_uniform_step_and_frames(self):
        sc = sample_curve(helix(1.0, 1.0), 200)
        assert np.allclose(np.diff(sc.s), sc.step, atol=1e-9)
        assert sc.orthonormality_error() < 1e-9
        assert np.allclose(np.cross(sc.T, sc.N1), sc.N2, atol=1e-12)

    def test_unit_speed_keeps_parameter(self):
        sc = sample_curve(gallery.example1(), 128)
        assert np.allclose(sc.s, sc.t, atol=1e-9)

    def test_arc_length_positions(self):
        # helix of speed 5: s = 5 t
        sc = sample_curve(helix(3.0, 4.0, (0.0, 2.0)), 65)
        assert np.allclose(sc.t, sc.s / 5.0, atol=1e-9)

    def test_degenerate_raises_unless_allowed(self):
        line = gallery.line(1.0, 2.0, 3.0)
        with pytest.raises(DegenerateFrame):
            sample_curve(line, 16)
        sc = sample_curve(line, 16, allow_degenerate=True)
        assert not sc.frames_valid
        assert np.allclose(sc.T, np.array([1, 2, 3]) / math.sqrt(14))
        assert np.all(np.isnan(sc.N1))

    def test_serret_frenet_derivatives(self):
        # dT/ds = k1 N1, dN2/ds = -k2 N1 up to the sampling error
        sc = sample_curve(helix(1.0, 1.0), 512)
        h = sc.step
        dT = (sc.T[2:] - sc.T[:-2]) / (2 * h)
        dN2 = (sc.N2[2:] - sc.N2[:-2]) / (2 * h)
        assert np.max(np.abs(dT - sc.kappa1[1:-1, None] * sc.N1[1:-1])) < 10 * h * h
        assert np.max(np.abs(dN2 + sc.kappa2[1:-1, None] * sc.N1[1:-1])) < 10 * h * h


class TestSynthesis:
    def test_constant_curvatures_give_helix(self):
        p = CurvatureProfile.from_strings("0.5", "0.5", (0.0, 12.0))
        sc = synthesize_curve(p, 4096)
        exact = helix_from_frame(0.5, 0.5, sc.s)
        assert np.max(np.linalg.norm(sc.position - exact, axis=1)) < 1e-6

    def test_fourth_order_convergence(self):
        p = CurvatureProfile.from_strings("0.5", "0.5", (0.0, 12.0))
        errs = []
        for steps in (64, 256):
            sc = synthesize_curve(p, steps)
            errs.append(np.max(np.linalg.norm(sc.position - helix_from_frame(0.5, 0.5, sc.s), axis=1)))
        ratio = errs[0] / errs[1]
        assert 256 / 4 < ratio < 256 * 4

    def test_zero_torsion_gives_unit_circle(self):
        p = CurvatureProfile.from_strings("1", "0", (0.0, 6.0))
        sc = synthesize_curve(p, 2048)
        centre = np.array([0.0, 1.0, 0.0])
        assert np.allclose(np.linalg.norm(sc.position - centre, axis=1), 1.0, atol=1e-10)
        assert np.allclose(sc.position[:, 2], 0.0, atol=1e-12)

    def test_orthonormality_is_maintained(self):
        p = CurvatureProfile.from_strings("1 + 0.5*sin(s)", "s/3", (0.0, 20.0))
        sc = synthesize_curve(p, 4096)
        assert sc.orthonormality_error() < 1e-9
        assert sc.provenance == "synthesized"

    def test_curvature_round_trip(self):
        p = CurvatureProfile.from_strings("1 + 0.3*cos(s)", "0.4 + 0.2*s", (0.0, 6.0))
        sc = synthesize_curve(p, 4096)
        k1, k2 = estimate_curvatures(sc)
        exp1 = np.array([p.kappa1(v) for v in sc.s])
        exp2 = np.array([p.kappa2(v) for v in sc.s])
        assert np.max(np.abs(k1 - exp1) / exp1) < 1e-5
        assert np.max(np.abs(k2 - exp2) / np.abs(exp2)) < 1e-5

    def test_custom_initial_frame(self):
        R = rotation(0.3, -0.2, 1.1)
        p = CurvatureProfile.from_strings("0.5", "0.5", (0.0, 5.0))
        base = synthesize_curve(p, 512)
        moved = synthesize_curve(p, 512, position=(1.0, 2.0, 3.0), frame=R.T)
        assert np.allclose(moved.position, base.position @ R.T + [1.0, 2.0, 3.0], atol=1e-12)

    def test_rejects_bad_frame(self):
        p = CurvatureProfile.from_strings("1", "1", (0.0, 1.0))
        with pytest.raises(NonOrthonormalInitialFrame):
            synthesize_curve(p, 16, frame=np.diag([1.0, 1.0, 1.1]))

    def test_rejects_nonpositive_curvature(self):
        p = CurvatureProfile.from_strings("s - 1", "1", (0.0, 2.0))
        with pytest.raises(DomainError):
            synthesize_curve(p, 64)

    def test_profile_domain(self):
        with pytest.raises(RangeError):
            CurvatureProfile.from_strings("1", "1", (2.0, 1.0))
