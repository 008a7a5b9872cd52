"""Frenet apparatus of parametric curves, arc-length sampling and curve synthesis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import expr as ex
from .errors import DegenerateFrame, DomainError, NonOrthonormalInitialFrame, ParamError, RangeError
from .numerics import adaptive_simpson, fd_weights

EPS_SPEED = 1e-12
EPS_FRAME = 1e-9
DEFAULT_SAMPLES = 512
DEFAULT_STEPS = 4096


@dataclass(frozen=True)
class CurveDef:
    """A space curve given by three coordinate expressions in one parameter."""

    name: str
    components: tuple  # three Expressions
    domain: tuple  # (t0, t1)
    constants: Mapping[str, float] = field(default_factory=dict)
    planar: bool = False

    def __post_init__(self):
        t0, t1 = self.domain
        if not t0 < t1:
            raise RangeError(f"curve domain needs t0 < t1, got {self.domain!r}")
        if len(self.components) != 3:
            raise ParamError("a curve needs exactly three components")
        if self.planar:
            z = self.components[2]
            if z.depends_on_parameter() or z(t0) != 0.0:
                raise ParamError("a planar curve must have z identically 0")

    @classmethod
    def from_strings(cls, name, x, y, z, parameter="t", domain=(0.0, 1.0), constants=None, planar=None):
        constants = dict(constants or {})
        comps = tuple(ex.parse(src, parameter, constants) for src in (x, y, z))
        if planar is None:
            planar = not comps[2].depends_on_parameter() and comps[2](domain[0]) == 0.0
        return cls(name, comps, (float(domain[0]), float(domain[1])), constants, bool(planar))

    @property
    def parameter(self):
        return self.components[0].parameter

    @property
    def warnings(self):
        seen = []
        for c in self.components:
            for w in c.warnings:
                if w not in seen:
                    seen.append(w)
        return seen

    def jets(self, t):
        return [c.jet(t) for c in self.components]

    def point(self, t):
        return np.array([c(t) for c in self.components])

    def speed(self, t):
        x, y, z = (c.jet(t) for c in self.components)
        return math.sqrt(x.d1 * x.d1 + y.d1 * y.d1 + z.d1 * z.d1)


@dataclass(frozen=True)
class FrenetSample:
    s: float
    t: float
    position: np.ndarray
    T: np.ndarray
    N1: np.ndarray
    N2: np.ndarray
    kappa1: float
    kappa2: float
    signed_kappa: float | None = None


@dataclass(frozen=True)
class CurvatureProfile:
    """A curve given intrinsically by curvature and torsion as functions of arc length."""

    kappa1: ex.Expression
    kappa2: ex.Expression
    domain: tuple
    name: str = "profile"

    def __post_init__(self):
        s0, s1 = self.domain
        if not s0 < s1:
            raise RangeError(f"profile domain needs s0 < s1, got {self.domain!r}")

    @classmethod
    def from_strings(cls, kappa1, kappa2, domain, constants=None, parameter="s", name="profile"):
        constants = dict(constants or {})
        return cls(
            ex.parse(kappa1, parameter, constants),
            ex.parse(kappa2, parameter, constants),
            (float(domain[0]), float(domain[1])),
            name,
        )


@dataclass
class SampledCurve:
    """Frenet samples on a uniform arc-length grid, stored column-wise."""

    s: np.ndarray
    t: np.ndarray
    position: np.ndarray  # (n, 3)
    T: np.ndarray
    N1: np.ndarray
    N2: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    provenance: str = "analyzed"
    signed_kappa: np.ndarray | None = None
    planar: bool = False
    name: str = ""

    def __len__(self):
        return self.s.shape[0]

    def __getitem__(self, i):
        return FrenetSample(
            float(self.s[i]),
            float(self.t[i]),
            self.position[i],
            self.T[i],
            self.N1[i],
            self.N2[i],
            float(self.kappa1[i]),
            float(self.kappa2[i]),
            None if self.signed_kappa is None else float(self.signed_kappa[i]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def step(self):
        return float(self.s[1] - self.s[0])

    @property
    def frames_valid(self):
        return bool(np.all(np.isfinite(self.N1)) and np.all(np.isfinite(self.kappa2)))

    def scale(self, origin=(0.0, 0.0, 0.0)):
        """Largest distance of a sample from ``origin``."""
        return float(np.max(np.linalg.norm(self.position - np.asarray(origin, float), axis=1)))

    def orthonormality_error(self):
        frames = np.stack([self.T, self.N1, self.N2], axis=1)  # (n, 3, 3)
        gram = frames @ frames.transpose(0, 2, 1)
        err = np.max(np.abs(gram - np.eye(3)), axis=(1, 2))
        handed = np.max(np.abs(np.cross(self.T, self.N1) - self.N2), axis=1)
        return float(max(np.max(err), np.max(handed)))

    def transformed(self, rotation=None, translation=(0.0, 0.0, 0.0)):
        """Rigidly moved copy; curvatures are unchanged by construction."""
        R = np.eye(3) if rotation is None else np.asarray(rotation, float)
        v = np.asarray(translation, float)
        return SampledCurve(
            self.s.copy(),
            self.t.copy(),
            self.position @ R.T + v,
            self.T @ R.T,
            self.N1 @ R.T,
            self.N2 @ R.T,
            self.kappa1.copy(),
            self.kappa2.copy(),
            self.provenance,
            None if self.signed_kappa is None else self.signed_kappa.copy(),
            self.planar,
            self.name,
        )


def _apparatus_from_jets(jx, jy, jz, planar):
    d1 = (jx.d1, jy.d1, jz.d1)
    d2 = (jx.d2, jy.d2, jz.d2)
    d3 = (jx.d3, jy.d3, jz.d3)
    speed = math.sqrt(d1[0] ** 2 + d1[1] ** 2 + d1[2] ** 2)
    if speed < EPS_SPEED:
        raise DegenerateFrame(f"speed {speed:.3g} below {EPS_SPEED:g}")
    c = (
        d1[1] * d2[2] - d1[2] * d2[1],
        d1[2] * d2[0] - d1[0] * d2[2],
        d1[0] * d2[1] - d1[1] * d2[0],
    )
    cn = math.sqrt(c[0] ** 2 + c[1] ** 2 + c[2] ** 2)
    speed3 = speed ** 3
    T = np.array(d1) / speed
    if cn < EPS_FRAME * speed3:
        raise DegenerateFrame(f"|x' x x''| = {cn:.3g} vanishes relative to speed^3 (straight or inflection)", tangent=T)
    N2 = np.array(c) / cn
    N1 = np.cross(N2, T)
    kappa1 = cn / speed3
    signed = None
    if planar:
        kappa2 = 0.0
        signed = c[2] / speed3
    else:
        kappa2 = (c[0] * d3[0] + c[1] * d3[1] + c[2] * d3[2]) / (cn * cn)
    return T, N1, N2, kappa1, kappa2, signed


def frenet_apparatus(curve: CurveDef, t: float, s: float = math.nan) -> FrenetSample:
    """Frame, curvature and (signed) torsion at parameter ``t``.

    Raises :class:`DegenerateFrame` on zero speed or where ``x' x x''`` vanishes.
    """
    t0, t1 = curve.domain
    if not t0 <= t <= t1:
        raise RangeError(f"t={t!r} outside domain {curve.domain!r}")
    jx, jy, jz = curve.jets(t)
    T, N1, N2, k1, k2, signed = _apparatus_from_jets(jx, jy, jz, curve.planar)
    return FrenetSample(s, t, np.array([jx.f, jy.f, jz.f]), T, N1, N2, k1, k2, signed)


def _check_interval(curve, a, b):
    t0, t1 = curve.domain
    if not (t0 <= a <= t1 and t0 <= b <= t1):
        raise RangeError(f"[{a!r}, {b!r}] not inside domain {curve.domain!r}")


def arc_length(curve: CurveDef, a: float, b: float, tol: float = 1e-10) -> float:
    """Length of the curve between parameters ``a`` and ``b`` (adaptive Simpson)."""
    _check_interval(curve, a, b)
    return adaptive_simpson(curve.speed, a, b, tol=tol)


def _solve_length(curve, ta, target, t_hi, tol=1e-13):
    """Parameter ``t`` in ``[ta, t_hi]`` with ``arc(ta, t) = target`` (Newton, bisection fallback)."""
    if target <= 0.0:
        return ta
    lo, hi = ta, t_hi
    sp = curve.speed(ta)
    t = ta + target / sp if sp > 0 else 0.5 * (lo + hi)
    if not lo < t < hi:
        t = 0.5 * (lo + hi)
    for _ in range(200):
        F = adaptive_simpson(curve.speed, ta, t, tol=1e-14, min_depth=0) - target
        if abs(F) <= tol:
            return t
        if F > 0:
            hi = t
        else:
            lo = t
        sp = curve.speed(t)
        t_new = t - F / sp if sp > 0 else 0.5 * (lo + hi)
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        if t_new == t or hi - lo <= 4 * np.spacing(abs(t) + 1.0):
            return t_new
        t = t_new
    return t


def param_at_arclength(curve: CurveDef, t0: float, s: float) -> float:
    """Parameter at which the arc length measured from ``t0`` equals ``s``."""
    t_end = curve.domain[1]
    _check_interval(curve, t0, t0)
    if s < 0:
        raise RangeError(f"arc length {s!r} is negative")
    total = arc_length(curve, t0, t_end)
    if s > total * (1 + 1e-12) + 1e-12:
        raise RangeError(f"arc length {s!r} exceeds reachable length {total!r}")
    if s >= total:
        return t_end
    return _solve_length(curve, t0, s, t_end, tol=1e-12)


def sample_curve(curve: CurveDef, samples: int = DEFAULT_SAMPLES, allow_degenerate: bool = False) -> SampledCurve:
    """Uniform arc-length sampling of ``curve`` with the Frenet apparatus at every point.

    Arc length is measured from the start of the domain and offset by ``t0``,
    so a unit-speed curve keeps its own parameter as ``s``.  With
    ``allow_degenerate`` points without a normal frame keep ``T`` and get NaN
    normals and torsion instead of raising.
    """
    if samples < 2:
        raise ParamError("need at least two samples")
    t0, t1 = curve.domain
    total = arc_length(curve, t0, t1)
    h = total / (samples - 1)
    ts = np.empty(samples)
    ts[0] = t0
    for k in range(1, samples - 1):
        ts[k] = _solve_length(curve, ts[k - 1], h, t1)
    ts[-1] = t1
    s = t0 + h * np.arange(samples)

    pos = np.empty((samples, 3))
    T = np.empty((samples, 3))
    N1 = np.empty((samples, 3))
    N2 = np.empty((samples, 3))
    k1 = np.empty(samples)
    k2 = np.empty(samples)
    signed = np.empty(samples) if curve.planar else None
    for i, t in enumerate(ts):
        jx, jy, jz = curve.jets(t)
        pos[i] = (jx.f, jy.f, jz.f)
        try:
            T[i], N1[i], N2[i], k1[i], k2[i], sk = _apparatus_from_jets(jx, jy, jz, curve.planar)
        except DegenerateFrame as err:
            if not allow_degenerate:
                raise DegenerateFrame(f"{err} at t={float(t)!r}") from None
            T[i] = np.nan if err.tangent is None else err.tangent
            N1[i] = N2[i] = np.nan
            k1[i] = np.nan if err.tangent is None else 0.0
            k2[i] = np.nan
            sk = 0.0
        if signed is not None:
            signed[i] = sk
    return SampledCurve(s, ts, pos, T, N1, N2, k1, k2, "analyzed", signed, curve.planar, curve.name)


def _orthonormalize(T, N1):
    T = T / np.linalg.norm(T)
    N1 = N1 - (N1 @ T) * T
    N1 = N1 / np.linalg.norm(N1)
    return T, N1, np.cross(T, N1)


def synthesize_curve(
    profile: CurvatureProfile,
    steps: int = DEFAULT_STEPS,
    position: Sequence[float] = (0.0, 0.0, 0.0),
    frame: Sequence[Sequence[float]] | None = None,
) -> SampledCurve:
    """Integrate the Serret-Frenet system for a prescribed curvature/torsion profile.

    Classical fixed-step RK4 on (x, T, N1, N2); the frame is re-orthonormalised
    after every step.  ``frame`` rows are the initial T, N1, N2 (identity by default).
    """
    if steps < 16:
        raise ParamError("synthesis needs at least 16 steps")
    F0 = np.eye(3) if frame is None else np.asarray(frame, float)
    if F0.shape != (3, 3):
        raise NonOrthonormalInitialFrame("initial frame must be three 3-vectors")
    if np.max(np.abs(F0 @ F0.T - np.eye(3))) > 1e-12 or np.max(np.abs(np.cross(F0[0], F0[1]) - F0[2])) > 1e-12:
        raise NonOrthonormalInitialFrame("initial frame is not a right-handed orthonormal triple within 1e-12")

    s0, s1 = profile.domain
    h = (s1 - s0) / steps
    # curvatures at every node and half-node, in one pass
    half = s0 + 0.5 * h * np.arange(2 * steps + 1)
    k1 = np.array([profile.kappa1(v) for v in half])
    k2 = np.array([profile.kappa2(v) for v in half])
    if not np.all(np.isfinite(k1)) or not np.all(np.isfinite(k2)):
        raise DomainError("curvature profile is not finite on the domain")
    if np.any(k1 <= 0):
        bad = half[np.argmax(k1 <= 0)]
        raise DomainError(f"kappa1 must be positive, fails at s={bad!r}")

    def rhs(y, a, b):
        Tv, N1v, N2v = y[3:6], y[6:9], y[9:12]
        return np.concatenate((Tv, a * N1v, -a * Tv + b * N2v, -b * N1v))

    y = np.concatenate((np.asarray(position, float), F0[0], F0[1], F0[2]))
    out = np.empty((steps + 1, 12))
    out[0] = y
    for n in range(steps):
        j = 2 * n
        r1 = rhs(y, k1[j], k2[j])
        r2 = rhs(y + 0.5 * h * r1, k1[j + 1], k2[j + 1])
        r3 = rhs(y + 0.5 * h * r2, k1[j + 1], k2[j + 1])
        r4 = rhs(y + h * r3, k1[j + 2], k2[j + 2])
        y = y + (h / 6.0) * (r1 + 2.0 * r2 + 2.0 * r3 + r4)
        T, N1, N2 = _orthonormalize(y[3:6], y[6:9])
        y[3:6], y[6:9], y[9:12] = T, N1, N2
        out[n + 1] = y
    s = s0 + h * np.arange(steps + 1)
    return SampledCurve(
        s,
        s.copy(),
        out[:, 0:3],
        out[:, 3:6],
        out[:, 6:9],
        out[:, 9:12],
        k1[::2].copy(),
        k2[::2].copy(),
        "synthesized",
        None,
        False,
        profile.name,
    )


def estimate_curvatures(curve: SampledCurve, points: int = 7):
    """Curvature and torsion re-estimated from sample positions alone.

    Local polynomial differentiation on ``points``-wide windows (shifted at the
    ends) gives x', x'', x''' per sample; the general-parameter formulas then
    give kappa1 and kappa2.  Independent of the stored frame and curvatures.
    """
    n = len(curve)
    if n < points:
        raise ParamError(f"need at least {points} samples")
    h = curve.step
    half = points // 2
    X = curve.position
    d = [np.empty((n, 3)) for _ in range(3)]
    for i in range(n):
        start = min(max(i - half, 0), n - points)
        offsets = np.arange(start, start + points) - i
        window = X[start:start + points] - X[i]
        for order in (1, 2, 3):
            w = _cached_weights(tuple(offsets), order)
            d[order - 1][i] = w @ window / h ** order
    d1, d2, d3 = d
    c = np.cross(d1, d2)
    cn = np.linalg.norm(c, axis=1)
    speed = np.linalg.norm(d1, axis=1)
    kappa1 = cn / speed ** 3
    kappa2 = np.einsum("ij,ij->i", c, d3) / cn ** 2
    return kappa1, kappa2


_WEIGHTS: dict = {}


def _cached_weights(offsets, order):
    key = (offsets, order)
    if key not in _WEIGHTS:
        _WEIGHTS[key] = fd_weights(offsets, order)
    return _WEIGHTS[key]
