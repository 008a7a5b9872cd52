"""Curve-family membership tests with an explicit tolerance policy.

Every family predicate is exact in theory; here each one is a statistic on a
decomposition or curvature series compared against :class:`ToleranceConfig`.
The report is a flag set: a curve can belong to several families at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .decomp import DecompositionSeries, decompose_curve
from .errors import InsufficientSamples, ParamError
from .frenet import SampledCurve
from .numerics import rms


@dataclass(frozen=True)
class ToleranceConfig:
    tol_const: float = 1e-6  # max coefficient of variation for "constant"
    tol_zero: float = 1e-8  # scale-relative zero threshold
    tol_linear: float = 1e-6  # max normalised RMS residual of a line fit

    def __post_init__(self):
        for name in ("tol_const", "tol_zero", "tol_linear"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ParamError(f"{name} must be strictly positive, got {v!r}")

    def as_dict(self):
        return {"tol_const": self.tol_const, "tol_zero": self.tol_zero, "tol_linear": self.tol_linear}


@dataclass(frozen=True)
class Constancy:
    mean: float
    cv: float
    max_abs: float
    is_constant: bool
    is_zero: bool

    @property
    def constant_or_zero(self):
        return self.is_constant or self.is_zero

    def as_dict(self):
        return {"mean": self.mean, "cv": self.cv, "max_abs": self.max_abs}


def constancy(series, scale: float = 1.0, cfg: ToleranceConfig = ToleranceConfig()) -> Constancy:
    """Decide whether ``series`` is constant, zero, or neither.

    Non-finite entries (undefined points) are ignored; an all-undefined series
    is neither constant nor zero.
    """
    v = np.asarray(series, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return Constancy(math.nan, math.nan, math.nan, False, False)
    mean = float(v.mean())
    floor = cfg.tol_zero * scale
    cv = float(v.std()) / max(abs(mean), floor)
    max_abs = float(np.max(np.abs(v)))
    is_zero = max_abs < floor
    return Constancy(mean, cv, max_abs, cv < cfg.tol_const and not is_zero, is_zero)


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    nrms: float
    is_linear: bool
    is_nonconstant_linear: bool

    def as_dict(self):
        return {"slope": self.slope, "intercept": self.intercept, "nrms": self.nrms}


def linear_fit(s, y, cfg: ToleranceConfig = ToleranceConfig()) -> LinearFit:
    """Least-squares line through ``(s, y)``.

    ``nrms`` is the RMS residual over the range of ``y``, floored at
    ``tol_zero`` times the size of ``y``.
    """
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    if s.size < 3:
        raise InsufficientSamples("a line fit needs at least 3 points")
    if np.any(np.diff(s) <= 0):
        raise ParamError("s must be strictly increasing")
    sc = s - s.mean()
    A = np.column_stack((sc, np.ones_like(sc)))
    (slope, icept_c), *_ = np.linalg.lstsq(A, y, rcond=None)
    intercept = icept_c - slope * s.mean()
    resid = y - (slope * s + intercept)
    y_range = float(np.ptp(y))
    y_scale = float(np.max(np.abs(y)))
    # a constant y has no range; fall back to a scale-relative floor
    nrms = rms(resid) / max(y_range, cfg.tol_zero * max(1.0, y_scale))
    is_linear = nrms < cfg.tol_linear
    varies = abs(slope) * float(np.ptp(s)) > cfg.tol_zero * y_scale
    return LinearFit(float(slope), float(intercept), float(nrms), bool(is_linear), bool(is_linear and varies))


@dataclass(frozen=True)
class OriginFit:
    origin: np.ndarray
    residual: float
    singular: bool = False
    m0: float | None = None  # only for the T-constant fit

    def as_dict(self):
        out = {"origin": [float(v) for v in self.origin], "residual": self.residual, "singular": self.singular}
        if self.m0 is not None:
            out["m0"] = self.m0
        return out


_SINGULAR_RCOND = 1e-10


def fit_rectifying_origin(curve: SampledCurve) -> OriginFit:
    """Translation that best places the position vector in the rectifying planes.

    Minimises the sum of ``<x_i - p, N1_i>^2`` through the 3x3 normal
    equations.  When the principal normals do not span space the matrix is
    singular; the minimum-norm solution is returned with ``singular=True``.
    """
    if len(curve) < 3:
        raise InsufficientSamples("origin fit needs at least 3 samples")
    N = curve.N1
    if not np.all(np.isfinite(N)):
        raise ParamError("principal normals undefined; cannot fit a rectifying origin")
    A = N.T @ N
    b = N.T @ np.einsum("ij,ij->i", curve.position, N)
    eig = np.linalg.eigvalsh(A)
    singular = eig[0] <= _SINGULAR_RCOND * eig[-1]
    if singular:
        p = np.linalg.pinv(A, rcond=_SINGULAR_RCOND, hermitian=True) @ b
    else:
        p = scipy.linalg.solve(A, b, assume_a="sym")
    x = curve.position - p
    scale = float(np.max(np.linalg.norm(x, axis=1)))
    residual = float(np.max(np.abs(np.einsum("ij,ij->i", x, N)))) / scale
    return OriginFit(p, residual, bool(singular))


def fit_t_constant_origin(curve: SampledCurve) -> OriginFit:
    """Translation ``p`` and constant ``m0`` best satisfying ``<x_i - p, T_i> = m0``.

    Linear least squares in the four unknowns; ``residual`` is the worst
    deviation from the fitted ``m0`` relative to the curve scale.
    """
    if len(curve) < 4:
        raise InsufficientSamples("origin fit needs at least 4 samples")
    T = curve.T
    A = np.column_stack((T, np.ones(len(curve))))
    rhs = np.einsum("ij,ij->i", curve.position, T)
    sol, _, rank, _ = np.linalg.lstsq(A, rhs, rcond=_SINGULAR_RCOND)
    p, m0 = sol[:3], float(sol[3])
    x = curve.position - p
    scale = float(np.max(np.linalg.norm(x, axis=1)))
    residual = float(np.max(np.abs(np.einsum("ij,ij->i", x, T) - m0))) / scale
    return OriginFit(p, residual, bool(rank < 4), m0)


@dataclass
class Family:
    flag: bool
    params: dict = field(default_factory=dict)
    statistic: dict = field(default_factory=dict)

    def as_dict(self):
        return {"flag": self.flag, **self.params, "statistic": self.statistic}


FAMILIES = (
    "spherical",
    "line_through_origin",
    "constant_ratio",
    "equiangular",
    "t_constant",
    "n_constant",
    "rectifying",
    "osculating",
    "normal",
    "general_helix",
    "w_curve",
    "congruent_rectifying",
)


@dataclass
class ClassificationReport:
    spherical: Family
    line_through_origin: Family
    constant_ratio: Family
    equiangular: Family
    t_constant: Family
    n_constant: Family
    rectifying: Family
    osculating: Family
    normal: Family
    general_helix: Family
    w_curve: Family
    congruent_rectifying: Family
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    notes: list = field(default_factory=list)

    def flags(self):
        return {name: getattr(self, name).flag for name in FAMILIES}

    def as_dict(self):
        out = {name: getattr(self, name).as_dict() for name in FAMILIES}
        out["origin"] = [float(v) for v in self.origin]
        out["notes"] = list(self.notes)
        return out


def _undefined(reason):
    return Family(False, {}, {"undefined": reason})


def rectifying_fits(decomp: DecompositionSeries, cfg: ToleranceConfig):
    """Fits predicted for a rectifying curve: ``m0 = s + lam``, ``m2 = mu``, ``rho^2 = s^2 + c1 s + c2``."""
    s = decomp.s
    lam = float(np.mean(decomp.m0 - s))
    mu = float(np.mean(decomp.m2))
    m0_nrms = rms(decomp.m0 - (s + lam)) / max(float(np.ptp(decomp.m0)), cfg.tol_zero)
    rho_fit = linear_fit(s, decomp.rho ** 2 - s ** 2, cfg)
    rho2_nrms = rms(decomp.rho ** 2 - (s ** 2 + rho_fit.slope * s + rho_fit.intercept)) / max(
        float(np.ptp(decomp.rho ** 2)), cfg.tol_zero
    )
    return {
        "lambda": lam,
        "mu": mu,
        "m0_nrms": float(m0_nrms),
        "rho2_c1": rho_fit.slope,
        "rho2_c2": rho_fit.intercept,
        "rho2_nrms": float(rho2_nrms),
    }


def classify(
    curve: SampledCurve,
    origin=(0.0, 0.0, 0.0),
    cfg: ToleranceConfig = ToleranceConfig(),
    decomp: DecompositionSeries | None = None,
) -> ClassificationReport:
    """Flag every curve family the sampled curve belongs to, about ``origin``."""
    if len(curve) < 7:
        raise InsufficientSamples(f"classification needs at least 7 samples, got {len(curve)}")
    origin = np.asarray(origin, float)
    D = decomp if decomp is not None else decompose_curve(curve, origin)
    scale = D.scale if D.scale > 0 else 1.0
    notes = []
    frames = curve.frames_valid
    if not frames:
        notes.append("normal frame undefined at some samples; frame-dependent families not assessed")
    if D.undefined_grad.size:
        notes.append(f"grad_norm undefined at {D.undefined_grad.size} sample(s) passing through the origin")

    rho_c = constancy(D.rho, scale, cfg)
    spherical = Family(rho_c.is_constant, {"radius": rho_c.mean if rho_c.is_constant else None}, rho_c.as_dict())

    g = constancy(D.grad_norm, 1.0, cfg)
    is_unit = g.is_constant and abs(g.mean - 1.0) < cfg.tol_const
    line_origin = Family(bool(is_unit), {}, g.as_dict())

    c_value = 0.0 if g.is_zero else g.mean
    constant_ratio = Family(g.constant_or_zero, {"c": c_value if g.constant_or_zero else None}, g.as_dict())

    with np.errstate(invalid="ignore"):
        angle = np.arctan2(D.normal_norm, np.abs(D.m0))
    angle[np.isnan(D.grad_norm)] = np.nan
    a_c = constancy(angle, math.pi / 2, cfg)
    alpha = 0.0 if a_c.is_zero else a_c.mean
    equiangular = Family(a_c.constant_or_zero, {"alpha": alpha if a_c.constant_or_zero else None}, a_c.as_dict())

    m0_c = constancy(np.abs(D.m0), scale, cfg)
    t_constant = Family(
        m0_c.constant_or_zero,
        {
            "kind": ("first" if m0_c.is_zero else "second") if m0_c.constant_or_zero else None,
            "value": (0.0 if m0_c.is_zero else m0_c.mean) if m0_c.constant_or_zero else None,
        },
        m0_c.as_dict(),
    )
    normal = Family(m0_c.is_zero, {}, {"max_abs_m0": m0_c.max_abs / scale})

    nn_c = constancy(D.normal_norm, scale, cfg)
    n_constant = Family(
        nn_c.constant_or_zero,
        {
            "kind": ("first" if nn_c.is_zero else "second") if nn_c.constant_or_zero else None,
            "value": (0.0 if nn_c.is_zero else nn_c.mean) if nn_c.constant_or_zero else None,
        },
        nn_c.as_dict(),
    )

    if frames:
        m1_c = constancy(D.m1, scale, cfg)
        fits = rectifying_fits(D, cfg)
        rectifying = Family(
            m1_c.is_zero,
            {"lambda": fits["lambda"], "mu": fits["mu"]} if m1_c.is_zero else {"lambda": None, "mu": None},
            {"max_abs_m1": m1_c.max_abs / scale, **fits},
        )
        m2_c = constancy(D.m2, scale, cfg)
        osculating = Family(m2_c.is_zero, {}, {"max_abs_m2": m2_c.max_abs / scale})

        k1_scale = float(np.max(np.abs(curve.kappa1)))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = curve.kappa2 / curve.kappa1
        r_c = constancy(ratio, 1.0, cfg)
        general_helix = Family(r_c.is_constant, {"ratio": r_c.mean if r_c.is_constant else None}, r_c.as_dict())
        k1_c = constancy(curve.kappa1, k1_scale, cfg)
        k2_c = constancy(curve.kappa2, k1_scale, cfg)
        is_w = k1_c.is_constant and k2_c.constant_or_zero
        w_curve = Family(
            bool(is_w),
            {"kappa1": k1_c.mean if is_w else None, "kappa2": (0.0 if k2_c.is_zero else k2_c.mean) if is_w else None},
            {"kappa1_cv": k1_c.cv, "kappa2_cv": k2_c.cv},
        )
        fit = linear_fit(curve.s, ratio, cfg)
        if fit.is_nonconstant_linear:
            ofit = fit_rectifying_origin(curve)
            congruent = Family(
                True,
                {"c1": fit.slope, "c2": fit.intercept, "fitted_origin": [float(v) for v in ofit.origin]},
                {**fit.as_dict(), "origin_residual": ofit.residual, "singular": ofit.singular},
            )
        else:
            congruent = Family(False, {"c1": None, "c2": None, "fitted_origin": None}, fit.as_dict())
    else:
        rectifying = _undefined("principal normal")
        osculating = _undefined("principal normal")
        general_helix = _undefined("torsion")
        w_curve = _undefined("torsion")
        congruent = _undefined("torsion")

    return ClassificationReport(
        spherical,
        line_origin,
        constant_ratio,
        equiangular,
        t_constant,
        n_constant,
        rectifying,
        osculating,
        normal,
        general_helix,
        w_curve,
        congruent,
        origin,
        notes,
    )
