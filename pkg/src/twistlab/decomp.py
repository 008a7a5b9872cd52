"""Frenet components of the position vector, the distance function and the structure-equation check."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamples
from .frenet import FrenetSample, SampledCurve
from .numerics import grid_derivative, rms

EPS_RHO = 1e-9  # relative to curve scale


@dataclass(frozen=True)
class Decomposition:
    """Position relative to ``origin`` written as ``m0 T + m1 N1 + m2 N2``.

    ``grad_norm`` is ``None`` where the distance to the origin vanishes.
    """

    s: float
    m0: float
    m1: float
    m2: float
    rho: float
    tangential_norm: float
    normal_norm: float
    grad_norm: float | None


def decompose(sample: FrenetSample, origin=(0.0, 0.0, 0.0), scale: float = 1.0) -> Decomposition:
    x = np.asarray(sample.position, float) - np.asarray(origin, float)
    m0 = float(x @ sample.T)
    m1 = float(x @ sample.N1)
    m2 = float(x @ sample.N2)
    rho = float(np.linalg.norm(x))
    normal = float(np.linalg.norm(x - m0 * sample.T))
    grad = abs(m0) / rho if rho >= EPS_RHO * scale else None
    return Decomposition(sample.s, m0, m1, m2, rho, abs(m0), normal, grad)


@dataclass
class DecompositionSeries:
    """Column-wise decomposition of a whole sampled curve; ``grad_norm`` is NaN where undefined."""

    s: np.ndarray
    m0: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    rho: np.ndarray
    grad_norm: np.ndarray
    normal_norm: np.ndarray
    origin: np.ndarray
    scale: float

    def __len__(self):
        return self.s.shape[0]

    def __getitem__(self, i):
        g = float(self.grad_norm[i])
        return Decomposition(
            float(self.s[i]),
            float(self.m0[i]),
            float(self.m1[i]),
            float(self.m2[i]),
            float(self.rho[i]),
            abs(float(self.m0[i])),
            float(self.normal_norm[i]),
            None if math.isnan(g) else g,
        )

    @property
    def tangential_norm(self):
        return np.abs(self.m0)

    @property
    def undefined_grad(self):
        return np.flatnonzero(np.isnan(self.grad_norm))

    def summary(self):
        out = {}
        for name in ("m0", "m1", "m2", "rho", "grad_norm"):
            v = getattr(self, name)
            v = v[np.isfinite(v)]
            if v.size:
                out[name] = {"min": float(v.min()), "max": float(v.max()), "mean": float(v.mean())}
            else:
                out[name] = {"min": None, "max": None, "mean": None}
        out["normal_norm"] = {
            "min": float(self.normal_norm.min()),
            "max": float(self.normal_norm.max()),
            "mean": float(self.normal_norm.mean()),
        }
        out["undefined_grad_norm_points"] = int(self.undefined_grad.size)
        return out


def decompose_curve(curve: SampledCurve, origin=(0.0, 0.0, 0.0)) -> DecompositionSeries:
    origin = np.asarray(origin, float)
    x = curve.position - origin
    m0 = np.einsum("ij,ij->i", x, curve.T)
    m1 = np.einsum("ij,ij->i", x, curve.N1)
    m2 = np.einsum("ij,ij->i", x, curve.N2)
    rho = np.linalg.norm(x, axis=1)
    # |x - m0 T| avoids the cancellation in sqrt(rho^2 - m0^2) and needs no normals
    normal = np.linalg.norm(x - m0[:, None] * curve.T, axis=1)
    scale = float(rho.max()) if rho.size else 1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        grad = np.where(rho >= EPS_RHO * scale, np.abs(m0) / rho, np.nan)
    return DecompositionSeries(curve.s.copy(), m0, m1, m2, rho, grad, normal, origin, scale)


@dataclass(frozen=True)
class OdeResiduals:
    tangent: np.ndarray  # m0' - k1 m1 - 1
    normal: np.ndarray  # m1' + k1 m0 - k2 m2
    binormal: np.ndarray  # m2' + k2 m1

    def stats(self):
        return {
            name: {"max": float(np.max(np.abs(r))), "rms": rms(r)}
            for name, r in (("tangent", self.tangent), ("normal", self.normal), ("binormal", self.binormal))
        }

    @property
    def max(self):
        return float(max(np.max(np.abs(self.tangent)), np.max(np.abs(self.normal)), np.max(np.abs(self.binormal))))


def ode_residuals(curve: SampledCurve, decomps: DecompositionSeries) -> OdeResiduals:
    """Residuals of the fundamental system relating the m_i to the curvatures.

    The derivatives of the m_i come from fourth-order differences on the
    arc-length grid, so this checks frame, arc length and decomposition end to end.
    """
    n = len(decomps)
    if n < 7:
        raise InsufficientSamples(f"need at least 7 samples, got {n}")
    if len(curve) != n:
        raise InsufficientSamples("curve and decomposition lengths differ")
    h = float(decomps.s[1] - decomps.s[0])
    k1, k2 = curve.kappa1, curve.kappa2
    m0, m1, m2 = decomps.m0, decomps.m1, decomps.m2
    d0, d1, d2 = grid_derivative(m0, h), grid_derivative(m1, h), grid_derivative(m2, h)
    return OdeResiduals(d0 - k1 * m1 - 1.0, d1 + k1 * m0 - k2 * m2, d2 + k2 * m1)
