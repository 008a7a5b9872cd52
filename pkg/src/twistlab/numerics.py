"""Small numerical kernels: adaptive Simpson quadrature and grid derivatives."""

from __future__ import annotations

import math

import numpy as np

from .errors import InsufficientSamples

# Richardson factor for Simpson's rule (error ~ h^4)
_SIMPSON_RICHARDSON = 15.0


def adaptive_simpson(f, a, b, tol=1e-10, max_depth=48, min_depth=2):
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Interval bisection with the usual Richardson-corrected acceptance test.
    ``min_depth`` forces a few bisections up front so that a coarse first
    estimate cannot be accepted by accident on oscillatory integrands.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a_, b_, fa_, fm_, fb_, s_, tol_, depth = stack.pop()
        m_ = 0.5 * (a_ + b_)
        lm, rm = 0.5 * (a_ + m_), 0.5 * (m_ + b_)
        flm, frm = f(lm), f(rm)
        left = (m_ - a_) / 6.0 * (fa_ + 4.0 * flm + fm_)
        right = (b_ - m_) / 6.0 * (fm_ + 4.0 * frm + fb_)
        delta = left + right - s_
        if depth >= max_depth or (depth >= min_depth and abs(delta) <= _SIMPSON_RICHARDSON * tol_):
            total += left + right + delta / _SIMPSON_RICHARDSON
            continue
        stack.append((m_, b_, fm_, frm, fb_, right, 0.5 * tol_, depth + 1))
        stack.append((a_, m_, fa_, flm, fm_, left, 0.5 * tol_, depth + 1))
    return sign * total


# five-point, fourth-order stencils on a uniform grid (numerators over 12h)
_CENTRAL = np.array([1.0, -8.0, 0.0, 8.0, -1.0])
_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0])
_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0])


def grid_derivative(y, h):
    """First derivative of uniformly spaced samples, fourth order everywhere.

    Interior points use the centred five-point stencil; the two points at each
    end use one-sided five-point stencils of the same order.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if n < 7:
        raise InsufficientSamples(f"need at least 7 samples for grid derivatives, got {n}")
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * h)
    d[0] = _EDGE0 @ y[:5] / (12.0 * h)
    d[1] = _EDGE1 @ y[:5] / (12.0 * h)
    d[-1] = -(_EDGE0 @ y[::-1][:5]) / (12.0 * h)
    d[-2] = -(_EDGE1 @ y[::-1][:5]) / (12.0 * h)
    return d


def fd_weights(offsets, order):
    """Finite-difference weights for the ``order``-th derivative at 0 from sample ``offsets``.

    Solves the Vandermonde moment system; fine for the short stencils used here.
    """
    offsets = np.asarray(offsets, dtype=float)
    k = offsets.size
    vander = np.vander(offsets, k, increasing=True).T
    rhs = np.zeros(k)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(vander, rhs)


def rms(values):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    return float(np.sqrt(np.mean(values * values)))
