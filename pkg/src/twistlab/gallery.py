"""Named curves and curvature profiles, built from parameters.

Every constructor validates its parameter constraints and raises
:class:`ParamError` naming the one that failed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

from . import expr as ex
from .errors import ParamError
from .frenet import CurvatureProfile, CurveDef


class Canonical(str, enum.Enum):
    EXAMPLE1 = "EXAMPLE1"
    SPHERE_FACTOR = "SPHERE_FACTOR"
    HELIX = "HELIX"
    LINE = "LINE"
    CIRCLE = "CIRCLE"
    PLANE_EQUIANGULAR = "PLANE_EQUIANGULAR"
    CONCHO_PROFILE = "CONCHO_PROFILE"
    EXAMPLE4_PROFILE = "EXAMPLE4_PROFILE"
    C9_PROFILE = "C9_PROFILE"
    RATIO_LINEAR_PROFILE = "RATIO_LINEAR_PROFILE"


CURVE_IDS = (
    Canonical.EXAMPLE1,
    Canonical.SPHERE_FACTOR,
    Canonical.HELIX,
    Canonical.LINE,
    Canonical.CIRCLE,
    Canonical.PLANE_EQUIANGULAR,
)
PROFILE_IDS = (
    Canonical.CONCHO_PROFILE,
    Canonical.EXAMPLE4_PROFILE,
    Canonical.C9_PROFILE,
    Canonical.RATIO_LINEAR_PROFILE,
)


@dataclass(frozen=True)
class CanonicalSpec:
    id: Canonical
    params: Mapping[str, object] = field(default_factory=dict)

    @property
    def output_kind(self):
        return "CurveDef" if Canonical(self.id) in CURVE_IDS else "CurvatureProfile"


def _require(cond, message):
    if not cond:
        raise ParamError(message)


def _domain(params, default):
    lo = float(params.get("s0", params.get("t0", default[0])))
    hi = float(params.get("s1", params.get("t1", default[1])))
    _require(lo < hi, f"domain needs lower < upper, got [{lo}, {hi}]")
    return lo, hi


def example1(a=0.3, c=0.6, domain=(0.5, 5.0)) -> CurveDef:
    """Unit-speed conical spiral with ``|grad rho| = c``; planar when ``a = 0``."""
    _require(0.0 <= a < c < 1.0, f"EXAMPLE1 needs 0 <= a < c < 1, got a={a}, c={c}")
    _require(domain[0] > 0.0, "EXAMPLE1 needs s > 0 (ln s)")
    k = math.sqrt(c * c - a * a)
    consts = {"k": k, "w": math.sqrt(1.0 - c * c) / k, "a": a}
    z = "0" if a == 0.0 else "a*s"
    return CurveDef.from_strings(
        f"EXAMPLE1(a={a!r},c={c!r})",
        "k*s*sin(w*ln(s))",
        "k*s*cos(w*ln(s))",
        z,
        parameter="s",
        domain=domain,
        constants=consts,
    )


def sphere_factor(c=0.8, y: CurveDef | None = None, y_radius=1.0, domain=(0.5, 5.0)) -> CurveDef:
    """``x(s) = c s y(u(s))`` with ``u = (sqrt(1-c^2)/c) ln s`` and ``y`` unit speed on the unit sphere.

    Without an explicit ``y`` a circle of radius ``y_radius`` on the unit
    sphere is used (a great circle when ``y_radius = 1``).
    """
    _require(0.0 < c < 1.0, f"SPHERE_FACTOR needs c in (0, 1), got {c}")
    _require(domain[0] > 0.0, "SPHERE_FACTOR needs s > 0 (ln s)")
    if y is None:
        _require(0.0 < y_radius <= 1.0, f"y_radius must be in (0, 1], got {y_radius}")
        h = math.sqrt(max(1.0 - y_radius * y_radius, 0.0))
        consts = {"r": y_radius, "h": h}
        y = CurveDef.from_strings(
            "sphere-circle",
            "r*cos(u/r)",
            "r*sin(u/r)",
            "h" if h else "0",
            parameter="u",
            domain=(-1e300, 1e300),
            constants=consts,
        )
    u = ex.parse("q*ln(s)", "s", {"q": math.sqrt(1.0 - c * c) / c})
    cs = ex.parse("c*s", "s", {"c": c})
    comps = []
    for comp in y.components:
        inner = ex.compose(comp, u)
        comps.append(ex.Expression(ex.BinOp("*", cs.root, inner.root), "s"))
    planar = not comps[2].depends_on_parameter() and comps[2](domain[0]) == 0.0
    return CurveDef(f"SPHERE_FACTOR(c={c!r})", tuple(comps), tuple(map(float, domain)), {"c": c}, planar)


def helix(p=1.0, q=1.0, domain=(0.0, 10.0)) -> CurveDef:
    _require(p > 0.0, f"HELIX needs p > 0, got {p}")
    return CurveDef.from_strings(
        f"HELIX(p={p!r},q={q!r})", "p*cos(t)", "p*sin(t)", "q*t", domain=domain, constants={"p": p, "q": q}
    )


def line(vx=1.0, vy=0.0, vz=0.0, ox=0.0, oy=0.0, oz=0.0, domain=(1.0, 5.0)) -> CurveDef:
    """Unit-speed line ``o + s v``; through the origin when ``o = 0``."""
    n = math.sqrt(vx * vx + vy * vy + vz * vz)
    _require(n > 0.0, "LINE needs a nonzero direction")
    consts = {"vx": vx / n, "vy": vy / n, "vz": vz / n, "ox": ox, "oy": oy, "oz": oz}
    return CurveDef.from_strings(
        "LINE", "ox + vx*s", "oy + vy*s", "oz + vz*s", parameter="s", domain=domain, constants=consts, planar=False
    )


def circle(r=1.0, cx=0.0, cy=0.0, domain=None) -> CurveDef:
    """Unit-speed circle of radius ``r`` in the xy-plane."""
    _require(r > 0.0, f"CIRCLE needs r > 0, got {r}")
    domain = domain or (0.0, 1.8 * math.pi * r)
    return CurveDef.from_strings(
        f"CIRCLE(r={r!r})",
        "cx + r*cos(s/r)",
        "cy + r*sin(s/r)",
        "0",
        parameter="s",
        domain=domain,
        constants={"r": r, "cx": cx, "cy": cy},
    )


def plane_equiangular(a=1.0, b=0.0, domain=(0.5, 5.0)) -> CurveDef:
    """Planar logarithmic spiral about the origin with radius of curvature ``a s + b``.

    The turning angle is ``ln(a s + b)/a``; coordinates are its closed-form
    integrals, placed so the pole sits at the origin.
    """
    _require(a > 0.0, f"PLANE_EQUIANGULAR needs a > 0 (a = 0 is a circle), got {a}")
    _require(a * domain[0] + b > 0.0, "PLANE_EQUIANGULAR needs a s + b > 0 on the domain")
    consts = {"a": a, "b": b, "n": a * a + 1.0}
    w = "(a*s + b)"
    th = f"ln{w}/a"
    return CurveDef.from_strings(
        f"PLANE_EQUIANGULAR(a={a!r},b={b!r})",
        f"{w}*(a*cos({th}) + sin({th}))/n",
        f"{w}*(a*sin({th}) - cos({th}))/n",
        "0",
        parameter="s",
        domain=domain,
        constants=consts,
    )


def concho_profile(a=0.1, b=1.0, c=0.2, d=1.0, domain=(0.0, 10.0)) -> CurvatureProfile:
    """Radii of curvature ``1/kappa1 = a s + b`` and ``1/kappa2 = c s + d``."""
    for lo_hi in domain:
        _require(a * lo_hi + b > 0.0, "CONCHO_PROFILE needs a s + b > 0 on the domain")
        _require(c * lo_hi + d > 0.0, "CONCHO_PROFILE needs c s + d > 0 on the domain")
    return CurvatureProfile.from_strings(
        "1/(a*s + b)", "1/(c*s + d)", domain, {"a": a, "b": b, "c": c, "d": d}, name="CONCHO_PROFILE"
    )


def example4_profile(a=1.0, domain=(1.0, 3.0)) -> CurvatureProfile:
    _require(domain[0] > 0.0, "EXAMPLE4_PROFILE needs s > 0")
    lo, hi = math.log(domain[0]) + a, math.log(domain[1]) + a
    _require(lo * hi > 0.0, "EXAMPLE4_PROFILE needs ln s + a nonzero on the domain")
    return CurvatureProfile.from_strings("s", "1/((ln(s) + a)*s^2)", domain, {"a": a}, name="EXAMPLE4_PROFILE")


def c9_profile(kappa2="1", domain=(-0.9, 0.9), constants=None, lower=0.0) -> CurvatureProfile:
    """``kappa1 = 1/cos(phi)`` with ``phi`` the running integral of ``kappa2`` from ``lower``.

    Polynomial torsions are integrated symbolically, anything else by quadrature.
    """
    k2 = ex.parse(kappa2, "s", constants)
    coeffs = ex.polynomial_coefficients(k2.root)
    if coeffs is not None:
        terms = [f"({c / (i + 1)!r})*s^{i + 1}" for i, c in enumerate(coeffs) if c != 0.0] or ["0"]
        antiderivative = ex.parse(" + ".join(terms), "s")
        phi_root = ex.BinOp("-", antiderivative.root, ex.Num(antiderivative(lower)))
    else:
        phi_root = ex.Integral(k2.root, float(lower))
    phi = ex.Expression(phi_root, "s")
    k1 = ex.Expression(ex.BinOp("/", ex.Num(1.0), ex.Call("cos", phi.root)), "s")
    for v in _probe(domain):
        _require(abs(math.cos(phi(v))) > 1e-6, f"C9_PROFILE needs cos(phi) away from 0, fails near s={v}")
        _require(math.cos(phi(v)) > 0.0, f"C9_PROFILE needs cos(phi) > 0 for positive curvature, fails near s={v}")
    return CurvatureProfile(k1, k2, tuple(map(float, domain)), name="C9_PROFILE")


def ratio_linear_profile(lam=0.5, mu=2.0, kappa1="1", domain=(0.0, 3.0), constants=None) -> CurvatureProfile:
    """Profile with ``kappa2/kappa1 = (s + lam)/mu``; any positive ``kappa1`` expression."""
    _require(mu != 0.0, "RATIO_LINEAR_PROFILE needs mu != 0")
    k1 = ex.parse(kappa1, "s", constants)
    for v in _probe(domain):
        _require(k1(v) > 0.0, f"kappa1 must be positive, fails near s={v}")
    ratio = ex.parse("(s + lam)/mu", "s", {"lam": lam, "mu": mu})
    k2 = ex.Expression(ex.BinOp("*", k1.root, ratio.root), "s")
    return CurvatureProfile(k1, k2, tuple(map(float, domain)), name="RATIO_LINEAR_PROFILE")


def _probe(domain, n=257):
    lo, hi = domain
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


_NUMERIC = {
    Canonical.EXAMPLE1: (example1, {"a": 0.3, "c": 0.6}, (0.5, 5.0)),
    Canonical.SPHERE_FACTOR: (sphere_factor, {"c": 0.8, "y_radius": 1.0}, (0.5, 5.0)),
    Canonical.HELIX: (helix, {"p": 1.0, "q": 1.0}, (0.0, 10.0)),
    Canonical.LINE: (line, {"vx": 1.0, "vy": 0.0, "vz": 0.0, "ox": 0.0, "oy": 0.0, "oz": 0.0}, (1.0, 5.0)),
    Canonical.CIRCLE: (circle, {"r": 1.0, "cx": 0.0, "cy": 0.0}, None),
    Canonical.PLANE_EQUIANGULAR: (plane_equiangular, {"a": 1.0, "b": 0.0}, (0.5, 5.0)),
    Canonical.CONCHO_PROFILE: (concho_profile, {"a": 0.1, "b": 1.0, "c": 0.2, "d": 1.0}, (0.0, 10.0)),
    Canonical.EXAMPLE4_PROFILE: (example4_profile, {"a": 1.0}, (1.0, 3.0)),
    Canonical.C9_PROFILE: (c9_profile, {"kappa2": "1", "lower": 0.0}, (-0.9, 0.9)),
    Canonical.RATIO_LINEAR_PROFILE: (ratio_linear_profile, {"lam": 0.5, "mu": 2.0, "kappa1": "1"}, (0.0, 3.0)),
}

_ALIASES = {"lambda": "lam"}


def make_canonical(spec: CanonicalSpec):
    """Build the curve or profile named by ``spec`` with its parameters.

    Numeric parameters may be given as strings; the domain is taken from
    ``s0``/``s1`` (or ``t0``/``t1``).
    """
    try:
        cid = Canonical(spec.id)
    except ValueError:
        raise ParamError(f"unknown canonical id {spec.id!r}") from None
    builder, defaults, default_domain = _NUMERIC[cid]
    params = {_ALIASES.get(k, k): v for k, v in dict(spec.params).items()}
    unknown = set(params) - set(defaults) - {"s0", "s1", "t0", "t1"}
    if unknown:
        raise ParamError(f"{cid.value} does not take parameter(s) {sorted(unknown)}")
    kwargs = {}
    for name, default in defaults.items():
        value = params.get(name, default)
        if isinstance(default, float):
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ParamError(f"{cid.value} parameter {name!r} must be a number, got {value!r}") from None
        kwargs[name] = value
    if default_domain is None and not ({"s0", "s1", "t0", "t1"} & set(params)):
        return builder(**kwargs)
    if default_domain is None:
        default_domain = (0.0, 1.8 * math.pi * kwargs.get("r", 1.0))
    kwargs["domain"] = _domain(params, default_domain)
    return builder(**kwargs)
