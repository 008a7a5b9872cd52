"""Command-line front end: analyze, synthesize, audit, gallery.

Exit status is 0 on success (including an audit whose verdict is ``fails``),
2 for unreadable or invalid input and bad invocations, 3 when the numerics
break down (domain errors, degenerate frames, failed preconditions).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import audit as au
from . import gallery
from . import io as tio
from .classify import ToleranceConfig, classify, fit_rectifying_origin, fit_t_constant_origin
from .decomp import decompose_curve, ode_residuals
from .errors import (
    BindingError,
    DegenerateFrame,
    DomainError,
    ExpressionSyntaxError,
    InsufficientSamples,
    NonOrthonormalInitialFrame,
    NotTConstant,
    ParamError,
    RangeError,
)
from .frenet import DEFAULT_SAMPLES, DEFAULT_STEPS, CurvatureProfile, CurveDef, sample_curve, synthesize_curve

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
SAMPLES_ENV = "TWISTLAB_SAMPLES"

USAGE_ERRORS = (tio.SpecError, ExpressionSyntaxError, BindingError, ParamError, RangeError, InsufficientSamples)
NUMERIC_ERRORS = (
    DomainError,
    DegenerateFrame,
    NonOrthonormalInitialFrame,
    NotTConstant,
    FloatingPointError,
    ZeroDivisionError,
    OverflowError,
    np.linalg.LinAlgError,
)


class UsageError(Exception):
    pass


# -- argument types -------------------------------------------------------------


def _range(text):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected s0:s1, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise argparse.ArgumentTypeError(f"range needs finite s0 < s1, got {text!r}")
    return lo, hi


def _vector(text):
    try:
        v = [float(x) for x in text.split(",")]
    except ValueError:
        v = []
    if len(v) != 3 or not all(map(math.isfinite, v)):
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}")
    return tuple(v)


def _count(minimum):
    def parse(text):
        try:
            n = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if n < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {n}")
        return n

    return parse


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return v


def _keyval(text):
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), value.strip()


def _default_samples():
    raw = os.environ.get(SAMPLES_ENV)
    if raw is None:
        return DEFAULT_SAMPLES
    try:
        return _count(7)(raw)
    except argparse.ArgumentTypeError as err:
        raise UsageError(f"{SAMPLES_ENV}: {err}") from None


def _params(pairs):
    out = {}
    for key, value in pairs or ():
        if key in out:
            raise UsageError(f"parameter {key!r} given twice")
        out[key] = value
    return out


def _float_param(params, name, default=None, required=False):
    if name not in params:
        if required:
            raise UsageError(f"missing parameter {name!r}")
        return default
    raw = params.pop(name)
    try:
        value = float(raw)
    except ValueError:
        raise UsageError(f"parameter {name!r} must be a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise UsageError(f"parameter {name!r} must be finite")
    return value


def _reject_leftovers(params, ident):
    if params:
        raise UsageError(f"{ident} does not take parameter(s) {sorted(params)}")


def _emit(text, path=None):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# -- analyze --------------------------------------------------------------------


def _analysis(curve, sampled, origin, cfg):
    """Classification, decomposition summary, residual stats and audits about one origin."""
    D = decompose_curve(sampled, origin)
    report = classify(sampled, origin, cfg, decomp=D)
    ode = ode_residuals(sampled, D).stats() if sampled.frames_valid else None
    audits = []
    if sampled.frames_valid:
        audits.append(au.audit_n_constant(sampled, origin, cfg).as_dict())
    if report.t_constant.flag:
        audits.append(au.audit_rho_t_second(sampled, origin, cfg).as_dict())
    section = {
        "origin": [float(v) for v in origin],
        "classification": report.as_dict(),
        "decomposition": D.summary(),
        "ode_residuals": ode,
        "audits": audits,
    }
    return section, D, report


def cmd_analyze(args):
    samples = args.samples if args.samples is not None else _default_samples()
    cfg = ToleranceConfig(args.tol_const, args.tol_zero, args.tol_linear)
    curve = tio.load_curve_spec(args.spec)
    sampled = sample_curve(curve, samples, allow_degenerate=not args.strict_frames)

    warnings = list(curve.warnings)
    bad = int(np.count_nonzero(~np.all(np.isfinite(sampled.N1), axis=1)))
    if bad:
        warnings.append(f"normal frame undefined at {bad} of {samples} samples")

    speed = np.array([curve.speed(t) for t in sampled.t])
    main, D, report = _analysis(curve, sampled, np.asarray(args.origin, float), cfg)
    for note in report.notes:
        warnings.append(note)

    out = {
        "tool": "twistlab",
        "version": __version__,
        "input": {"spec": tio.curve_to_spec(curve) if _printable(curve) else None, "origin": list(args.origin),
                  "fit_origin": bool(args.fit_origin)},
        "samples": samples,
        "tolerances": cfg.as_dict(),
        "curve": {
            "name": curve.name,
            "planar": curve.planar,
            "arc_length": float(sampled.s[-1] - sampled.s[0]),
            "s_range": [float(sampled.s[0]), float(sampled.s[-1])],
            "parameter_speed": {"min": float(speed.min()), "max": float(speed.max())},
            "frames_valid": sampled.frames_valid,
            "orthonormality_error": sampled.orthonormality_error() if sampled.frames_valid else None,
        },
        **main,
    }

    fitted_D = None
    if args.fit_origin:
        if not sampled.frames_valid:
            raise DegenerateFrame("--fit-origin needs a principal normal at every sample")
        fit = fit_rectifying_origin(sampled)
        if fit.singular:
            warnings.append("principal normals do not span space; rectifying origin is the minimum-norm solution")
        section, fitted_D, _ = _analysis(curve, sampled, fit.origin, cfg)
        out["fitted"] = {"rectifying_origin_fit": fit.as_dict(), **section}

    seen = []
    for w in warnings:
        if w not in seen:
            seen.append(w)
    out["warnings"] = seen

    if args.csv:
        path = Path(args.csv)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            tio.write_samples_csv(fh, sampled)
        with open(path.with_name(f"{path.stem}_decomp{path.suffix}"), "w", encoding="utf-8", newline="") as fh:
            tio.write_decomp_csv(fh, D)
        if fitted_D is not None:
            with open(path.with_name(f"{path.stem}_decomp_fitted{path.suffix}"), "w", encoding="utf-8", newline="") as fh:
                tio.write_decomp_csv(fh, fitted_D)
    _emit(tio.dumps(out), args.report)
    return EXIT_OK


def _printable(curve):
    try:
        tio.curve_to_spec(curve)
    except tio.SpecError:
        return False
    return True


# -- synthesize -----------------------------------------------------------------


def _profile_from_args(args):
    constants = {}
    for key, value in _params(args.const).items():
        try:
            constants[key] = float(value)
        except ValueError:
            raise UsageError(f"constant {key!r} must be a number, got {value!r}") from None
    if args.profile:
        if args.kappa1 or args.kappa2 or constants:
            raise UsageError("--profile excludes --kappa1, --kappa2 and --const")
        profile = tio.load_profile_spec(args.profile)
        if args.range:
            profile = CurvatureProfile(profile.kappa1, profile.kappa2, args.range, profile.name)
        return profile
    if not (args.kappa1 and args.kappa2 and args.range):
        raise UsageError("synthesize needs --kappa1, --kappa2 and --range (or --profile)")
    return CurvatureProfile.from_strings(args.kappa1, args.kappa2, args.range, constants, name="synthesized")


def cmd_synthesize(args):
    profile = _profile_from_args(args)
    curve = synthesize_curve(profile, args.steps)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            tio.write_samples_csv(fh, curve)
    else:
        tio.write_samples_csv(sys.stdout, curve)
    return EXIT_OK


# -- audit ----------------------------------------------------------------------

_PROFILE_NAMES = {
    "example4": gallery.Canonical.EXAMPLE4_PROFILE,
    "c9": gallery.Canonical.C9_PROFILE,
    "concho": gallery.Canonical.CONCHO_PROFILE,
    "ratio_linear": gallery.Canonical.RATIO_LINEAR_PROFILE,
}


def _canonical_id(name):
    key = name.strip()
    if key.lower() in _PROFILE_NAMES:
        return _PROFILE_NAMES[key.lower()]
    try:
        return gallery.Canonical(key.upper())
    except ValueError:
        raise UsageError(f"unknown gallery entry {name!r}") from None


def _domain_params(rng):
    return {} if rng is None else {"s0": rng[0], "s1": rng[1]}


def _audit_profile(params, rng):
    """Profile from ``profile=NAME`` (remaining params go to the gallery) or ``kappa1``/``kappa2`` expressions."""
    if "profile" in params:
        if "kappa1" in params and "kappa2" in params:
            raise UsageError("give either profile= or kappa1=/kappa2=, not both")
        cid = _canonical_id(params.pop("profile"))
        if cid not in gallery.PROFILE_IDS:
            raise UsageError(f"{cid.value} is a curve, not a curvature profile")
        spec = gallery.CanonicalSpec(cid, {**params, **_domain_params(rng)})
        params.clear()
        return gallery.make_canonical(spec)
    if "kappa1" in params and "kappa2" in params:
        if rng is None:
            raise UsageError("kappa1=/kappa2= profiles need --range")
        k1, k2 = params.pop("kappa1"), params.pop("kappa2")
        return CurvatureProfile.from_strings(k1, k2, rng, name="profile")
    raise UsageError("missing parameter 'profile' (or 'kappa1' and 'kappa2')")


def _audit_curve(args, params, samples):
    """A sampled curve from --spec, a gallery curve, or a synthesized profile."""
    if args.spec:
        return sample_curve(tio.load_curve_spec(args.spec), samples)
    if "curve" in params:
        cid = _canonical_id(params.pop("curve"))
        if cid in gallery.PROFILE_IDS:
            raise UsageError(f"{cid.value} is a profile; use profile=")
        curve_params = {k: params.pop(k) for k in list(params) if k not in ("origin", "ox", "oy", "oz")}
        rng = {} if args.range is None else {"t0": args.range[0], "t1": args.range[1]}
        return sample_curve(gallery.make_canonical(gallery.CanonicalSpec(cid, {**curve_params, **rng})), samples)
    if "profile" in params or "kappa1" in params:
        origin_keys = {k: params.pop(k) for k in ("origin", "ox", "oy", "oz") if k in params}
        profile = _audit_profile(params, args.range)
        params.update(origin_keys)
        return synthesize_curve(profile, args.steps)
    raise UsageError("missing curve: pass --spec PATH, curve=NAME or profile=NAME")


def _audit_origin(params, sampled, fitter):
    mode = params.pop("origin", None)
    if mode is not None:
        if mode != "fit":
            raise UsageError(f"origin must be 'fit' or given as ox/oy/oz, got {mode!r}")
        if any(k in params for k in ("ox", "oy", "oz")):
            raise UsageError("origin=fit excludes ox/oy/oz")
        return fitter(sampled).origin
    return np.array([_float_param(params, k, 0.0) for k in ("ox", "oy", "oz")])


def _run_audit(args):
    ident = au.AuditId(args.id)
    params = _params(args.param)
    samples = args.samples if args.samples is not None else _default_samples()
    rng = args.range

    if ident is au.AuditId.C7_T_FIRST:
        profile = _audit_profile(params, rng)
        return au.audit_c7(profile, samples)
    if ident is au.AuditId.C10_T_SECOND:
        m0 = _float_param(params, "m0", required=True)
        profile = _audit_profile(params, rng)
        return au.audit_c10(profile, m0, samples)
    if ident is au.AuditId.C11_CONST_K1:
        kw = {k: _float_param(params, k, d) for k, d in (("k", 1.0), ("m0", 1.0), ("c1", 1.0))}
        _reject_leftovers(params, ident.value)
        return au.audit_c11(**kw, domain=rng or (0.0, 3.0), points=samples)
    if ident is au.AuditId.C12_HELIX_T2:
        lam = _float_param(params, "lambda", None)
        lam = _float_param(params, "lam", 0.5) if lam is None else lam
        kw = {k: _float_param(params, k, d) for k, d in (("m0", 1.0), ("c1", 1.0), ("kappa1_0", None))}
        _reject_leftovers(params, ident.value)
        return au.audit_c12(lam, domain=rng or (0.0, 1.0), points=samples, **kw)
    if ident is au.AuditId.C6_W_CURVE:
        k1 = _float_param(params, "kappa1", required=True)
        k2 = _float_param(params, "kappa2", required=True)
        kw = {k: _float_param(params, k, d) for k, d in (("c0", None), ("c1", 0.0), ("c2", 1.0), ("c3", 0.0))}
        _reject_leftovers(params, ident.value)
        return au.audit_c6(k1, k2, domain=rng or (0.0, 10.0), points=samples, **kw)
    if ident is au.AuditId.D2_PLANE_EQUIANGULAR:
        kw = {k: _float_param(params, k, d) for k, d in (("a", 1.0), ("b", 0.0), ("c1", 0.0), ("c2", 0.0))}
        _reject_leftovers(params, ident.value)
        return au.audit_d2(domain=rng or (0.5, 5.0), points=samples, **kw)
    if ident is au.AuditId.D4_CONCHO:
        kw = {k: _float_param(params, k, d) for k, d in (("a", 0.1), ("b", 1.0), ("c", 0.2), ("d", 1.0))}
        _reject_leftovers(params, ident.value)
        return au.audit_d4(domain=rng or (0.0, 10.0), points=samples, **kw)
    if ident is au.AuditId.COR1IV_PLANE:
        kw = {k: _float_param(params, k, d) for k, d in (("c", 0.6), ("b", 0.0))}
        _reject_leftovers(params, ident.value)
        return au.audit_cor1iv(domain=rng or (0.5, 5.0), points=samples, **kw)

    sampled = _audit_curve(args, params, samples)
    if ident is au.AuditId.C14STAR_N_CONST:
        origin = _audit_origin(params, sampled, fit_rectifying_origin)
        _reject_leftovers(params, ident.value)
        return au.audit_n_constant(sampled, origin)
    origin = _audit_origin(params, sampled, fit_t_constant_origin)
    _reject_leftovers(params, ident.value)
    return au.audit_rho_t_second(sampled, origin)


def cmd_audit(args):
    result = _run_audit(args)
    _emit(tio.dumps(result.as_dict()), args.report)
    return EXIT_OK


# -- gallery --------------------------------------------------------------------


def cmd_gallery(args):
    cid = _canonical_id(args.name)
    params = _params(args.param)
    obj = gallery.make_canonical(gallery.CanonicalSpec(cid, params))
    spec = tio.curve_to_spec(obj) if isinstance(obj, CurveDef) else tio.profile_to_spec(obj)
    _emit(tio.dumps(spec), args.output)
    return EXIT_OK


# -- entry point ----------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="twistlab", description="Frenet-frame analysis of space curves.")
    p.add_argument("--version", action="version", version=f"twistlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="analyze a curve spec and print a JSON report")
    a.add_argument("spec", help="curve spec JSON file")
    a.add_argument("--samples", type=_count(7), default=None,
                   help=f"arc-length samples (default {DEFAULT_SAMPLES}, or ${SAMPLES_ENV})")
    a.add_argument("--tol-const", type=_positive, default=ToleranceConfig.tol_const)
    a.add_argument("--tol-zero", type=_positive, default=ToleranceConfig.tol_zero)
    a.add_argument("--tol-linear", type=_positive, default=ToleranceConfig.tol_linear)
    a.add_argument("--origin", type=_vector, default=(0.0, 0.0, 0.0), metavar="X,Y,Z")
    a.add_argument("--fit-origin", action="store_true", help="also analyze about the fitted rectifying origin")
    a.add_argument("--report", metavar="PATH", help="write the report here instead of stdout")
    a.add_argument("--csv", metavar="PATH", help="samples CSV; the decomposition goes to <stem>_decomp.csv")
    a.add_argument("--strict-frames", action="store_true", help="fail when the normal frame is undefined anywhere")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("synthesize", help="integrate a curve from curvature and torsion")
    s.add_argument("--kappa1", metavar="EXPR")
    s.add_argument("--kappa2", metavar="EXPR")
    s.add_argument("--const", type=_keyval, action="append", metavar="NAME=VALUE")
    s.add_argument("--profile", metavar="PATH", help="profile JSON as written by 'gallery'")
    s.add_argument("--range", type=_range, metavar="S0:S1")
    s.add_argument("--steps", type=_count(16), default=DEFAULT_STEPS)
    s.add_argument("--csv", metavar="PATH", help="write here instead of stdout")
    s.set_defaults(func=cmd_synthesize)

    u = sub.add_parser("audit", help="residual check of one characterization")
    u.add_argument("id", choices=[i.value for i in au.AuditId])
    u.add_argument("--param", type=_keyval, action="append", metavar="KEY=VALUE")
    u.add_argument("--range", type=_range, metavar="S0:S1")
    u.add_argument("--samples", type=_count(7), default=None)
    u.add_argument("--steps", type=_count(16), default=DEFAULT_STEPS, help="synthesis steps for profile curves")
    u.add_argument("--spec", metavar="PATH", help="curve spec for curve-level audits")
    u.add_argument("--report", metavar="PATH")
    u.set_defaults(func=cmd_audit)

    g = sub.add_parser("gallery", help="emit a named curve or profile as a spec file")
    g.add_argument("name", help="gallery id, e.g. EXAMPLE1 or HELIX")
    g.add_argument("--param", type=_keyval, action="append", metavar="KEY=VALUE")
    g.add_argument("--output", metavar="PATH")
    g.set_defaults(func=cmd_gallery)
    return p


def _fail(code, kind, err):
    print(f"twistlab: {kind}: {err}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with np.errstate(over="raise", divide="ignore", invalid="ignore"):
            return args.func(args)
    except UsageError as err:
        return _fail(EXIT_USAGE, "error", err)
    except ExpressionSyntaxError as err:
        return _fail(EXIT_USAGE, "SyntaxError", err)
    except USAGE_ERRORS as err:
        return _fail(EXIT_USAGE, type(err).__name__, err)
    except NUMERIC_ERRORS as err:
        return _fail(EXIT_NUMERIC, type(err).__name__, err)
    except OSError as err:
        return _fail(EXIT_USAGE, "error", err)


if __name__ == "__main__":
    sys.exit(main())
