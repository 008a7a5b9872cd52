"""Curve-spec files, deterministic JSON reports and CSV series."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import expr as ex
from .errors import ExpressionSyntaxError, TwistlabError
from .frenet import CurvatureProfile, CurveDef, SampledCurve

SPEC_KEYS = ("name", "components", "param", "domain", "constants")
SPEC_OPTIONAL = ("planar",)
PROFILE_KEYS = ("name", "kappa1", "kappa2", "param", "domain", "constants")

SAMPLE_HEADER = ("s", "x", "y", "z", "Tx", "Ty", "Tz", "N1x", "N1y", "N1z", "N2x", "N2y", "N2z", "kappa1", "kappa2")
DECOMP_HEADER = ("s", "m0", "m1", "m2", "rho", "grad_norm")


class SpecError(TwistlabError):
    """A spec file is unreadable, malformed, or has missing/unknown keys."""


# -- number formatting --------------------------------------------------------


def format_float(value: float) -> str:
    """17 significant digits: enough for every double to round-trip."""
    return format(float(value), ".17g")


def _emit(obj, indent, level, out):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(obj) if math.isfinite(obj) else "null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(k), ensure_ascii=False)}: ")
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in items):
            parts = []
            for v in items:
                buf = []
                _emit(v, indent, level + 1, buf)
                parts.append("".join(buf))
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(items):
            out.append(pad)
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(end + "]")
    elif hasattr(obj, "as_dict"):
        _emit(obj.as_dict(), indent, level, out)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with keys in insertion order, floats at 17 significant digits and non-finite values as null."""
    out = []
    _emit(obj, indent, 0, out)
    return "".join(out) + "\n"


# -- spec files -----------------------------------------------------------------


def _read_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise SpecError(f"cannot read {path}: {err.strerror or err}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise SpecError(f"{path}: invalid JSON at line {err.lineno} column {err.colno}: {err.msg}") from None


def _check_keys(obj, required, optional=()):
    if not isinstance(obj, dict):
        raise SpecError("spec must be a JSON object")
    missing = [k for k in required if k not in obj]
    if missing:
        raise SpecError(f"missing key {missing[0]!r}")
    extra = sorted(set(obj) - set(required) - set(optional))
    if extra:
        raise SpecError(f"unknown key {extra[0]!r}")


def _domain(value):
    if not (isinstance(value, list) and len(value) == 2):
        raise SpecError("key 'domain' must be a two-element list")
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise SpecError("key 'domain' must hold numbers")
    lo, hi = float(value[0]), float(value[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise SpecError(f"key 'domain' needs finite t0 < t1, got {value!r}")
    return lo, hi


def _constants(value):
    if not isinstance(value, dict):
        raise SpecError("key 'constants' must be an object")
    out = {}
    for k, v in value.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise SpecError(f"constant {k!r} must be a finite number")
        out[str(k)] = float(v)
    return out


def _param(value):
    if not (isinstance(value, str) and value.isidentifier()):
        raise SpecError("key 'param' must be an identifier")
    return value


def _parse_field(key, source, param, constants):
    if not isinstance(source, str):
        raise SpecError(f"key {key!r} must be an expression string")
    try:
        return ex.parse(source, param, constants)
    except ExpressionSyntaxError as err:
        raise ExpressionSyntaxError(f"{key}: {err.args[0].rsplit(' at offset', 1)[0]}", err.offset) from None


def curve_from_spec(obj) -> CurveDef:
    _check_keys(obj, SPEC_KEYS, SPEC_OPTIONAL)
    if not isinstance(obj["name"], str):
        raise SpecError("key 'name' must be a string")
    comps = obj["components"]
    _check_keys(comps, ("x", "y", "z"))
    param = _param(obj["param"])
    domain = _domain(obj["domain"])
    constants = _constants(obj["constants"])
    planar = obj.get("planar")
    if planar is not None and not isinstance(planar, bool):
        raise SpecError("key 'planar' must be a boolean")
    exprs = tuple(_parse_field(f"components.{k}", comps[k], param, constants) for k in ("x", "y", "z"))
    if planar is None:
        planar = not exprs[2].depends_on_parameter() and exprs[2](domain[0]) == 0.0
    return CurveDef(obj["name"], exprs, domain, constants, planar)


def load_curve_spec(path) -> CurveDef:
    return curve_from_spec(_read_json(path))


def profile_from_spec(obj) -> CurvatureProfile:
    _check_keys(obj, PROFILE_KEYS)
    param = _param(obj["param"])
    constants = _constants(obj["constants"])
    k1 = _parse_field("kappa1", obj["kappa1"], param, constants)
    k2 = _parse_field("kappa2", obj["kappa2"], param, constants)
    return CurvatureProfile(k1, k2, _domain(obj["domain"]), str(obj["name"]))


def load_profile_spec(path) -> CurvatureProfile:
    return profile_from_spec(_read_json(path))


def _source(expression: ex.Expression):
    try:
        return ex.to_source(expression.root)
    except ValueError:
        raise SpecError("expression contains a running integral with no surface syntax") from None


def _bound_constants(exprs):
    found = {}

    def walk(node):
        if isinstance(node, ex.Const):
            builtin = ex.BUILTIN_CONSTANTS.get(node.name)
            if builtin is None or builtin != node.value:
                found.setdefault(node.name, node.value)
        for child in getattr(node, "__dataclass_fields__", {}):
            value = getattr(node, child)
            if isinstance(value, (ex.Num, ex.Const, ex.Param, ex.Neg, ex.BinOp, ex.Call, ex.Integral)):
                walk(value)

    for e in exprs:
        walk(e.root)
    return dict(sorted(found.items()))


def curve_to_spec(curve: CurveDef) -> dict:
    """The spec-file form of a curve; constants are exactly those the expressions use."""
    comps = curve.components
    out = {
        "name": curve.name,
        "components": {k: _source(e) for k, e in zip("xyz", comps)},
        "param": curve.parameter,
        "domain": [float(curve.domain[0]), float(curve.domain[1])],
        "constants": _bound_constants(comps),
    }
    if curve.planar:
        out["planar"] = True
    return out


def profile_to_spec(profile: CurvatureProfile) -> dict:
    exprs = (profile.kappa1, profile.kappa2)
    return {
        "name": profile.name,
        "kappa1": _source(profile.kappa1),
        "kappa2": _source(profile.kappa2),
        "param": profile.kappa1.parameter,
        "domain": [float(profile.domain[0]), float(profile.domain[1])],
        "constants": _bound_constants(exprs),
    }


# -- CSV ------------------------------------------------------------------------


def _write_rows(handle, header, columns):
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(header)
    for row in zip(*columns):
        writer.writerow([format_float(v) for v in row])


def write_samples_csv(handle, curve: SampledCurve):
    cols = [curve.s]
    for arr in (curve.position, curve.T, curve.N1, curve.N2):
        cols.extend(arr[:, i] for i in range(3))
    cols.extend((curve.kappa1, curve.kappa2))
    _write_rows(handle, SAMPLE_HEADER, cols)


def write_decomp_csv(handle, decomp):
    _write_rows(handle, DECOMP_HEADER, [decomp.s, decomp.m0, decomp.m1, decomp.m2, decomp.rho, decomp.grad_norm])


def read_samples_csv(path):
    """Columns of a samples CSV as a dict of arrays (used by tests and downstream tooling)."""
    with open(path, encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in r] for r in body]) if body else np.empty((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}
