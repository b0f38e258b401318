"""JSON encoding of spaces, functions, operators, witnesses and reports.

Rationals are written as ``"p/q"`` strings and floats with their shortest
round-tripping repr, so decoding gives back bit-identical values and a
replayed witness reproduces its discrepancy exactly.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
from gmpy2 import mpq

from . import cone
from . import piecewise as pw
from .cone import FiniteDiscrete, PLLine, rational
from .errors import InvalidInput
from .operators import (DiscreteWeights, PLHomeo, PLWeight, Permutation, RationalWeight,
                        WeightedCompositionOp)
from .verification import CheckReport, Witness

# witness parameters holding numbers rather than points
_NUMERIC_PARAMS = ("h_y", "known_bound", "M")


def number(x):
    """JSON-ready scalar: rationals become strings, numpy floats plain floats."""
    if isinstance(x, (type(mpq(0)), Fraction)):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def _read_number(x, discrete):
    if x is None:
        return None
    return rational(x) if discrete else float(x)


def plain(obj):
    """Recursively convert containers of numbers into JSON-ready data."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    return number(obj)


# -- spaces -----------------------------------------------------------------

def space_to_json(space):
    if isinstance(space, FiniteDiscrete):
        return {"kind": "discrete", "points": list(space.points)}
    if isinstance(space, PLLine):
        return {"kind": "pl_line", "resolution": space.resolution}
    raise InvalidInput(f"not a space: {space!r}")


def space_from_json(d):
    _need(d, "kind")
    if d["kind"] == "discrete":
        pts = d.get("points")
        if not isinstance(pts, list) or not pts:
            raise InvalidInput("discrete space needs a nonempty point list")
        return FiniteDiscrete(tuple(pts))
    if d["kind"] == "pl_line":
        return PLLine(float(d.get("resolution", 1e-10)))
    raise InvalidInput(f"unknown space kind {d['kind']!r}")


def _need(d, *keys):
    if not isinstance(d, dict):
        raise InvalidInput(f"expected an object, got {type(d).__name__}")
    for k in keys:
        if k not in d:
            raise InvalidInput(f"missing field {k!r}")


# -- functions --------------------------------------------------------------

def _piecewise_to_json(p):
    return {"xs": list(p.xs), "nums": [list(map(float, n)) for n in p.nums],
            "dens": [list(map(float, d)) for d in p.dens], "left": p.left, "right": p.right}


def _piecewise_from_json(d):
    _need(d, "xs", "nums", "dens")
    return pw.Piecewise(tuple(float(x) for x in d["xs"]),
                        tuple(np.array(n, dtype=float) for n in d["nums"]),
                        tuple(np.array(n, dtype=float) for n in d["dens"]),
                        float(d.get("left", 0.0)), float(d.get("right", 0.0)))


def function_to_json(f):
    if isinstance(f, cone.DiscreteFunction):
        return {"kind": "discrete", "values": [number(v) for v in f.values]}
    if isinstance(f, cone.PLFunction):
        return {"kind": "pl", "breakpoints": list(f.breakpoints), "values": list(f.values)}
    if isinstance(f, cone.RationalFunction):
        return {"kind": "piecewise_rational", **_piecewise_to_json(f.piecewise)}
    raise InvalidInput(f"not a cone function: {f!r}")


def function_from_json(d, space):
    _need(d, "kind")
    if d["kind"] == "discrete":
        if not isinstance(space, FiniteDiscrete):
            raise InvalidInput("discrete function over a non-discrete space")
        _need(d, "values")
        return cone.DiscreteFunction(space, d["values"])
    if d["kind"] == "pl":
        _need(d, "breakpoints", "values")
        return cone.PLFunction(tuple(d["breakpoints"]), tuple(d["values"]))
    if d["kind"] == "piecewise_rational":
        return cone.RationalFunction(_piecewise_from_json(d))
    raise InvalidInput(f"unknown function kind {d['kind']!r}")


# -- operators --------------------------------------------------------------

def tau_to_json(tau):
    if isinstance(tau, Permutation):
        return {"kind": "permutation", "map": list(tau.targets)}
    return {"kind": "pl_homeo", "breakpoints": list(tau.breakpoints), "values": list(tau.values),
            "left_slope": tau.left_slope, "right_slope": tau.right_slope}


def weight_to_json(h):
    if isinstance(h, DiscreteWeights):
        return {"kind": "discrete", "values": [number(v) for v in h.values]}
    if isinstance(h, PLWeight):
        return {"kind": "pl", "breakpoints": list(h.breakpoints), "values": list(h.values)}
    if isinstance(h, RationalWeight):
        return {"kind": "piecewise_rational", **_piecewise_to_json(h.piecewise)}
    raise InvalidInput(f"not a weight: {h!r}")


def tau_from_json(d, X, Y):
    _need(d, "kind")
    if d["kind"] == "permutation":
        _need(d, "map")
        return Permutation(Y, X, tuple(d["map"]))
    if d["kind"] == "pl_homeo":
        _need(d, "breakpoints", "values", "left_slope", "right_slope")
        return PLHomeo(tuple(d["breakpoints"]), tuple(d["values"]), d["left_slope"], d["right_slope"])
    raise InvalidInput(f"unknown tau kind {d['kind']!r}")


def weight_from_json(d, Y):
    _need(d, "kind")
    if d["kind"] == "discrete":
        _need(d, "values")
        return DiscreteWeights(Y, d["values"])
    if d["kind"] == "pl":
        _need(d, "breakpoints", "values")
        return PLWeight(tuple(d["breakpoints"]), tuple(d["values"]))
    if d["kind"] == "piecewise_rational":
        return RationalWeight(_piecewise_from_json(d))
    raise InvalidInput(f"unknown weight kind {d['kind']!r}")


def op_to_json(op):
    return {"domain": space_to_json(op.domain), "codomain": space_to_json(op.codomain),
            "tau": tau_to_json(op.tau), "h": weight_to_json(op.h)}


def op_from_json(d):
    _need(d, "tau", "h")
    X = space_from_json(d.get("domain") or d.get("codomain"))
    Y = space_from_json(d.get("codomain") or d.get("domain"))
    return WeightedCompositionOp(X, Y, tau_from_json(d["tau"], X, Y), weight_from_json(d["h"], Y))


# -- witnesses and reports --------------------------------------------------

def witness_to_json(w):
    if w is None:
        return None
    discrete = isinstance(w.space, FiniteDiscrete)
    params = {k: (number(v) if k in _NUMERIC_PARAMS or not discrete else v)
              for k, v in w.params.items()}
    return {"property": w.property_name, "space": space_to_json(w.space),
            "inputs": [function_to_json(f) for f in w.inputs],
            "lhs": number(w.lhs), "rhs": number(w.rhs), "discrepancy": number(w.discrepancy),
            "params": plain(params)}


def witness_from_json(d):
    _need(d, "property", "space", "inputs")
    space = space_from_json(d["space"])
    discrete = isinstance(space, FiniteDiscrete)
    params = dict(d.get("params") or {})
    for k in _NUMERIC_PARAMS:
        if k in params:
            params[k] = _read_number(params[k], discrete)
    if not discrete:
        params = {k: (float(v) if isinstance(v, (int, float)) else v) for k, v in params.items()}
    return Witness(d["property"], [function_from_json(f, space) for f in d["inputs"]],
                   _read_number(d.get("lhs"), discrete), _read_number(d.get("rhs"), discrete),
                   _read_number(d.get("discrepancy"), discrete), space, params)


def find_witness(d):
    """The first witness in a witness file or anywhere inside a report."""
    if isinstance(d, dict):
        if "property" in d and "inputs" in d:
            return d
        for k in sorted(d):
            found = find_witness(d[k])
            if found is not None:
                return found
    elif isinstance(d, list):
        for v in d:
            found = find_witness(v)
            if found is not None:
                return found
    return None


def check_report_to_json(r: CheckReport):
    return {"property": r.property_name, "verdict": r.verdict, "trials": r.trials, "seed": r.seed,
            "max_discrepancy": number(r.max_discrepancy), "constants": plain(r.constants),
            "witness": witness_to_json(r.witness), "elapsed": r.elapsed}


def recovery_to_json(r):
    out = {"domain": space_to_json(r.domain), "codomain": space_to_json(r.codomain),
           "tau": tau_to_json(r.tau), "h": weight_to_json(r.h),
           "residual_max": number(r.residual_max), "residual_mean": number(r.residual_mean),
           "inverse_residual_max": number(r.inverse_residual_max),
           "query_count": r.query_count, "localization_queries": r.localization_queries,
           "trials": r.trials, "verdict": r.verdict, "witness": witness_to_json(r.witness),
           "ambiguities": plain(list(r.ambiguities))}
    if r.samples:
        out["samples"] = [{"y": s.y, "x": s.x, "radius": s.radius, "h": s.h} for s in r.samples]
    return out


def recovery_from_json(d):
    from .recovery import RecoveryResult, SamplePoint
    _need(d, "domain", "codomain", "tau", "h")
    X, Y = space_from_json(d["domain"]), space_from_json(d["codomain"])
    samples = tuple(SamplePoint(float(s["y"]), float(s["x"]), float(s["radius"]), float(s["h"]))
                    for s in d.get("samples", []))
    if isinstance(Y, PLLine) and not samples:
        raise InvalidInput("a line recovery result needs its samples")
    return RecoveryResult(X, Y, tau_from_json(d["tau"], X, Y), weight_from_json(d["h"], Y),
                          samples=samples)


def dumps(obj):
    """Canonical text: sorted keys, so equal reports are byte-identical."""
    return json.dumps(plain(obj), indent=2, sort_keys=True) + "\n"


__all__ = [
    "number", "plain", "space_to_json", "space_from_json", "function_to_json",
    "function_from_json", "tau_to_json", "weight_to_json", "tau_from_json",
    "weight_from_json", "op_to_json", "op_from_json", "witness_to_json", "witness_from_json",
    "find_witness", "check_report_to_json", "recovery_to_json", "recovery_from_json", "dumps",
]
