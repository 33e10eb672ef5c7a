"""JSON encoding of matrices, systems and reports.

Matrices are ``{order, metric: {neg, pos}, kind, data}``; signed permutations
store 1-based ``image`` and ``sign`` lists, dense matrices store row-major
``"num/den"`` strings.  Reals are written in shortest round-trip form.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np

from .clifford_system import CliffordSystem
from .construction import ConstructionTrace
from .exact_core import DenseMatrix, Metric, ScaledVector, SignedPermMatrix, fraction_str


class SchemaError(ValueError):
    """Input JSON does not follow the expected layout."""


def matrix_to_json(mat, metric: Metric) -> dict:
    if isinstance(mat, SignedPermMatrix):
        return {"order": mat.order, "metric": metric.to_json(), "kind": "signed_perm",
                "data": {"image": [i + 1 for i in mat.image], "sign": list(mat.sign)}}
    if isinstance(mat, DenseMatrix):
        return {"order": mat.nrows, "metric": metric.to_json(), "kind": "dense",
                "data": [[fraction_str(a) for a in row] for row in mat.rows]}
    raise TypeError(f"cannot serialize {type(mat).__name__}")


def _metric_from_json(data) -> Metric:
    try:
        neg, pos = int(data["neg"]), int(data["pos"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad metric {data!r}") from exc
    if neg < 0 or pos < 0:
        raise SchemaError("metric counts must be non-negative")
    return Metric(neg, pos)


def matrix_from_json(data: dict):
    """Inverse of :func:`matrix_to_json`; returns ``(matrix, metric)``."""
    try:
        kind, order = data["kind"], int(data["order"])
        metric = _metric_from_json(data["metric"])
        body = data["data"]
        if kind == "signed_perm":
            image = [int(i) - 1 for i in body["image"]]
            mat = SignedPermMatrix(image, [int(s) for s in body["sign"]])
        elif kind == "dense":
            mat = DenseMatrix([[Fraction(a) for a in row] for row in body])
        else:
            raise SchemaError(f"unknown matrix kind {kind!r}")
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"malformed matrix: {exc}") from exc
    if mat.shape != (order, order) or metric.dim != order:
        raise SchemaError("matrix order, data and metric disagree")
    return mat, metric


def system_to_json(system: CliffordSystem) -> dict:
    header = system.header()
    if system.trace is not None:
        header["trace"] = system.trace.to_json()
    return {"header": header, "operators": [matrix_to_json(p, system.metric) for p in system.operators]}


def system_from_json(data: dict) -> CliffordSystem:
    """Rebuild a system without verifying it (callers decide how to react)."""
    try:
        header = data["header"]
        m, r = int(header["m"]), int(header["r"])
        d = int(header["d"]) if "d" in header else None
        ops = data["operators"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed system file: {exc}") from exc
    if not isinstance(ops, list) or not ops:
        raise SchemaError("operator list missing")
    decoded = [matrix_from_json(o) for o in ops]
    metric = decoded[0][1]
    if any(g != metric for _, g in decoded):
        raise SchemaError("operators disagree on the metric")
    trace = None
    if "trace" in header:
        try:
            trace = ConstructionTrace.from_json(header["trace"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed trace: {exc}") from exc
    try:
        system = CliffordSystem(tuple(mat for mat, _ in decoded), metric, m, r, d, trace)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    for key in ("l", "s"):
        if key in header and int(header[key]) != getattr(system, key):
            raise SchemaError(f"header {key} = {header[key]} disagrees with the operators")
    return system


def jsonable(obj):
    """Recursively convert to plain JSON types with exact rationals as strings."""
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(a) for a in obj.tolist()]
    if isinstance(obj, ScaledVector):
        return obj.to_json()
    if isinstance(obj, Metric):
        return obj.to_json()
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(a) for a in obj]
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, allow_nan=False) + "\n"


def load_system(path: str) -> CliffordSystem:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise SchemaError("top-level JSON must be an object")
    if "system" in data and "operators" not in data:
        data = data["system"]
    return system_from_json(data)
