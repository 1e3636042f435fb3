"""JSON problem files and report encoding.

A problem file holds ``n``, ``m``, ``A``, ``B``, ``C`` (list of m matrices),
``r``, ``s`` (lists of m vectors) and optionally ``g``.  Matrices are
row-major nested lists.  A complex entry is written ``[re, im]``; a real entry
may be a bare number.  Floats are written with ``repr`` precision, so a
write-read cycle is bit-exact.
"""
from __future__ import annotations

import json
import math
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np

from nepv.core import NepvError, NepvProblem


class ProblemFileError(NepvError, ValueError):
    """Malformed problem file; the message names the offending field."""


def _encode_scalar(v):
    v = complex(v) if np.iscomplexobj(v) else float(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def encode_array(a: np.ndarray):
    a = np.asarray(a)
    if a.ndim == 0:
        return _encode_scalar(a[()])
    if np.iscomplexobj(a) and not np.any(a.imag):
        a = a.real
    return [encode_array(row) for row in a] if a.ndim > 1 else [_encode_scalar(v) for v in a]


def _decode_scalar(v, where: str):
    if isinstance(v, bool):
        raise ProblemFileError(f"{where}: expected a number, got {v!r}")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, list) and len(v) == 2 and all(
        isinstance(t, (int, float)) and not isinstance(t, bool) for t in v
    ):
        return complex(float(v[0]), float(v[1]))
    raise ProblemFileError(f"{where}: expected a number or [re, im], got {v!r}")


def decode_vector(v, n: int, where: str) -> np.ndarray:
    if not isinstance(v, list) or len(v) != n:
        raise ProblemFileError(f"{where}: expected a list of {n} entries")
    vals = [_decode_scalar(t, f"{where}[{i}]") for i, t in enumerate(v)]
    dtype = complex if any(isinstance(t, complex) for t in vals) else float
    return np.array(vals, dtype=dtype)


def decode_matrix(M, n: int, where: str) -> np.ndarray:
    if not isinstance(M, list) or len(M) != n:
        raise ProblemFileError(f"{where}: expected {n} rows")
    rows = [decode_vector(row, n, f"{where}[{i}]") for i, row in enumerate(M)]
    dtype = complex if any(np.iscomplexobj(r) for r in rows) else float
    return np.array(rows, dtype=dtype)


def problem_to_dict(p: NepvProblem, g=None) -> dict:
    doc = {
        "n": p.n,
        "m": p.m,
        "A": encode_array(p.A),
        "B": encode_array(p.B),
        "C": [encode_array(Ci) for Ci in p.C],
        "r": [encode_array(ri) for ri in p.r],
        "s": [encode_array(si) for si in p.s],
    }
    if g is not None:
        doc["g"] = [encode_array(gi) for gi in g]
    return doc


def problem_from_dict(doc: dict):
    """Return ``(problem, g)``; ``g`` is ``None`` when the file has none."""
    if not isinstance(doc, dict):
        raise ProblemFileError("top level must be a JSON object")
    for key in ("n", "m", "A", "B", "C", "r", "s"):
        if key not in doc:
            raise ProblemFileError(f"missing field {key!r}")
    n, m = doc["n"], doc["m"]
    if not isinstance(n, int) or not isinstance(m, int) or n < 1 or m < 1:
        raise ProblemFileError("n and m must be positive integers")
    for key in ("C", "r", "s"):
        if not isinstance(doc[key], list) or len(doc[key]) != m:
            raise ProblemFileError(f"{key}: expected a list of m = {m} entries")
    A = decode_matrix(doc["A"], n, "A")
    B = decode_matrix(doc["B"], n, "B")
    C = [decode_matrix(Ci, n, f"C[{i}]") for i, Ci in enumerate(doc["C"])]
    r = [decode_vector(ri, n, f"r[{i}]") for i, ri in enumerate(doc["r"])]
    s = [decode_vector(si, n, f"s[{i}]") for i, si in enumerate(doc["s"])]
    g = None
    if doc.get("g") is not None:
        if not isinstance(doc["g"], list) or len(doc["g"]) != m:
            raise ProblemFileError(f"g: expected a list of m = {m} entries")
        g = [decode_vector(gi, n, f"g[{i}]") for i, gi in enumerate(doc["g"])]
    try:
        p = NepvProblem(A, B, C, r, s)
    except ValueError as exc:
        raise ProblemFileError(str(exc)) from exc
    return p, g


def write_problem(path, p: NepvProblem, g=None) -> None:
    Path(path).write_text(json.dumps(problem_to_dict(p, g)) + "\n")


def read_problem(path):
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return problem_from_dict(doc)


def to_jsonable(obj):
    """Recursively convert numpy and complex values for ``json.dumps``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return encode_array(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Optional[str], obj) -> str:
    text = json.dumps(to_jsonable(obj), indent=2)
    if path:
        Path(path).write_text(text + "\n")
    return text


def fixture_path(name: str) -> Path:
    """Path of a data file shipped with the package (``example_2x2.json``, ``pde_spec.json``)."""
    from importlib.resources import files

    return Path(str(files("nepv") / "data" / name))


def load_pde_spec(path=None):
    """``PdeSpec`` and the ``g`` seed from a JSON spec file (default: the shipped one)."""
    from nepv.problems import PdeSpec

    doc = json.loads(Path(path or fixture_path("pde_spec.json")).read_text())
    return PdeSpec(n=int(doc["n"]), gamma=float(doc["gamma"])), int(doc.get("g_seed", 0))
