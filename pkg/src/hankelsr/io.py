"""JSON helpers: complex numbers travel as ``[re, im]`` pairs."""

import json
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """Malformed JSON payload; the message starts with the offending field path."""


def complex_to_pair(z):
    z = complex(z)
    return [z.real, z.imag]


def complex_from_pair(p, path="value"):
    if isinstance(p, (int, float)):
        return complex(p)
    if not isinstance(p, (list, tuple)) or len(p) != 2:
        raise SchemaError(f"{path}: expected [re, im] pair, got {p!r}")
    try:
        return complex(float(p[0]), float(p[1]))
    except (TypeError, ValueError):
        raise SchemaError(f"{path}: non-numeric entry in {p!r}") from None


def complex_vector_to_pairs(v):
    v = np.asarray(v, dtype=complex).ravel()
    return np.stack([v.real, v.imag], axis=1).tolist()


def complex_vector_from_pairs(pairs, path="values"):
    if not isinstance(pairs, list):
        raise SchemaError(f"{path}: expected a list of [re, im] pairs")
    return np.array([complex_from_pair(p, f"{path}[{i}]") for i, p in enumerate(pairs)],
                    dtype=complex)


def matrix_to_json(A):
    A = np.asarray(A, dtype=complex)
    return [[complex_to_pair(z) for z in row] for row in A]


def matrix_from_json(rows, path="matrix"):
    if not isinstance(rows, list):
        raise SchemaError(f"{path}: expected a list of rows")
    out = [complex_vector_from_pairs(r, f"{path}[{i}]") for i, r in enumerate(rows)]
    if len({len(r) for r in out}) > 1:
        raise SchemaError(f"{path}: ragged rows")
    return np.array(out, dtype=complex)


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return complex_to_pair(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"{type(o).__name__} is not JSON serializable")


def dumps(obj, **kw):
    return json.dumps(obj, default=_default, **kw)


def write_json(path, obj):
    Path(path).write_text(dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
