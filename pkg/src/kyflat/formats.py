"""JSON on-disk formats for tensors, CP decompositions and matrix tuples.

Schema violations raise :class:`~kyflat.errors.FormatError` carrying a JSON
pointer to the offending value. See ``docs/FORMATS.md`` for the layouts.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from .errors import FormatError
from .tensor_core import CPDecomposition, Tensor3

_NUM = {"type": "number"}
_DIMS = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 3, "maxItems": 3}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _NUM}}

TENSOR_SCHEMA = {
    "type": "object",
    "required": ["dims", "data"],
    "properties": {"dims": _DIMS, "data": {"type": "array", "items": _NUM}},
}

CP_SCHEMA = {
    "type": "object",
    "required": ["r", "dims", "A", "B", "C"],
    "properties": {"r": {"type": "integer", "minimum": 0}, "dims": _DIMS,
                   "A": _MATRIX, "B": _MATRIX, "C": _MATRIX},
}

MATRIX_LIST_SCHEMA = {
    "type": "object",
    "required": ["matrices"],
    "properties": {"matrices": {"type": "array", "minItems": 1, "items": _MATRIX}},
}


def _pointer(path: Sequence[Any]) -> str:
    return "/" + "/".join(str(p) for p in path) if path else "/"


def _validate(doc: Any, schema: dict) -> None:
    err = best_match(Draft202012Validator(schema).iter_errors(doc))
    if err is not None:
        raise FormatError(err.message, _pointer(err.absolute_path))


def read_json(path) -> Any:
    """Load a JSON file; syntax errors become :class:`FormatError`."""
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def write_json(obj: Any, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def tensor_to_json(T: Tensor3) -> dict:
    return {"dims": list(T.dims), "data": T.entries.tolist()}


def tensor_from_json(doc: Any) -> Tensor3:
    _validate(doc, TENSOR_SCHEMA)
    dims = doc["dims"]
    need = int(np.prod(dims))
    if len(doc["data"]) != need:
        raise FormatError(f"data has {len(doc['data'])} entries, dims {dims} need {need}", "/data")
    try:
        return Tensor3.from_entries(dims, doc["data"])
    except ValueError as exc:
        raise FormatError(str(exc), "/data") from exc


def cp_to_json(decomp: CPDecomposition) -> dict:
    return {"r": decomp.r, "dims": list(decomp.dims),
            "A": decomp.A.tolist(), "B": decomp.B.tolist(), "C": decomp.C.tolist()}


def _factor(doc: dict, key: str, rows: int, r: int) -> np.ndarray:
    mat = doc[key]
    if len(mat) != rows:
        raise FormatError(f"expected {rows} rows, got {len(mat)}", f"/{key}")
    for i, row in enumerate(mat):
        if len(row) != r:
            raise FormatError(f"expected {r} entries (one per term), got {len(row)}", f"/{key}/{i}")
    return np.array(mat, dtype=float).reshape(rows, r)


def cp_from_json(doc: Any, allow_zero: bool = False) -> CPDecomposition:
    _validate(doc, CP_SCHEMA)
    r = doc["r"]
    n1, n2, n3 = doc["dims"]
    A, B, C = (_factor(doc, k, n, r) for k, n in (("A", n1), ("B", n2), ("C", n3)))
    try:
        return CPDecomposition(A, B, C, allow_zero=allow_zero)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def matrices_to_json(mats: Sequence[np.ndarray], **extra) -> dict:
    return {**extra, "matrices": [np.asarray(M, dtype=float).tolist() for M in mats]}


def matrices_from_json(doc: Any, square: bool = True) -> list[np.ndarray]:
    _validate(doc, MATRIX_LIST_SCHEMA)
    out = []
    shape = None
    for i, M in enumerate(doc["matrices"]):
        rows = len(M)
        cols = len(M[0]) if rows else 0
        if rows == 0 or any(len(row) != cols for row in M):
            raise FormatError("matrix rows must be nonempty and of equal length", f"/matrices/{i}")
        if square and rows != cols:
            raise FormatError(f"expected a square matrix, got {rows}x{cols}", f"/matrices/{i}")
        if shape is not None and (rows, cols) != shape:
            raise FormatError(f"shape {rows}x{cols} differs from {shape[0]}x{shape[1]}", f"/matrices/{i}")
        shape = (rows, cols)
        out.append(np.array(M, dtype=float))
    return out


def load_tensor(path) -> Tensor3:
    return tensor_from_json(read_json(path))


def save_tensor(T: Tensor3, path) -> None:
    write_json(tensor_to_json(T), path)


def load_cp(path, allow_zero: bool = False) -> CPDecomposition:
    return cp_from_json(read_json(path), allow_zero=allow_zero)


def save_cp(decomp: CPDecomposition, path) -> None:
    write_json(cp_to_json(decomp), path)
