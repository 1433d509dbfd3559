"""JSON encoding of complex matrices and states.

Matrices are stored row-major as a flat list of ``[re, im]`` pairs.  A state
file is an object ``{"dim": d, "rho": [[re, im], ...]}``; a bare list of
pairs is accepted as well.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

__all__ = ["matrix_to_json", "matrix_from_json", "load_state", "dump_state", "to_plain"]


def matrix_to_json(mat) -> list[list[float]]:
    mat = np.asarray(mat, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in mat.ravel()]


def matrix_from_json(data, dim: int | None = None) -> np.ndarray:
    """Decode a matrix from pairs; nested rows of pairs are accepted too."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        arr = arr.reshape(-1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("matrix must be a list of [re, im] pairs")
    n = arr.shape[0]
    side = int(round(math.sqrt(n)))
    if side * side != n:
        raise ValueError(f"{n} entries do not form a square matrix")
    if dim is not None and dim != side:
        raise ValueError(f"declared dim {dim} but matrix is {side}x{side}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(side, side)


def load_state(path) -> np.ndarray:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        key = next((k for k in ("rho", "matrix", "M", "witness") if k in data), None)
        if key is None:
            raise ValueError("state file needs a 'rho' entry")
        return matrix_from_json(data[key], data.get("dim"))
    return matrix_from_json(data)


def dump_state(rho, path) -> None:
    rho = np.asarray(rho, dtype=complex)
    Path(path).write_text(json.dumps({"dim": rho.shape[0], "rho": matrix_to_json(rho)}))


def to_plain(obj):
    """Recursively turn numpy scalars and arrays into JSON-ready Python values."""
    if isinstance(obj, dict):
        return {k: to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj
