"""JSON containers for dense complex matrices and model checkpoints.

A complex matrix is stored row-major as {"shape": [rows, cols],
"data": [[re, im], ...]}; the same container holds operator checkpoints
and isometries so that external tools can re-check them.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


class ContainerError(ValueError):
    pass


def complex_matrix_to_json(mat: np.ndarray) -> dict:
    arr = np.asarray(mat, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ContainerError("only vectors and matrices are supported")
    return {"shape": [int(arr.shape[0]), int(arr.shape[1])],
            "data": [[float(z.real), float(z.imag)] for z in arr.reshape(-1)]}


def complex_matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols = (int(x) for x in obj["shape"])
        data = obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ContainerError(f"malformed matrix container: {exc}") from exc
    if len(data) != rows * cols:
        raise ContainerError(
            f"matrix container claims shape {rows}x{cols} but carries {len(data)} entries")
    flat = np.array([complex(re, im) for re, im in data], dtype=np.complex128)
    return flat.reshape(rows, cols)


def save_json(obj: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True))


def load_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ContainerError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
