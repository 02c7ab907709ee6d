"""File formats: CSV matrices/labels and JSON model documents.

CSV is UTF-8, comma-separated, no header by default (an optional header
row is tolerated on read and available on write); floats are written with
``repr`` so every value round-trips exactly. Model JSON is
``{"d": ..., "kappa": ..., "mu": [...]}`` for a single density and
``{"d": ..., "alphas": [...], "components": [...]}`` for a mixture.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .mixture import MixtureParams
from .vmf import VmfParams

__all__ = [
    "save_matrix",
    "load_matrix",
    "save_labels",
    "load_labels",
    "model_to_dict",
    "model_from_dict",
    "save_json",
    "load_json",
]


def save_matrix(path: str | Path, x: np.ndarray, header: bool = False) -> None:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            fh.write(",".join(f"x{i}" for i in range(x.shape[1])) + "\n")
        for row in x:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _is_numeric_row(line: str) -> bool:
    try:
        [float(tok) for tok in line.split(",")]
        return True
    except ValueError:
        return False


def load_matrix(path: str | Path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    if not _is_numeric_row(lines[0]):  # tolerate a single header row
        lines = lines[1:]
        if not lines:
            raise ValueError(f"{path}: header but no data rows")
    rows = [[float(tok) for tok in ln.split(",")] for ln in lines]
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged rows")
    return np.asarray(rows, dtype=float)


def save_labels(path: str | Path, labels: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for v in np.asarray(labels).ravel():
            fh.write(f"{int(v)}\n")


def load_labels(path: str | Path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        vals = [int(ln.strip()) for ln in fh if ln.strip()]
    if not vals:
        raise ValueError(f"{path}: empty label file")
    return np.asarray(vals, dtype=np.int64)


def model_to_dict(model: VmfParams | MixtureParams) -> dict:
    if isinstance(model, VmfParams):
        return {"d": model.d, "kappa": model.kappa, "mu": [float(v) for v in model.mu]}
    if isinstance(model, MixtureParams):
        return {
            "d": model.d,
            "alphas": [float(a) for a in model.alphas],
            "components": [model_to_dict(c) for c in model.components],
        }
    raise ValueError(f"cannot serialize {type(model).__name__}")


def model_from_dict(doc: dict) -> VmfParams | MixtureParams:
    if "components" in doc:
        return MixtureParams(
            alphas=np.asarray(doc["alphas"], dtype=float),
            components=tuple(model_from_dict(c) for c in doc["components"]),
        )
    mu = np.asarray(doc["mu"], dtype=float)
    if "d" in doc and int(doc["d"]) != mu.size:
        raise ValueError(f"model document: d={doc['d']} but mu has {mu.size} entries")
    return VmfParams(mu=mu, kappa=float(doc["kappa"]))


def save_json(path: str | Path, obj: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_json(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
