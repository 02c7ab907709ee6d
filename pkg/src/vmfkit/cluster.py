"""Clustering of unit-norm feature vectors and partition-agreement metrics.

A fitted mixture clusters by hard posterior assignment; a plain k-means
baseline (Lloyd's algorithm, k-means++ seeding, restarts) runs on the
same vectors. Agreement with reference labels is scored by the adjusted
Rand index and normalized mutual information.
"""

from __future__ import annotations

import math

import numpy as np

from .mixture import MixtureParams, e_step
from .vmf import as_unit_rows

__all__ = [
    "assign",
    "kmeans",
    "adjusted_rand_index",
    "normalized_mutual_information",
]


def assign(mix: MixtureParams, data: np.ndarray) -> np.ndarray:
    """Hard labels: argmax posterior component per row, ties to the lowest index."""
    return np.argmax(e_step(mix, data), axis=1)


def _kmeanspp_centers(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for m in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            centers[m] = x[rng.integers(n)]
        else:
            centers[m] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((x - centers[m]) ** 2, axis=1))
    return centers


def _assign_to_centers(x: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = (
        np.sum(x * x, axis=1)[:, None]
        - 2.0 * (x @ centers.T)
        + np.sum(centers * centers, axis=1)[None, :]
    )
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(x.shape[0]), labels]


def kmeans(
    data: np.ndarray,
    k: int,
    seed: int,
    max_iters: int = 300,
    n_init: int = 10,
) -> np.ndarray:
    """Lloyd's algorithm with k-means++ seeding; best of ``n_init`` restarts
    by within-cluster sum of squares. Empty clusters are reseeded at the
    point farthest from its assigned center. Deterministic given ``seed``.
    """
    x = np.ascontiguousarray(data, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"data must be a 2-d array, got shape {x.shape}")
    n = x.shape[0]
    if k < 1 or n < k:
        raise ValueError(f"k must be in [1, n_rows], got {k} with {n} rows")
    rng = np.random.default_rng(seed)
    best_labels = None
    best_inertia = math.inf
    for _ in range(n_init):
        centers = _kmeanspp_centers(x, k, rng)
        labels = np.full(n, -1)
        for _ in range(max_iters):
            new_labels, point_d2 = _assign_to_centers(x, centers)
            for m in range(k):
                if not np.any(new_labels == m):
                    centers[m] = x[int(np.argmax(point_d2))]
                    new_labels, point_d2 = _assign_to_centers(x, centers)
            if np.array_equal(new_labels, labels):
                break
            labels = new_labels
            for m in range(k):
                centers[m] = x[labels == m].mean(axis=0)
        _, point_d2 = _assign_to_centers(x, centers)
        inertia = float(point_d2.sum())
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
    return best_labels


def _check_labels(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape or a.size == 0:
        raise ValueError("label vectors must be 1-d, nonempty, and of equal length")
    return a, b


def _contingency(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return table


def _pairs(counts: np.ndarray) -> int:
    return int(sum(int(c) * (int(c) - 1) // 2 for c in counts.ravel()))


def adjusted_rand_index(a: np.ndarray, b: np.ndarray) -> float:
    """Permutation-model adjusted Rand index of two labelings, in [-1, 1]."""
    a, b = _check_labels(a, b)
    table = _contingency(a, b)
    n = a.size
    sum_ij = _pairs(table)
    sum_a = _pairs(table.sum(axis=1))
    sum_b = _pairs(table.sum(axis=0))
    total = n * (n - 1) // 2
    expected = sum_a * sum_b / total if total else 0.0
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        # Both partitions trivial in the same way (all-singletons or one cluster).
        return 1.0
    return (sum_ij - expected) / (max_index - expected)


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def normalized_mutual_information(
    a: np.ndarray, b: np.ndarray, normalization: str = "arithmetic"
) -> float:
    """Mutual information of two labelings normalized into [0, 1].

    ``normalization`` divides by the arithmetic (default) or geometric
    mean of the two label entropies. Two zero-entropy labelings describe
    the same single-cluster partition and score 1.0.
    """
    if normalization not in ("arithmetic", "geometric"):
        raise ValueError(f"normalization must be 'arithmetic' or 'geometric', got {normalization!r}")
    a, b = _check_labels(a, b)
    table = _contingency(a, b).astype(float)
    n = a.size
    row = table.sum(axis=1)
    col = table.sum(axis=0)
    h_a = _entropy(row, n)
    h_b = _entropy(col, n)
    if h_a == 0.0 and h_b == 0.0:
        return 1.0
    nz = table > 0
    p = table[nz] / n
    outer = np.outer(row, col)[nz] / (n * n)
    mi = float((p * np.log(p / outer)).sum())
    denom = 0.5 * (h_a + h_b) if normalization == "arithmetic" else math.sqrt(h_a * h_b)
    if denom == 0.0:
        return 0.0
    return min(1.0, max(0.0, mi / denom))
