"""Exact vMF sampling via the tangent-normal decomposition.

A draw from a vMF with mean direction e_1 is assembled from a cosine
v0 along the axis and a uniform tangent direction:

1. draw v uniformly on S^{d-2} (normalize d-1 iid standard normals);
2. draw v0 with density proportional to exp(kappa v0) (1-v0^2)^{(d-3)/2},
   by rejection with the Wood (1994) beta envelope;
3. assemble [v0, sqrt(1-v0^2) v];
4. reflect e_1 onto mu with the Householder map
   U = I - 2 (e_1-mu)(e_1-mu)^T / ||e_1-mu||^2.

For d = 2 the equator sphere S^0 is just {-1, +1}, so step 1 degenerates
to a random sign and the same machinery samples the circle exactly.

All randomness flows through an explicit ``numpy.random.Generator`` so
every operation is reproducible, and parallel use can split generators
with ``Generator.spawn``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import SamplingBudgetError
from .vmf import VmfParams

if TYPE_CHECKING:
    from .mixture import MixtureParams

__all__ = [
    "SamplerConfig",
    "HouseholderMap",
    "sample_tangent",
    "sample_w",
    "sample_vmf",
    "sample_mixture",
]

_DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class SamplerConfig:
    """Seed and rejection budget for a sampling run."""

    seed: int
    max_rejections: int = 10_000_000

    def __post_init__(self):
        if self.max_rejections < 1:
            raise ValueError("max_rejections must be at least 1")


@dataclass(frozen=True)
class HouseholderMap:
    """The reflection taking e_1 to ``mu``; an involution and an isometry.

    When mu = e_1 within 1e-12 the reflection formula divides by zero, so
    the map degenerates to the identity (its continuous completion).
    """

    mu: np.ndarray
    degenerate: bool
    axis: np.ndarray | None

    @classmethod
    def from_direction(cls, mu: np.ndarray) -> "HouseholderMap":
        mu = np.asarray(mu, dtype=float)
        v = -mu.copy()
        v[0] += 1.0  # e_1 - mu
        norm = float(np.linalg.norm(v))
        if norm <= _DEGENERATE_TOL:
            return cls(mu=mu, degenerate=True, axis=None)
        return cls(mu=mu, degenerate=False, axis=v / norm)

    def apply(self, y: np.ndarray) -> np.ndarray:
        """Reflect a (d,) vector or an (n, d) batch of rows."""
        y = np.asarray(y, dtype=float)
        if self.degenerate:
            return y.copy()
        if y.ndim == 1:
            return y - 2.0 * float(y @ self.axis) * self.axis
        return y - 2.0 * np.outer(y @ self.axis, self.axis)


def _tangent_batch(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal((n, d - 1))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v


def sample_tangent(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform draw(s) on the equator sphere S^{d-2}, for d >= 3.

    Returns a (d-1,) vector, or (size, d-1) when ``size`` is given.
    """
    if d < 3:
        raise ValueError("tangent sampling needs d >= 3; d = 2 has no continuous equator")
    v = _tangent_batch(d, 1 if size is None else int(size), rng)
    return v[0] if size is None else v


def _sample_w_batch(
    d: int,
    kappa: float,
    n: int,
    rng: np.random.Generator,
    max_rejections: int,
) -> tuple[np.ndarray, int, int]:
    """n draws of the axis cosine, plus (proposals consumed, accepted count).

    Wood's envelope: propose w = (1-(1+b)z)/(1-(1-b)z) with
    z ~ Beta((d-1)/2, (d-1)/2) and accept when
    kappa*w + (d-1)*log(1 - x0*w) - c >= log u.
    """
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    if not (math.isfinite(kappa) and kappa >= 0.0):
        raise ValueError(f"kappa must be a finite nonnegative real, got {kappa!r}")
    m = d - 1.0
    # b = (-2 kappa + sqrt(4 kappa^2 + m^2)) / m, in cancellation-free form.
    b = m / (math.hypot(2.0 * kappa, m) + 2.0 * kappa)
    x0 = (1.0 - b) / (1.0 + b)
    c = kappa * x0 + m * math.log1p(-x0 * x0)
    out = np.empty(n)
    filled = 0
    proposals = 0
    accepted = 0
    while filled < n:
        if proposals >= max_rejections:
            raise SamplingBudgetError(
                f"rejection sampler used {proposals} proposals for {filled}/{n} draws "
                f"(d={d}, kappa={kappa})",
                acceptance_rate=accepted / proposals,
            )
        chunk = int(min(max(2 * (n - filled), 256), max_rejections - proposals))
        z = rng.beta(0.5 * m, 0.5 * m, size=chunk)
        w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z)
        u = rng.random(chunk)
        accept = np.exp(kappa * w + m * np.log1p(-x0 * w) - c) >= u
        accepted += int(accept.sum())
        take = w[accept][: n - filled]
        out[filled : filled + take.size] = take
        filled += take.size
        proposals += chunk
    return out, proposals, accepted


def sample_w(
    d: int,
    kappa: float,
    rng: np.random.Generator,
    size: int | None = None,
    max_rejections: int = 10_000_000,
) -> float | np.ndarray:
    """Draw(s) of the cosine between a vMF sample and its mean direction."""
    w, _, _ = _sample_w_batch(d, kappa, 1 if size is None else int(size), rng, max_rejections)
    return float(w[0]) if size is None else w


def _sample_canonical(
    d: int, kappa: float, n: int, rng: np.random.Generator, max_rejections: int
) -> np.ndarray:
    """n draws from the vMF with mean direction e_1."""
    w, _, _ = _sample_w_batch(d, kappa, n, rng, max_rejections)
    if d == 2:
        v = np.where(rng.standard_normal(n) >= 0.0, 1.0, -1.0)[:, None]
    else:
        v = _tangent_batch(d, n, rng)
    body = np.empty((n, d))
    body[:, 0] = w
    body[:, 1:] = np.sqrt(np.maximum(0.0, 1.0 - w * w))[:, None] * v
    return body


def sample_vmf(params: VmfParams, n: int, cfg: SamplerConfig) -> np.ndarray:
    """n independent draws from ``params``, one unit-norm row each.

    Bit-reproducible for a fixed ``cfg.seed``.
    """
    if n < 1:
        raise ValueError(f"sample count must be at least 1, got {n}")
    rng = np.random.default_rng(cfg.seed)
    body = _sample_canonical(params.d, params.kappa, int(n), rng, cfg.max_rejections)
    return HouseholderMap.from_direction(params.mu).apply(body)


def sample_mixture(mix: "MixtureParams", n: int, cfg: SamplerConfig) -> tuple[np.ndarray, np.ndarray]:
    """n draws from a vMF mixture; returns (data, component labels)."""
    if n < 1:
        raise ValueError(f"sample count must be at least 1, got {n}")
    rng = np.random.default_rng(cfg.seed)
    z = rng.choice(len(mix.components), size=int(n), p=mix.alphas)
    x = np.empty((int(n), mix.d))
    for m, comp in enumerate(mix.components):
        mask = z == m
        k = int(mask.sum())
        if k == 0:
            continue
        body = _sample_canonical(comp.d, comp.kappa, k, rng, cfg.max_rejections)
        x[mask] = HouseholderMap.from_direction(comp.mu).apply(body)
    return x, z
