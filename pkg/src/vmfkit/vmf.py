"""von Mises-Fisher parameters, log-normalizer, and log-density.

The density on the unit sphere S^{d-1} is
``p(x) = C_d(kappa) * exp(kappa * mu @ x)`` with
``C_d(kappa) = kappa^{d/2-1} / ((2 pi)^{d/2} I_{d/2-1}(kappa))``,
evaluated here purely in the log domain via :mod:`vmfkit.bessel`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bessel import BesselEvalConfig, log_bessel_i

__all__ = [
    "PARAM_UNIT_TOL",
    "DATA_UNIT_TOL",
    "VmfParams",
    "normalize",
    "as_unit_rows",
    "log_norm_const",
    "log_density",
]

# Mean directions are constructed by the library and held to a tight
# tolerance; observations come from user pipelines and get a looser one.
PARAM_UNIT_TOL = 1e-9
DATA_UNIT_TOL = 1e-6

_LOG_2PI = math.log(2.0 * math.pi)


def normalize(v: np.ndarray) -> np.ndarray:
    """Return v / ||v||. Raises ValueError on zero or non-finite input."""
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot normalize a vector with non-finite entries")
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def as_unit_rows(x: np.ndarray, tol: float = DATA_UNIT_TOL, name: str = "data") -> np.ndarray:
    """Validate an (n, d) array of unit-norm rows and return it as float64.

    Rows violating the tolerance are rejected rather than silently
    renormalized: off-sphere inputs usually mean a broken pipeline.
    """
    x = np.ascontiguousarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array of row vectors, got shape {x.shape}")
    if x.shape[0] < 1 or x.shape[1] < 2:
        raise ValueError(f"{name} must have at least one row and dimension >= 2")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    norms = np.linalg.norm(x, axis=1)
    bad = np.abs(norms - 1.0) > tol
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ValueError(
            f"{name} row {i} has norm {norms[i]:.12g}, outside 1 +/- {tol:g}; "
            "normalize the inputs explicitly"
        )
    return x


@dataclass(frozen=True)
class VmfParams:
    """Mean direction and concentration of one vMF component.

    ``mu`` must be unit-norm within 1e-9 and ``kappa >= 0``; kappa = 0 is
    the uniform distribution on the sphere. The stored array is read-only.
    """

    mu: np.ndarray
    kappa: float
    cfg: BesselEvalConfig = field(default_factory=BesselEvalConfig, repr=False, compare=False)

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float, copy=True)
        if mu.ndim != 1 or mu.size < 2:
            raise ValueError(f"mu must be a vector of dimension >= 2, got shape {mu.shape}")
        if not np.all(np.isfinite(mu)):
            raise ValueError("mu contains non-finite entries")
        n = float(np.linalg.norm(mu))
        if abs(n - 1.0) > PARAM_UNIT_TOL:
            raise ValueError(f"mu must be unit-norm within {PARAM_UNIT_TOL:g}, got norm {n:.12g}")
        kappa = float(self.kappa)
        if not (math.isfinite(kappa) and kappa >= 0.0):
            raise ValueError(f"kappa must be a finite nonnegative real, got {kappa!r}")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "kappa", kappa)

    @property
    def d(self) -> int:
        return self.mu.size

    def log_norm_const(self) -> float:
        return log_norm_const(self.d, self.kappa, self.cfg)


def log_norm_const(d: int, kappa: float, cfg: BesselEvalConfig | None = None) -> float:
    """log C_d(kappa) = (d/2-1) log kappa - (d/2) log 2pi - log I_{d/2-1}(kappa).

    At kappa = 0 this is the uniform-density limit, minus the log surface
    area of S^{d-1}.
    """
    d = int(d)
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    kappa = float(kappa)
    if not (math.isfinite(kappa) and kappa >= 0.0):
        raise ValueError(f"kappa must be a finite nonnegative real, got {kappa!r}")
    h = 0.5 * d
    s = h - 1.0
    if kappa == 0.0:
        return math.lgamma(h) + s * math.log(2.0) - h * _LOG_2PI
    return s * math.log(kappa) - h * _LOG_2PI - log_bessel_i(s, kappa, cfg)


def log_density(params: VmfParams, x: np.ndarray) -> float | np.ndarray:
    """Log-density of `params` at x, a (d,) vector or an (n, d) batch.

    Returns a scalar for a single observation, an (n,) array for a batch.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    rows = as_unit_rows(x[None, :] if single else x, name="x")
    if rows.shape[1] != params.d:
        raise ValueError(f"x has dimension {rows.shape[1]}, parameters have {params.d}")
    out = params.kappa * (rows @ params.mu) + params.log_norm_const()
    return float(out[0]) if single else out
