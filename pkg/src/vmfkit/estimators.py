"""Maximum-likelihood estimation for a single vMF density.

Two estimators:

* :func:`fit_batch` -- the near-closed-form full-batch MLE: the mean
  direction is the normalized sample mean, and kappa comes from the
  corrected continued-fraction inversion of the Bessel ratio.
* :func:`fit_sgd` -- minibatch gradient ascent on the mean log-likelihood
  with explicit gradients (no autodiff), projecting after every step to
  keep ||mu|| = 1 and kappa within its clamp interval.

The per-sample objective is ``kappa * mu @ xbar_B + log C_d(kappa)`` with
gradients ``d/dmu = kappa * xbar_B`` and
``d/dkappa = mu @ xbar_B - I_{s+1}(kappa)/I_s(kappa)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._optim import make_optimizer
from .bessel import bessel_ratio, invert_bessel_ratio
from .errors import ConcentrationOverflowError, DegenerateDataError, DivergenceError
from .vmf import VmfParams, as_unit_rows, log_density, log_norm_const

__all__ = [
    "SgdConfig",
    "FitReport",
    "fit_batch",
    "vmf_objective",
    "vmf_gradient",
    "fit_sgd",
    "relative_errors",
]

_FULL_CONCENTRATION = 1.0 - 1e-12


@dataclass(frozen=True)
class SgdConfig:
    """Settings for the stochastic estimators.

    ``optimizer`` is "adam" (adaptive moments) or "sgd" (plain steps);
    plain SGD is mostly useful for gradient audits. The learning rate
    decays by ``lr_decay_per_epoch`` once per epoch.
    """

    lr: float = 0.01
    lr_decay_per_epoch: float = 0.95
    batch_size: int = 128
    epochs: int = 100
    optimizer: str = "adam"
    kappa_floor: float = 1e-6
    kappa_ceiling: float = 1e6
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.lr) and self.lr >= 0.0):
            raise ValueError("lr must be a finite nonnegative real")
        if not (0.0 < self.lr_decay_per_epoch <= 1.0):
            raise ValueError("lr_decay_per_epoch must be in (0, 1]")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"optimizer must be 'adam' or 'sgd', got {self.optimizer!r}")
        if not (0.0 < self.kappa_floor <= self.kappa_ceiling):
            raise ValueError("need 0 < kappa_floor <= kappa_ceiling")


@dataclass(frozen=True)
class FitReport:
    """Estimator output: parameters, log-likelihood trace, optional errors.

    ``ll_trace`` holds the mean log-likelihood per epoch (a single entry
    for the batch estimator). ``e_mu`` is ||mu - mu*|| and ``e_kappa`` is
    |kappa - kappa*| / kappa*, present when ground truth was supplied.
    """

    params: VmfParams
    ll_trace: tuple[float, ...]
    e_mu: float | None = None
    e_kappa: float | None = None

    @property
    def epochs(self) -> int:
        return len(self.ll_trace)


def relative_errors(estimate: VmfParams, truth: VmfParams) -> tuple[float, float]:
    """(||mu - mu*||, |kappa - kappa*| / kappa*). Since ||mu*|| = 1 the mu
    error is both absolute and relative."""
    if estimate.d != truth.d:
        raise ValueError("estimate and truth have different dimensions")
    e_mu = float(np.linalg.norm(estimate.mu - truth.mu))
    e_kappa = abs(estimate.kappa - truth.kappa) / truth.kappa if truth.kappa > 0 else abs(estimate.kappa)
    return e_mu, e_kappa


def fit_batch(data: np.ndarray, truth: VmfParams | None = None) -> FitReport:
    """Near-closed-form MLE from unit-norm rows.

    Raises :class:`DegenerateDataError` when the sample mean vanishes and
    :class:`ConcentrationOverflowError` when the mean resultant length is
    within 1e-12 of 1 (e.g. all points identical).
    """
    x = as_unit_rows(data)
    d = x.shape[1]
    xbar = x.mean(axis=0)
    r = float(np.linalg.norm(xbar))
    if r < 1e-12:
        raise DegenerateDataError(
            "sample mean is (numerically) zero: no mean direction is identifiable"
        )
    if r >= _FULL_CONCENTRATION:
        raise ConcentrationOverflowError(
            f"mean resultant length {r} is at the fully-concentrated limit"
        )
    params = VmfParams(mu=xbar / r, kappa=invert_bessel_ratio(d, r))
    ll = float(np.mean(log_density(params, x)))
    e_mu, e_kappa = relative_errors(params, truth) if truth is not None else (None, None)
    return FitReport(params=params, ll_trace=(ll,), e_mu=e_mu, e_kappa=e_kappa)


def vmf_objective(params: VmfParams, batch: np.ndarray) -> float:
    """Mean log-likelihood of the batch under ``params``."""
    x = as_unit_rows(batch)
    if x.shape[1] != params.d:
        raise ValueError("batch dimension does not match parameters")
    xbar = x.mean(axis=0)
    return params.kappa * float(params.mu @ xbar) + params.log_norm_const()


def vmf_gradient(params: VmfParams, batch: np.ndarray) -> tuple[np.ndarray, float]:
    """(gradient wrt mu, gradient wrt kappa) of the mean log-likelihood."""
    x = as_unit_rows(batch)
    if x.shape[1] != params.d:
        raise ValueError("batch dimension does not match parameters")
    xbar = x.mean(axis=0)
    s = 0.5 * params.d - 1.0
    grad_mu = params.kappa * xbar
    grad_kappa = float(params.mu @ xbar) - bessel_ratio(s, params.kappa, params.cfg)
    return grad_mu, grad_kappa


def _init_single(x: np.ndarray, batch_size: int, cfg: SgdConfig) -> tuple[np.ndarray, float]:
    """Data-driven start: first-batch direction, full-data concentration.

    Starting kappa anywhere but its data-implied scale leaves the
    optimizer stranded: at high concentration the kappa gradient is so
    flat that the decaying learning-rate budget cannot recover even the
    sampling noise of a single minibatch, so the concentration estimate
    uses every row (one cheap pass).
    """
    d = x.shape[1]
    b0 = x[:batch_size].mean(axis=0)
    r0 = float(np.linalg.norm(b0))
    mu0 = x[0].copy() if r0 < 1e-12 else b0 / r0
    r_full = float(np.linalg.norm(x.mean(axis=0)))
    if r_full < 1e-12:
        return mu0, 1.0
    kappa0 = invert_bessel_ratio(d, min(r_full, _FULL_CONCENTRATION))
    return mu0, float(np.clip(kappa0, cfg.kappa_floor, cfg.kappa_ceiling))


def fit_sgd(data: np.ndarray, cfg: SgdConfig, truth: VmfParams | None = None) -> FitReport:
    """Projected minibatch ascent on the mean log-likelihood.

    After every step mu is renormalized and kappa clamped to
    [kappa_floor, kappa_ceiling]. The trace records the full-data mean
    log-likelihood once per epoch. Deterministic given ``cfg.seed``.
    """
    x = as_unit_rows(data)
    n, d = x.shape
    if cfg.batch_size > n:
        raise ValueError(f"batch_size {cfg.batch_size} exceeds the {n} available rows")
    s = 0.5 * d - 1.0
    rng = np.random.default_rng(cfg.seed)
    _, shuffle_rng = rng.spawn(2)  # keep the shuffle stream independent of any init draws
    mu, kappa = _init_single(x, cfg.batch_size, cfg)
    opt = make_optimizer(cfg.optimizer)
    trace = []
    for epoch in range(cfg.epochs):
        lr = cfg.lr * cfg.lr_decay_per_epoch**epoch
        perm = shuffle_rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = x[perm[start : start + cfg.batch_size]]
            xbar = batch.mean(axis=0)
            # The optimizer sees the tangential part of the mu gradient:
            # feeding the raw gradient to a per-coordinate preconditioner and
            # renormalizing afterwards shifts the stationary direction away
            # from the MLE by an lr-independent amount.
            g_mu = kappa * xbar
            g_mu = g_mu - float(g_mu @ mu) * mu
            grads = {
                "mu": g_mu,
                "kappa": float(mu @ xbar) - bessel_ratio(s, kappa),
            }
            new = opt.step({"mu": mu, "kappa": kappa}, grads, lr)
            mu = new["mu"] / np.linalg.norm(new["mu"])
            kappa = float(np.clip(new["kappa"], cfg.kappa_floor, cfg.kappa_ceiling))
        if not (np.all(np.isfinite(mu)) and math.isfinite(kappa)):
            raise DivergenceError(
                f"non-finite parameters at epoch {epoch} (lr={lr:g})", epoch=epoch, lr=lr
            )
        ll = kappa * float(mu @ x.mean(axis=0)) + log_norm_const(d, kappa)
        if not math.isfinite(ll):
            raise DivergenceError(
                f"non-finite log-likelihood at epoch {epoch} (lr={lr:g})", epoch=epoch, lr=lr
            )
        trace.append(ll)
    params = VmfParams(mu=mu, kappa=kappa)
    e_mu, e_kappa = relative_errors(params, truth) if truth is not None else (None, None)
    return FitReport(params=params, ll_trace=tuple(trace), e_mu=e_mu, e_kappa=e_kappa)
