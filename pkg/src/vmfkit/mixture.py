"""Mixtures of vMF densities: full-batch EM and direct minibatch SGD.

The mixture density is ``p(x) = sum_m alpha_m p(x; mu_m, kappa_m)``. All
likelihood math runs in the log domain with max-shifted normalization:
with kappa in the hundreds and dimensions in the hundreds, linear-domain
densities overflow immediately.

EM alternates the posterior evaluation (E-step) with closed-form updates
(M-step); the kappa update reuses the corrected continued-fraction
inversion, which makes the ascent approximate rather than exact, but the
slack is far below any stopping tolerance in practice.

The SGD path ascends the minibatch mean of log p(x) with the explicit
per-sample gradients (q = p(z=m | x)):

* d/dmu_m    = q * kappa_m * x
* d/dkappa_m = q * (mu_m @ x - I_{s+1}(kappa_m)/I_s(kappa_m))
* d/dalpha_m = q / alpha_m

The optimizer consumes the constraint-tangential parts of the mu and
alpha gradients (see the notes inside :func:`fit_mix_sgd`), and every
step is followed by projection: mu rows renormalized, kappa clamped,
alpha clipped and renormalized onto the simplex.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._optim import make_optimizer
from .bessel import bessel_ratio, invert_bessel_ratio
from .errors import ComponentCollapseError, DivergenceError, NumericalError
from .estimators import SgdConfig, _init_single
from .vmf import VmfParams, as_unit_rows, log_norm_const, normalize

__all__ = [
    "MixtureParams",
    "EmConfig",
    "log_marginal",
    "e_step",
    "m_step",
    "fit_em",
    "fit_mix_sgd",
    "PermutationMatch",
    "permutation_matched_error",
]

_SIMPLEX_TOL = 1e-9
_FULL_CONCENTRATION = 1.0 - 1e-12
_MAX_RESEEDS = 3
_ALPHA_FLOOR = 1e-12


@dataclass(frozen=True)
class MixtureParams:
    """Mixing proportions plus per-component vMF parameters.

    ``alphas`` must be nonnegative and sum to 1 within 1e-9; components
    share one dimension.
    """

    alphas: np.ndarray
    components: tuple[VmfParams, ...]

    def __post_init__(self):
        alphas = np.array(self.alphas, dtype=float, copy=True)
        components = tuple(self.components)
        if alphas.ndim != 1 or alphas.size != len(components) or not components:
            raise ValueError("need one mixing proportion per component, at least one component")
        if not np.all(np.isfinite(alphas)) or np.any(alphas < 0.0):
            raise ValueError("mixing proportions must be finite and nonnegative")
        if abs(float(alphas.sum()) - 1.0) > _SIMPLEX_TOL:
            raise ValueError(f"mixing proportions sum to {alphas.sum()!r}, not 1")
        d = components[0].d
        if any(c.d != d for c in components):
            raise ValueError("components must share one dimension")
        alphas.setflags(write=False)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "components", components)

    @property
    def order(self) -> int:
        return len(self.components)

    @property
    def d(self) -> int:
        return self.components[0].d


@dataclass(frozen=True)
class EmConfig:
    """Stopping and robustness settings for EM."""

    max_iters: int = 100
    rel_ll_tol: float = 1e-5
    min_component_mass: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not (self.rel_ll_tol > 0):
            raise ValueError("rel_ll_tol must be positive")
        if not (self.min_component_mass > 0):
            raise ValueError("min_component_mass must be positive")


def _mix_arrays(mix: MixtureParams) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    mus = np.stack([c.mu for c in mix.components])
    kappas = np.array([c.kappa for c in mix.components])
    log_cs = np.array([c.log_norm_const() for c in mix.components])
    return mix.alphas, mus, kappas, log_cs


def _log_joint(mix: MixtureParams, x: np.ndarray) -> np.ndarray:
    """(n, M) matrix of log(alpha_m) + log p_m(x_i); -inf columns for alpha_m = 0."""
    alphas, mus, kappas, log_cs = _mix_arrays(mix)
    with np.errstate(divide="ignore"):
        log_alphas = np.log(alphas)
    return log_alphas + kappas * (x @ mus.T) + log_cs


def _logsumexp_rows(lp: np.ndarray) -> np.ndarray:
    shift = lp.max(axis=1, keepdims=True)
    return (shift + np.log(np.exp(lp - shift).sum(axis=1, keepdims=True)))[:, 0]


def log_marginal(mix: MixtureParams, x: np.ndarray) -> float | np.ndarray:
    """log p(x) under the mixture, for a (d,) vector or an (n, d) batch."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    rows = as_unit_rows(x[None, :] if single else x, name="x")
    if rows.shape[1] != mix.d:
        raise ValueError(f"x has dimension {rows.shape[1]}, mixture has {mix.d}")
    out = _logsumexp_rows(_log_joint(mix, rows))
    return float(out[0]) if single else out


def e_step(mix: MixtureParams, data: np.ndarray) -> np.ndarray:
    """Posterior membership matrix, row-stochastic, computed in log domain."""
    x = as_unit_rows(data)
    if x.shape[1] != mix.d:
        raise ValueError(f"data has dimension {x.shape[1]}, mixture has {mix.d}")
    lp = _log_joint(mix, x)
    return np.exp(lp - _logsumexp_rows(lp)[:, None])


def _check_responsibilities(q: np.ndarray, n: int, order: int | None = None) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] != n or (order is not None and q.shape[1] != order):
        raise ValueError(f"responsibilities have shape {q.shape}, expected ({n}, M)")
    if not np.all(np.isfinite(q)) or np.any(q < 0.0):
        raise ValueError("responsibilities must be finite and nonnegative")
    if np.any(np.abs(q.sum(axis=1) - 1.0) > 1e-6):
        raise ValueError("responsibility rows must sum to 1")
    return q


def m_step(q: np.ndarray, data: np.ndarray, min_component_mass: float = 1e-8) -> MixtureParams:
    """Closed-form maximizers given responsibilities.

    mu_m is the normalized weighted resultant, kappa_m the inverted ratio
    of the weighted mean resultant length, alpha_m the mean posterior mass.

    Raises :class:`ComponentCollapseError` when some component's total
    mass drops below ``min_component_mass``; the caller decides whether
    to reseed. A resultant length at the degenerate limit is clamped to
    1 - 1e-12 with a warning.
    """
    x = as_unit_rows(data)
    n, d = x.shape
    q = _check_responsibilities(q, n)
    mass = q.sum(axis=0)
    dead = np.nonzero(mass < min_component_mass)[0]
    if dead.size:
        raise ComponentCollapseError(
            f"components {dead.tolist()} have posterior mass below {min_component_mass:g}",
            components=tuple(int(m) for m in dead),
        )
    resultants = q.T @ x
    norms = np.linalg.norm(resultants, axis=1)
    r = norms / mass
    if np.any(r >= _FULL_CONCENTRATION):
        warnings.warn(
            "mean resultant length at the fully-concentrated limit; clamping",
            RuntimeWarning,
            stacklevel=2,
        )
        r = np.minimum(r, _FULL_CONCENTRATION)
    components = tuple(
        VmfParams(mu=resultants[m] / norms[m], kappa=invert_bessel_ratio(d, float(r[m])))
        for m in range(q.shape[1])
    )
    return MixtureParams(alphas=mass / n, components=components)


_INIT_RESTARTS = 24
_INIT_SWEEPS = 30


def _seed_directions(x: np.ndarray, order: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Greedy farthest-cosine seeding: first center uniform, then repeatedly
    the point least similar to every chosen center."""
    idx = [int(rng.integers(x.shape[0]))]
    best = x @ x[idx[0]]
    for _ in range(order - 1):
        cand = int(np.argmin(best))
        idx.append(cand)
        best = np.maximum(best, x @ x[cand])
    return [normalize(x[i]) for i in idx]


def _seeded_partition(
    x: np.ndarray, order: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Initial hard partition: best of several restarted spherical sweeps.

    Each restart seeds directions greedily, then alternates max-cosine
    assignment with mean-direction updates; the winner has the largest
    total cosine to assigned centers. A single seeding run is too basin-
    sensitive to stand up to a restarted baseline.
    """
    best_score = -math.inf
    best = None
    for _ in range(_INIT_RESTARTS):
        mus = np.stack(_seed_directions(x, order, rng))
        labels = np.argmax(x @ mus.T, axis=1)
        for _ in range(_INIT_SWEEPS):
            for m in range(order):
                rows = x[labels == m]
                if rows.shape[0]:
                    res = rows.mean(axis=0)
                    norm = float(np.linalg.norm(res))
                    if norm > 1e-12:
                        mus[m] = res / norm
            new_labels = np.argmax(x @ mus.T, axis=1)
            if np.array_equal(new_labels, labels):
                break
            labels = new_labels
        score = float(np.max(x @ mus.T, axis=1).sum())
        if score > best_score:
            best_score = score
            best = (mus, labels)
    assert best is not None
    return best


def _partition_estimates(
    x: np.ndarray, mus: np.ndarray, labels: np.ndarray, order: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One-shot alpha/kappa estimates from a hard partition (empty or
    degenerate clusters keep kappa = 1 and a small floor weight)."""
    d = x.shape[1]
    kappas = np.ones(order)
    alphas = np.full(order, 1.0 / order)
    for m in range(order):
        rows = x[labels == m]
        if rows.shape[0]:
            r = min(float(np.linalg.norm(rows.mean(axis=0))), _FULL_CONCENTRATION)
            if r > 1e-12:
                kappas[m] = invert_bessel_ratio(d, r)
            alphas[m] = max(rows.shape[0] / x.shape[0], 1e-3)
    return alphas / alphas.sum(), mus, kappas


def _init_em(x: np.ndarray, order: int, rng: np.random.Generator) -> MixtureParams:
    mus, labels = _seeded_partition(x, order, rng)
    alphas, mus, kappas = _partition_estimates(x, mus, labels, order)
    components = tuple(
        VmfParams(mu=normalize(mus[m]), kappa=float(kappas[m])) for m in range(order)
    )
    return MixtureParams(alphas=alphas, components=components)


def _reseed(mix: MixtureParams, dead: tuple[int, ...], x: np.ndarray) -> MixtureParams:
    """Move collapsed components onto the worst-explained data points."""
    order = np.argsort(log_marginal(mix, x))
    alphas = np.array(mix.alphas)
    components = list(mix.components)
    for j, m in enumerate(dead):
        components[m] = VmfParams(mu=normalize(x[order[j]]), kappa=10.0)
        alphas[m] = max(alphas[m], 1.0 / x.shape[0])
    return MixtureParams(alphas=alphas / alphas.sum(), components=tuple(components))


def _guard_kappa_ascent(
    old: MixtureParams, new: MixtureParams, q: np.ndarray, x: np.ndarray
) -> MixtureParams:
    """Keep a component's previous kappa when the approximate inversion
    would lower its M-objective.

    The alpha and mu updates maximize the EM lower bound exactly; kappa
    comes from an approximate inversion and can overshoot near a fixed
    point. Guarding the kappa part (a generalized-EM step) makes the
    log-likelihood trace genuinely non-decreasing.
    """
    d = x.shape[1]
    mass = q.sum(axis=0)
    norms = np.linalg.norm(q.T @ x, axis=1)
    comps = list(new.components)
    changed = False
    for m, comp in enumerate(comps):
        k_new = comp.kappa
        k_old = old.components[m].kappa
        if k_new == k_old:
            continue
        h_new = k_new * norms[m] + mass[m] * log_norm_const(d, k_new)
        h_old = k_old * norms[m] + mass[m] * log_norm_const(d, k_old)
        if h_new < h_old:
            comps[m] = VmfParams(mu=comp.mu, kappa=k_old)
            changed = True
    if not changed:
        return new
    return MixtureParams(alphas=new.alphas, components=tuple(comps))


def fit_em(data: np.ndarray, order: int, cfg: EmConfig | None = None) -> tuple[MixtureParams, list[float]]:
    """Full-batch EM. Returns the parameters and the total log-likelihood
    trace (one entry per iteration, evaluated before each update).

    Stops at ``max_iters`` or when the relative improvement of the total
    log-likelihood falls below ``rel_ll_tol``. Collapsed components are
    reseeded at the worst-explained points, at most 3 times per run.
    """
    cfg = cfg or EmConfig()
    x = as_unit_rows(data)
    if order < 1 or x.shape[0] < order:
        raise ValueError(f"order must be in [1, n_rows], got {order} with {x.shape[0]} rows")
    rng = np.random.default_rng(cfg.seed)
    params = _init_em(x, order, rng)
    trace: list[float] = []
    prev = None
    reseeds = 0
    for _ in range(cfg.max_iters):
        lp = _log_joint(params, x)
        lse = _logsumexp_rows(lp)
        ll = float(lse.sum())
        if not math.isfinite(ll):
            raise NumericalError("non-finite log-likelihood during EM")
        trace.append(ll)
        if prev is not None and ll - prev < cfg.rel_ll_tol * abs(prev):
            break
        prev = ll
        q = np.exp(lp - lse[:, None])
        try:
            params = _guard_kappa_ascent(params, m_step(q, x, cfg.min_component_mass), q, x)
        except ComponentCollapseError as err:
            reseeds += 1
            if reseeds > _MAX_RESEEDS:
                raise
            params = _reseed(params, err.components, x)
    return params, trace


def _init_mix_sgd(
    x: np.ndarray, order: int, cfg: SgdConfig, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The same seeded partition as EM, with one-shot alpha/kappa estimates.

    Starting kappa near its data-implied scale matters: the decaying
    learning rate caps how far the optimizer can travel. Order 1 reduces
    exactly to the single-density initializer so a degenerate mixture
    follows ``fit_sgd`` step for step.
    """
    if order == 1:
        mu0, kappa0 = _init_single(x, cfg.batch_size, cfg)
        return np.full(1, 1.0), mu0[None, :], np.full(1, kappa0)
    mus, labels = _seeded_partition(x, order, rng)
    alphas, mus, kappas = _partition_estimates(x, mus, labels, order)
    return alphas, mus, np.clip(kappas, cfg.kappa_floor, cfg.kappa_ceiling)


def _make_mixture(alphas: np.ndarray, mus: np.ndarray, kappas: np.ndarray) -> MixtureParams:
    return MixtureParams(
        alphas=alphas,
        components=tuple(VmfParams(mu=mus[m], kappa=float(kappas[m])) for m in range(len(kappas))),
    )


def fit_mix_sgd(
    data: np.ndarray, order: int, cfg: SgdConfig | None = None
) -> tuple[MixtureParams, list[float]]:
    """Minibatch gradient ascent on the mixture log-likelihood.

    Returns the parameters and the full-data mean log-likelihood per
    epoch. Deterministic given ``cfg.seed``.
    """
    cfg = cfg or SgdConfig()
    x = as_unit_rows(data)
    n, d = x.shape
    if order < 1 or n < order:
        raise ValueError(f"order must be in [1, n_rows], got {order} with {n} rows")
    if cfg.batch_size > n:
        raise ValueError(f"batch_size {cfg.batch_size} exceeds the {n} available rows")
    s = 0.5 * d - 1.0
    rng = np.random.default_rng(cfg.seed)
    init_rng, shuffle_rng = rng.spawn(2)
    alphas, mus, kappas = _init_mix_sgd(x, order, cfg, init_rng)
    opt = make_optimizer(cfg.optimizer)
    trace: list[float] = []
    for epoch in range(cfg.epochs):
        lr = cfg.lr * cfg.lr_decay_per_epoch**epoch
        perm = shuffle_rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = x[perm[start : start + cfg.batch_size]]
            params = _make_mixture(alphas, mus, kappas)
            q = e_step(params, batch)
            ratios = np.array([bessel_ratio(s, float(k)) for k in kappas])
            grad_mus = np.empty_like(mus)
            grad_kappas = np.empty(order)
            for m in range(order):
                qm = q[:, m]
                g_mu = kappas[m] * (qm[:, None] * batch).mean(axis=0)
                # tangential part only, as in the single-density fitter
                grad_mus[m] = g_mu - float(g_mu @ mus[m]) * mus[m]
                grad_kappas[m] = float(np.mean(qm * (batch @ mus[m] - ratios[m])))
            grad_alphas = q.mean(axis=0) / alphas
            # zero-sum (simplex tangent) part only, mirroring the mu treatment
            grad_alphas = grad_alphas - grad_alphas.mean()
            new = opt.step(
                {"mus": mus, "kappas": kappas, "alphas": alphas},
                {"mus": grad_mus, "kappas": grad_kappas, "alphas": grad_alphas},
                lr,
            )
            mus = new["mus"] / np.linalg.norm(new["mus"], axis=1, keepdims=True)
            kappas = np.clip(new["kappas"], cfg.kappa_floor, cfg.kappa_ceiling)
            alphas = np.clip(new["alphas"], _ALPHA_FLOOR, None)
            alphas = alphas / alphas.sum()
        if not (np.all(np.isfinite(mus)) and np.all(np.isfinite(kappas)) and np.all(np.isfinite(alphas))):
            raise DivergenceError(
                f"non-finite mixture parameters at epoch {epoch} (lr={lr:g})", epoch=epoch, lr=lr
            )
        ll = float(np.mean(log_marginal(_make_mixture(alphas, mus, kappas), x)))
        if not math.isfinite(ll):
            raise DivergenceError(
                f"non-finite log-likelihood at epoch {epoch} (lr={lr:g})", epoch=epoch, lr=lr
            )
        trace.append(ll)
    return _make_mixture(alphas, mus, kappas), trace


@dataclass(frozen=True)
class PermutationMatch:
    """Per-component L1 errors under the best component relabeling.

    ``perm[i]`` is the learned component matched to reference component i.
    """

    perm: tuple[int, ...]
    alpha_errors: np.ndarray
    mu_errors: np.ndarray
    kappa_errors: np.ndarray

    @property
    def alpha_l1(self) -> float:
        return float(self.alpha_errors.sum())

    @property
    def mu_l1(self) -> float:
        return float(self.mu_errors.sum())

    @property
    def kappa_l1(self) -> float:
        return float(self.kappa_errors.sum())

    @property
    def total(self) -> float:
        return self.alpha_l1 + self.mu_l1 + self.kappa_l1


def permutation_matched_error(learned: MixtureParams, truth: MixtureParams) -> PermutationMatch:
    """Smallest summed L1 parameter error over all component permutations.

    Ties keep the lexicographically first permutation.
    """
    if learned.order != truth.order:
        raise ValueError("mixtures must have equal order")
    if learned.d != truth.d:
        raise ValueError("mixtures must have equal dimension")
    order = learned.order
    l_alphas, l_mus, l_kappas, _ = _mix_arrays(learned)
    t_alphas, t_mus, t_kappas, _ = _mix_arrays(truth)
    best: PermutationMatch | None = None
    best_cost = math.inf
    for perm in itertools.permutations(range(order)):
        p = list(perm)
        a_err = np.abs(l_alphas[p] - t_alphas)
        mu_err = np.abs(l_mus[p] - t_mus).sum(axis=1)
        k_err = np.abs(l_kappas[p] - t_kappas)
        cost = float(a_err.sum() + mu_err.sum() + k_err.sum())
        if cost < best_cost:
            best_cost = cost
            best = PermutationMatch(
                perm=perm, alpha_errors=a_err, mu_errors=mu_err, kappa_errors=k_err
            )
    assert best is not None
    return best
