"""Stable evaluation of the modified Bessel function I_s and its ratio.

The log-normalizer of a von Mises-Fisher density needs log I_s(x) for
half-integer orders s = d/2 - 1.  Direct double-precision evaluation
underflows once the order is large and the argument small, because
I_s(x) ~ (x/2)^s / Gamma(s+1) near zero.  Everything here therefore works
in the log domain:

* :func:`log_bessel_i` -- hybrid evaluation of log I_s(x): an ascending
  power series summed in log space for small arguments, the uniform
  large-order asymptotic expansion otherwise, and an arbitrary-precision
  fallback whenever the double-precision paths cannot certify the
  requested tolerance.
* :func:`bessel_ratio` -- I_{s+1}(x)/I_s(x) through the Gauss continued
  fraction evaluated with the modified Lentz iteration.  The ratio gets
  its own cancellation-free path because it is the quantity concentration
  gradients consume, and subtracting two log values loses all precision
  as x grows.
* :func:`invert_bessel_ratio` -- the corrected continued-fraction
  approximation of Banerjee et al. (2005) for the inverse problem
  ratio(kappa) = r, which has no closed-form solution.

All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .errors import BesselConvergenceError, ConcentrationOverflowError

__all__ = [
    "BesselEvalConfig",
    "log_bessel_i",
    "bessel_ratio",
    "invert_bessel_ratio",
]


@dataclass(frozen=True)
class BesselEvalConfig:
    """Accuracy knobs for the Bessel evaluations.

    Parameters
    ----------
    target_rel_err : float
        Relative error demanded of the *log* value.
    max_series_terms : int
        Budget for the ascending series before giving up.
    precision_bits : int
        Mantissa size of the arbitrary-precision fallback.
    """

    target_rel_err: float = 1e-12
    max_series_terms: int = 10_000
    precision_bits: int = 256

    def __post_init__(self):
        if not (math.isfinite(self.target_rel_err) and self.target_rel_err > 0):
            raise ValueError("target_rel_err must be a positive finite real")
        if self.max_series_terms < 1:
            raise ValueError("max_series_terms must be at least 1")
        if self.precision_bits < 64:
            raise ValueError("precision_bits must be at least 64")


_DEFAULT_CFG = BesselEvalConfig()


def _debye_polynomials(count: int) -> list[dict[int, Fraction]]:
    """Exact coefficients of the Debye polynomials u_k(t).

    Built from the recurrence
    u_{k+1}(t) = t^2 (1-t^2) u_k'(t) / 2 + (1/8) int_0^t (1 - 5 tau^2) u_k(tau) dtau
    so no hand-transcribed tables are involved.
    """
    polys: list[dict[int, Fraction]] = [{0: Fraction(1)}]
    for _ in range(count - 1):
        u = polys[-1]
        nxt: dict[int, Fraction] = {}
        for p, c in u.items():
            if p:
                nxt[p + 1] = nxt.get(p + 1, Fraction(0)) + Fraction(p, 2) * c
                nxt[p + 3] = nxt.get(p + 3, Fraction(0)) - Fraction(p, 2) * c
        for p, c in u.items():
            nxt[p + 1] = nxt.get(p + 1, Fraction(0)) + c / (8 * (p + 1))
            nxt[p + 3] = nxt.get(p + 3, Fraction(0)) - 5 * c / (8 * (p + 3))
        polys.append({p: c for p, c in nxt.items() if c})
    return polys


# 15 terms keep the expansion at machine precision for sqrt(s^2+x^2) >= 20.
_DEBYE = [
    sorted((p, float(c)) for p, c in poly.items())
    for poly in _debye_polynomials(15)
]


def _check_order(s: float) -> float:
    s = float(s)
    if not (math.isfinite(s) and s >= 0.0):
        raise ValueError(f"Bessel order must be a finite nonnegative real, got {s!r}")
    return s


def _log_series(s: float, x: float, cfg: BesselEvalConfig) -> tuple[float, float]:
    """Ascending series for log I_s(x), terms accumulated in log space.

    Returns (value, absolute error estimate on the log value).
    """
    log_t0 = s * math.log(x / 2.0) - math.lgamma(s + 1.0)
    q = x * x / 4.0
    # Index of the largest term: (k+1)(s+k+1) = q.
    k_peak = max(0.0, 0.5 * (math.hypot(s, x) - s - 2.0))
    n = min(cfg.max_series_terms, int(k_peak) + 64)
    while True:
        ks = np.arange(1.0, n + 1.0)
        log_ratios = math.log(q) - np.log(ks) - np.log(s + ks)
        rel_logs = np.concatenate(([0.0], np.cumsum(log_ratios)))
        shift = float(rel_logs.max())
        if shift == 0.0:
            # First term dominates; log1p keeps tiny log values exact.
            rest = float(np.exp(rel_logs[1:]).sum())
            total = 1.0 + rest
            value = log_t0 + math.log1p(rest)
        else:
            total = float(np.exp(rel_logs - shift).sum())
            value = log_t0 + shift + math.log(total)
        ratio = q / ((n + 1.0) * (s + n + 1.0))
        if ratio < 1.0:
            # Geometric bound on the truncated tail, relative to the sum.
            tail_rel = math.exp(rel_logs[-1] - shift) * ratio / ((1.0 - ratio) * total)
        else:
            tail_rel = math.inf
        if tail_rel <= 0.25 * cfg.target_rel_err or n >= cfg.max_series_terms:
            break
        n = min(cfg.max_series_terms, 2 * n)
    if not tail_rel <= 0.25:
        raise BesselConvergenceError(
            f"series for log I_s(x) did not converge within {cfg.max_series_terms} "
            f"terms at s={s}, x={x}",
            partial_estimate=value,
        )
    rounding = 1e-15 * (1.0 + float(np.abs(rel_logs).max()))
    return value, tail_rel + rounding


def _log_uniform_asym(s: float, x: float) -> tuple[float, float]:
    """Uniform large-order expansion of log I_s(x), reparameterized in
    w = sqrt(s^2 + x^2) so the s -> 0 limit reduces to the Hankel form.

    Returns (value, absolute error estimate on the log value).
    """
    w = math.hypot(s, x)
    t = s / w
    inv_w = 1.0 / w
    total = 0.0
    prev = math.inf
    err = math.inf
    for k, poly in enumerate(_DEBYE):
        term = sum(c * t ** (p - k) for p, c in poly) * inv_w**k
        a = abs(term)
        if k and a >= prev:
            err = a  # the expansion is asymptotic: stop at the smallest term
            break
        total += term
        err = a
        if k and a < 1e-17 * abs(total):
            break
        prev = a
    exponent = w + s * math.log(x / (s + w)) - 0.5 * math.log(2.0 * math.pi * w)
    value = exponent + math.log(total)
    return value, err / abs(total) + 1e-15 * (1.0 + abs(value))


def _log_bessel_mp(s: float, x: float, bits: int) -> float:
    with mpmath.workprec(bits):
        return float(mpmath.log(mpmath.besseli(s, x)))


def log_bessel_i(s: float, x: float, cfg: BesselEvalConfig | None = None) -> float:
    """log I_s(x) for s >= 0, x > 0, never underflowing to -inf.

    A double-precision ascending series handles x <= max(s, 20) and the
    uniform large-order asymptotic expansion the rest; if neither can
    certify ``cfg.target_rel_err`` relative error on the log value, the
    arbitrary-precision fallback recomputes at ``cfg.precision_bits``.

    Raises
    ------
    ValueError
        Non-finite input, negative order, or x <= 0.
    BesselConvergenceError
        Series did not converge within ``cfg.max_series_terms``; the
        exception carries the partial estimate.
    """
    cfg = cfg or _DEFAULT_CFG
    s = _check_order(s)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"Bessel argument must be finite, got {x!r}")
    if x <= 0.0:
        raise ValueError(f"Bessel argument must be positive, got {x!r}")
    if x <= max(s, 20.0):
        value, err = _log_series(s, x, cfg)
    else:
        value, err = _log_uniform_asym(s, x)
    if err > cfg.target_rel_err * max(abs(value), 1e-300):
        value = _log_bessel_mp(s, x, cfg.precision_bits)
    return value


def _ratio_mp(s: float, x: float, bits: int) -> float:
    with mpmath.workprec(bits):
        return float(mpmath.besseli(s + 1, x) / mpmath.besseli(s, x))


def bessel_ratio(s: float, x: float, cfg: BesselEvalConfig | None = None) -> float:
    """The ratio I_{s+1}(x)/I_s(x), in [0, 1).

    Evaluated with the modified Lentz iteration on the Gauss continued
    fraction  R = 1/(b_1 + 1/(b_2 + ...)),  b_j = 2(s+j)/x,  which stays
    accurate as R -> 1 where a difference of log values would cancel.
    x = 0 returns the limit value 0.
    """
    cfg = cfg or _DEFAULT_CFG
    s = _check_order(s)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"Bessel argument must be finite, got {x!r}")
    if x < 0.0:
        raise ValueError(f"Bessel argument must be nonnegative, got {x!r}")
    if x == 0.0:
        return 0.0
    tol = 0.1 * min(cfg.target_rel_err, 1e-12)
    tiny = 1e-300
    f = tiny
    c = tiny
    d = 0.0
    # The Gauss fraction needs O(sqrt(x)) terms once x is large; the budget
    # is generous because this path must converge for every valid input.
    budget = int(1.2 * x) + 1000
    j = 0
    while j < budget:
        j += 1
        b = 2.0 * (s + j) / x
        d = b + d
        if d == 0.0:
            d = tiny
        c = b + 1.0 / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < tol:
            break
    else:
        f = _ratio_mp(s, x, cfg.precision_bits)
    if f >= 1.0:
        f = math.nextafter(1.0, 0.0)
    return f


def invert_bessel_ratio(d: int, r: float) -> float:
    """Approximate kappa solving I_{d/2}(kappa)/I_{d/2-1}(kappa) = r.

    Uses the continued-fraction approximation with the cubic correction
    term (Banerjee et al., 2005):  kappa = (d r - r^3) / (1 - r^2).

    Raises
    ------
    ValueError
        d < 2, or r outside [0, 1) on the low side.
    ConcentrationOverflowError
        r >= 1, i.e. fully concentrated (degenerate) data.
    """
    d = int(d)
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    r = float(r)
    if not (math.isfinite(r) and r >= 0.0):
        raise ValueError(f"mean resultant length must be in [0, 1), got {r!r}")
    if r >= 1.0:
        raise ConcentrationOverflowError(
            f"mean resultant length {r} >= 1: data is fully concentrated and "
            "kappa is unbounded"
        )
    return (d * r - r**3) / (1.0 - r * r)
