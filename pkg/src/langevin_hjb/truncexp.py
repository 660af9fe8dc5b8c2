"""Truncated exponential law on a temperature interval ``[lo, hi]``.

The density is proportional to ``exp(-rate * u)`` on ``[lo, hi]``; ``rate``
may take any sign.  Every quantity is written in terms of the
dimensionless ``t = rate * (hi - lo)`` and the two helpers

    psi(t) = (1 - exp(-t)) / t        (normaliser relative to the heavy end)
    phi(t) = 1/t - 1/(exp(t) - 1)     (mean offset as a fraction of the width)

which are evaluated without cancellation for every ``t``.  Nothing here
overflows for ``|rate * hi|`` far beyond 700.

Each operation has a scalar entry point taking a :class:`TruncExpDist`
and an ``*_array`` kernel broadcasting over numpy arrays of rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SERIES_THRESHOLD",
    "TemperatureRange",
    "TruncExpDist",
    "log_partition",
    "mean",
    "entropy",
    "diffusion_coeff",
    "sample",
    "pdf",
    "cdf",
    "log_partition_array",
    "mean_array",
    "entropy_array",
    "diffusion_coeff_array",
    "sample_array",
    "cdf_array",
    "lp_and_mean_scalar",
]

# |rate| * (hi - lo) below which the two-term expansions are used.
SERIES_THRESHOLD = 1e-8

# |t| below which phi is summed from its Bernoulli series.
_PHI_SERIES_CUT = 0.25
# Coefficients of t, t^3, ..., t^11 in phi(t) - 1/2.
_PHI_COEFS = (
    -1.0 / 12.0,
    1.0 / 720.0,
    -1.0 / 30240.0,
    1.0 / 1209600.0,
    -1.0 / 47900160.0,
    691.0 / 1307674368000.0,
)


@dataclass(frozen=True)
class TemperatureRange:
    """Admissible temperatures ``[lo, hi]`` with ``0 < lo < hi``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("temperature range must be finite")
        if not 0.0 < self.lo < self.hi:
            raise ValueError(f"need 0 < lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class TruncExpDist:
    rate: float
    range: TemperatureRange

    def __post_init__(self):
        if not math.isfinite(self.rate):
            raise ValueError(f"rate must be finite, got {self.rate}")


# ---------------------------------------------------------------------------
# numpy kernels
# ---------------------------------------------------------------------------


def _phi(t):
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    small = np.abs(t) < _PHI_SERIES_CUT
    ts = t[small]
    t2 = ts * ts
    acc = np.zeros_like(ts)
    for c in reversed(_PHI_COEFS):
        acc = acc * t2 + c
    out[small] = 0.5 + ts * acc
    tl = t[~small]
    with np.errstate(over="ignore"):
        out[~small] = 1.0 / tl - 1.0 / np.expm1(tl)
    return out


def _log_psi(tau):
    """log((1 - e^-tau)/tau) for tau >= 0."""
    tau = np.asarray(tau, dtype=float)
    out = np.zeros_like(tau)
    pos = tau > 0
    tp = tau[pos]
    out[pos] = np.log(-np.expm1(-tp)) - np.log(tp)
    return out


def log_partition_array(rate, lo, hi):
    """``log of integral_lo^hi exp(-rate u) du``, elementwise in ``rate``."""
    rate = np.asarray(rate, dtype=float)
    w = hi - lo
    t = rate * w
    tau = np.abs(t)
    series = tau < SERIES_THRESHOLD
    heavy = np.where(rate >= 0, lo, hi)
    exact = -rate * heavy + math.log(w) + _log_psi(tau)
    approx = math.log(w) - rate * (lo + hi) / 2.0 + t * t / 24.0
    return np.where(series, approx, exact)


def mean_array(rate, lo, hi):
    rate = np.asarray(rate, dtype=float)
    w = hi - lo
    t = rate * w
    series = np.abs(t) < SERIES_THRESHOLD
    exact = lo + w * _phi(t)
    approx = (lo + hi) / 2.0 - rate * w * w / 12.0
    out = np.where(series, approx, exact)
    # rounding can land exactly on an endpoint for huge |rate|
    return np.clip(out, lo, hi)


def entropy_array(rate, lo, hi):
    """Differential entropy ``log Z + rate * E[u]`` in cancellation-free form."""
    rate = np.asarray(rate, dtype=float)
    w = hi - lo
    tau = np.abs(rate * w)
    return math.log(w) + _log_psi(tau) + tau * _phi(tau)


def diffusion_coeff_array(vxx, lam, lo, hi):
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return np.sqrt(2.0 * mean_array(np.asarray(vxx, dtype=float) / lam, lo, hi))


def cdf_array(rate, u, lo, hi):
    rate = np.asarray(rate, dtype=float)
    u = np.asarray(u, dtype=float)
    w = hi - lo
    t = rate * w
    series = np.abs(t) < SERIES_THRESHOLD
    # rate > 0: mass sits at lo; rate < 0: at hi (written as a survival fn)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        up = np.expm1(-rate * (u - lo)) / np.expm1(-t)
        down = 1.0 - np.expm1(rate * (hi - u)) / np.expm1(t)
    out = np.where(rate > 0, up, down)
    out = np.where(series, (u - lo) / w, out)
    return np.clip(out, 0.0, 1.0)


def sample_array(rate, u01, lo, hi):
    """Inverse-CDF transform of uniforms ``u01`` in ``[0, 1)``."""
    rate = np.asarray(rate, dtype=float)
    u01 = np.asarray(u01, dtype=float)
    if np.any((u01 < 0.0) | (u01 >= 1.0)):
        raise ValueError("u01 must lie in [0, 1)")
    w = hi - lo
    t = rate * w
    series = np.abs(t) < SERIES_THRESHOLD
    safe = np.where(series, 1.0, rate)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        up = lo - np.log1p(u01 * np.expm1(-t)) / safe
        down = hi - np.log1p((1.0 - u01) * np.expm1(t)) / safe
    out = np.where(rate > 0, up, down)
    out = np.where(series, lo + u01 * w, out)
    return np.clip(out, lo, hi)


# ---------------------------------------------------------------------------
# scalar API
# ---------------------------------------------------------------------------


def log_partition(dist: TruncExpDist) -> float:
    r = dist.range
    return float(log_partition_array(dist.rate, r.lo, r.hi))


def mean(dist: TruncExpDist) -> float:
    r = dist.range
    return float(mean_array(dist.rate, r.lo, r.hi))


def entropy(dist: TruncExpDist) -> float:
    r = dist.range
    return float(entropy_array(dist.rate, r.lo, r.hi))


def diffusion_coeff(vxx: float, lam: float, range: TemperatureRange) -> float:
    """Noise scale ``sqrt(2 E[u])`` under the law with rate ``vxx / lam``."""
    return float(diffusion_coeff_array(vxx, lam, range.lo, range.hi))


def sample(dist: TruncExpDist, u01: float) -> float:
    r = dist.range
    return float(sample_array(dist.rate, u01, r.lo, r.hi))


def cdf(dist: TruncExpDist, u: float) -> float:
    r = dist.range
    return float(cdf_array(dist.rate, u, r.lo, r.hi))


def pdf(dist: TruncExpDist, u: float) -> float:
    r = dist.range
    if not r.lo <= u <= r.hi:
        raise ValueError(f"u={u} outside [{r.lo}, {r.hi}]")
    # exponent measured from the heavy endpoint so it is always <= 0
    heavy = r.lo if dist.rate >= 0 else r.hi
    tau = abs(dist.rate * r.width)
    if tau < SERIES_THRESHOLD:
        return math.exp(-dist.rate * u - log_partition(dist))
    log_norm = math.log(r.width) + float(_log_psi(tau))
    return math.exp(-dist.rate * (u - heavy) - log_norm)


# ---------------------------------------------------------------------------
# fused scalar kernel for the HJB root solve (called ~10^5 times per solve)
# ---------------------------------------------------------------------------


def _phi_scalar(t: float) -> float:
    if abs(t) < _PHI_SERIES_CUT:
        t2 = t * t
        acc = 0.0
        for c in reversed(_PHI_COEFS):
            acc = acc * t2 + c
        return 0.5 + t * acc
    if t > 700.0:
        return 1.0 / t
    return 1.0 / t - 1.0 / math.expm1(t)


def lp_and_mean_scalar(rate: float, lo: float, hi: float):
    """Return ``(log_partition, mean)`` for a plain float rate."""
    w = hi - lo
    t = rate * w
    tau = abs(t)
    if tau < SERIES_THRESHOLD:
        return (
            math.log(w) - rate * (lo + hi) / 2.0 + t * t / 24.0,
            (lo + hi) / 2.0 - rate * w * w / 12.0,
        )
    heavy = lo if rate >= 0 else hi
    lp = -rate * heavy + math.log(w) + math.log(-math.expm1(-tau)) - math.log(tau)
    m = lo + w * _phi_scalar(t)
    return lp, min(max(m, lo), hi)
