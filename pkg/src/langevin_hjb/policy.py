"""Temperature policies for the Langevin iteration.

A policy maps ``(k, x, u01)`` to a temperature: ``k`` is the 0-based step
index, ``x`` the current iterate and ``u01`` a uniform draw that only the
sampled relaxed policy consumes.  All policies are immutable and
vectorised over ``x`` / ``u01``.

``SampledRelaxed`` draws the temperature from the optimal truncated
exponential law itself, instead of using its averaged noise scale as
``StateDependent`` does.  It is an extension: the benchmark experiments
only use the averaged form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .hjb import HjbSolution
from .truncexp import TemperatureRange, sample_array

__all__ = [
    "Constant",
    "PowerLaw",
    "BangBang",
    "StateDependent",
    "SampledRelaxed",
    "POLICY_NAMES",
    "temperature",
    "needs_solution",
]

POLICY_NAMES = (
    "constant",
    "power-law",
    "bang-bang",
    "state-dependent",
    "sampled-relaxed",
    "replica-exchange",
)


@dataclass(frozen=True)
class Constant:
    beta: float
    range: Optional[TemperatureRange] = None

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.range is not None and not self.range.lo <= self.beta <= self.range.hi:
            raise ValueError(f"beta={self.beta} outside [{self.range.lo}, {self.range.hi}]")

    def temperature(self, k, x, u01=None):
        return np.full(np.shape(x), self.beta, dtype=float) if np.ndim(x) else self.beta


@dataclass(frozen=True)
class PowerLaw:
    """``beta_k = (d / (1 + k))**b`` with ``k`` counted from 0."""

    d: float
    b: float

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError("d must be positive")
        if not 0.5 <= self.b <= 1.0:
            raise ValueError(f"b must lie in [0.5, 1], got {self.b}")

    def temperature(self, k, x, u01=None):
        if k < 0:
            raise ValueError("iteration index must be >= 0")
        beta = (self.d / (1.0 + k)) ** self.b
        return np.full(np.shape(x), beta, dtype=float) if np.ndim(x) else beta


@dataclass(frozen=True)
class BangBang:
    """Hottest temperature where ``v'' < 0``, coldest otherwise (ties cold)."""

    sol: HjbSolution

    def temperature(self, k, x, u01=None):
        r = self.sol.params.range
        out = np.where(self.sol.eval_vxx(x) < 0.0, r.hi, r.lo)
        return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class StateDependent:
    """Effective temperature ``h(x)^2 / 2`` of the optimal diffusion."""

    sol: HjbSolution

    def noise_coeff(self, x):
        return self.sol.eval_h(x)

    def temperature(self, k, x, u01=None):
        out = self.sol.temperature(x)
        return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class SampledRelaxed:
    sol: HjbSolution

    def temperature(self, k, x, u01):
        p = self.sol.params
        rate = self.sol.eval_vxx(x) / p.lam
        out = sample_array(rate, u01, p.range.lo, p.range.hi)
        return out if np.ndim(out) else float(out)


def temperature(policy, k: int, x, u01=None):
    return policy.temperature(k, x, u01)


def needs_solution(name: str) -> bool:
    return name in ("bang-bang", "state-dependent", "sampled-relaxed")
