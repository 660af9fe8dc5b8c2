"""Euler-Maruyama steppers and the Monte Carlo harness.

Every replication owns its random stream, derived from ``(seed, salt, r)``
through :class:`numpy.random.SeedSequence`, so replication ``r`` is the
same trajectory whatever ``n_reps`` is and however the work is scheduled.
The salt is the algorithm label unless ``common_noise`` is set, in which
case all algorithms see the same Gaussian sequence.

Statistics at iteration ``k`` (1-based) describe the iterate *before* the
k-th step, so ``k = 1`` reports ``f(x0)``.
"""

from __future__ import annotations

import logging
import math
import zlib
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .hjb import HjbSolution
from .objective import Objective1D, get_objective
from .policy import (
    BangBang,
    Constant,
    PowerLaw,
    SampledRelaxed,
    StateDependent,
    needs_solution,
)

logger = logging.getLogger(__name__)

__all__ = [
    "SimConfig",
    "IterStats",
    "RunResult",
    "SimulationError",
    "langevin_step",
    "state_dependent_step",
    "replica_step",
    "build_policy",
    "normal_draws",
    "run",
]


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    policy: str
    eta: float
    n_steps: int
    n_reps: int
    x0: float = -3.0
    seed: int = 0
    objective: str = "double-well"
    beta: Optional[float] = None
    d: Optional[float] = None
    b: Optional[float] = None
    replica_gamma: Optional[float] = None
    common_noise: bool = False
    label: str = ""

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.n_steps < 1 or self.n_reps < 1:
            raise ValueError("n_steps and n_reps must be >= 1")
        if not math.isfinite(self.x0):
            raise ValueError("x0 must be finite")

    @property
    def name(self) -> str:
        return self.label or self.policy


@dataclass(frozen=True)
class IterStats:
    k: int
    mean_f: float
    std_err: float
    min_f: float
    max_f: float


@dataclass(frozen=True)
class RunResult:
    config: SimConfig
    stats: List[IterStats]
    n_excluded: int

    def mean_curve(self) -> np.ndarray:
        return np.array([s.mean_f for s in self.stats])


def state_dependent_step(x, grad, eta, h, xi):
    """One Euler-Maruyama step ``x - eta f'(x) + sqrt(eta) h(x) xi``."""
    return x - eta * grad + np.sqrt(eta) * h * xi


def langevin_step(x, grad, eta, beta, xi):
    """Langevin step at temperature ``beta``.

    Routed through :func:`state_dependent_step` with ``h = sqrt(2 beta)``
    so the two agree bit for bit.
    """
    return state_dependent_step(x, grad, eta, np.sqrt(2.0 * beta), xi)


def replica_step(xg, yl, obj: Objective1D, eta, gamma, xi):
    """Gradient-descent copy ``xg`` and Langevin copy ``yl`` at temperature
    ``gamma``; positions swap when the Langevin copy is strictly better.
    Returns ``(xg, yl)`` after the swap; ``xg`` is the reported iterate.
    """
    xg_new = xg - eta * obj.grad(xg)
    yl_new = langevin_step(yl, obj.grad(yl), eta, gamma, xi)
    swap = obj.eval(xg_new) > obj.eval(yl_new)
    return np.where(swap, yl_new, xg_new), np.where(swap, xg_new, yl_new)


def build_policy(config: SimConfig, sol: Optional[HjbSolution] = None):
    name = config.policy
    if needs_solution(name) and sol is None:
        raise SimulationError(f"policy {name!r} needs an HJB solution")
    if name == "constant":
        if config.beta is None:
            raise SimulationError("constant policy needs beta")
        return Constant(config.beta)
    if name == "power-law":
        if config.d is None or config.b is None:
            raise SimulationError("power-law policy needs d and b")
        return PowerLaw(config.d, config.b)
    if name == "bang-bang":
        return BangBang(sol)
    if name == "state-dependent":
        return StateDependent(sol)
    if name == "sampled-relaxed":
        return SampledRelaxed(sol)
    if name == "replica-exchange":
        if config.replica_gamma is None:
            raise SimulationError("replica exchange needs replica_gamma")
        return None
    raise SimulationError(f"unknown policy {name!r}")


def _salt(config: SimConfig) -> int:
    return 0 if config.common_noise else zlib.crc32(config.name.encode()) + 1


def _generator(config: SimConfig, rep: int, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(config.seed, spawn_key=(_salt(config), rep, stream))
    return np.random.Generator(np.random.PCG64(ss))


def normal_draws(config: SimConfig) -> np.ndarray:
    """Gaussian increments, shape ``(n_steps - 1, n_reps)``."""
    n = config.n_steps - 1
    cols = [_generator(config, r, 0).standard_normal(n) for r in range(config.n_reps)]
    return np.array(cols, dtype=float).reshape(config.n_reps, n).T.copy()


def _uniform_draws(config: SimConfig) -> np.ndarray:
    n = config.n_steps - 1
    cols = [_generator(config, r, 1).random(n) for r in range(config.n_reps)]
    return np.array(cols, dtype=float).reshape(config.n_reps, n).T.copy()


def run(config: SimConfig, sol: Optional[HjbSolution] = None) -> RunResult:
    """Simulate ``n_reps`` trajectories and aggregate ``f`` per iteration.

    Trajectories that become non-finite are dropped from every iteration
    and counted in ``RunResult.n_excluded``.
    """
    obj = get_objective(config.objective)
    policy = build_policy(config, sol)
    xi = normal_draws(config)
    u = _uniform_draws(config) if config.policy == "sampled-relaxed" else None

    n_steps, n_reps, eta = config.n_steps, config.n_reps, config.eta
    x = np.full(n_reps, float(config.x0))
    y = x.copy()
    fvals = np.empty((n_steps, n_reps))
    with np.errstate(all="ignore"):
        for k in range(n_steps):
            fvals[k] = obj.eval(x)
            if k == n_steps - 1:
                break
            if config.policy == "replica-exchange":
                x, y = replica_step(x, y, obj, eta, config.replica_gamma, xi[k])
                continue
            grad = obj.grad(x)
            if isinstance(policy, StateDependent):
                x = state_dependent_step(x, grad, eta, policy.noise_coeff(x), xi[k])
            else:
                beta = policy.temperature(k, x, None if u is None else u[k])
                x = langevin_step(x, grad, eta, beta, xi[k])

    keep = np.all(np.isfinite(fvals), axis=0)
    n_excluded = int(n_reps - keep.sum())
    if n_excluded:
        logger.warning("%s: %d of %d trajectories became non-finite", config.name, n_excluded, n_reps)
    if not keep.any():
        raise SimulationError(f"{config.name}: every trajectory became non-finite")
    fvals = fvals[:, keep]
    n = fvals.shape[1]
    mins = fvals.min(axis=1)
    maxs = fvals.max(axis=1)
    # summation rounding can push the mean of equal values past them
    means = np.clip(fvals.mean(axis=1), mins, maxs)
    errs = fvals.std(axis=1, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(n_steps)
    stats = [
        IterStats(k + 1, float(means[k]), float(errs[k]), float(mins[k]), float(maxs[k]))
        for k in range(n_steps)
    ]
    return RunResult(config, stats, n_excluded)
