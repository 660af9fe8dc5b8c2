"""Shooting solver for the scalar entropy-regularised HJB equation.

In one dimension the value function ``v`` satisfies

    -rho v - f'(x) v' + f(x) - lam * log Z(v''/lam) = 0,

with ``Z`` the truncated-exponential normaliser on the temperature range.
At each state the left-hand side is strictly increasing in ``v''`` (its
slope is the mean temperature), so ``v''`` is recovered by a scalar root
solve and the equation becomes an explicit first-order system for
``(v, v')``.  That system is integrated with classical RK4 outward from
``x = 0`` where the initial condition ``(v(0), v'(0))`` is imposed.

The initial-value problem is exponentially unstable wherever the optimal
temperature is tiny (near the global minimum of the benchmark), so a
trajectory may leave any finite domain.  :class:`Blowup` carries the part
of the solution computed before divergence; :func:`solve` keeps that
truncated solution when ``HjbParams.on_blowup == "truncate"``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .objective import Objective1D
from .truncexp import TemperatureRange, diffusion_coeff_array, lp_and_mean_scalar

logger = logging.getLogger(__name__)

__all__ = [
    "HjbParams",
    "HjbSolution",
    "Blowup",
    "RootSolveError",
    "NoSurvivingSolution",
    "hjb_residual",
    "implicit_vxx",
    "integrate",
    "solve",
    "draw_inits",
]

_MAX_DOUBLINGS = 200
_MAX_NEWTON = 100
_ROOT_ATOL = 1e-10
_EPS = float(np.finfo(float).eps)


class RootSolveError(ArithmeticError):
    """The implicit equation for v'' could not be solved at a state."""


class NoSurvivingSolution(RuntimeError):
    """Every shooting initialisation diverged."""


@dataclass(frozen=True)
class HjbParams:
    rho: float
    lam: float
    range: TemperatureRange
    x_min: float = -8.0
    x_max: float = 8.0
    step: float = 1e-3
    n_inits: int = 20
    init_seed: int = 0
    blowup_threshold: float = 1e8
    # "truncate" keeps the pre-divergence part of a trajectory, "discard" drops it
    on_blowup: str = "truncate"

    def __post_init__(self):
        if not (self.rho > 0 and self.lam > 0):
            raise ValueError("rho and lam must be positive")
        if not self.x_min < 0.0 < self.x_max:
            raise ValueError("domain must contain the shooting point x = 0")
        if not self.step > 0:
            raise ValueError("step must be positive")
        for end in (self.x_min, self.x_max):
            n = end / self.step
            if abs(n - round(n)) > 1e-6:
                raise ValueError(f"domain end {end} is not a multiple of step {self.step}")
        if self.n_inits < 1:
            raise ValueError("n_inits must be >= 1")
        if not self.blowup_threshold > 0:
            raise ValueError("blowup_threshold must be positive")
        if self.on_blowup not in ("truncate", "discard"):
            raise ValueError("on_blowup must be 'truncate' or 'discard'")

    @property
    def n_left(self) -> int:
        return int(round(-self.x_min / self.step))

    @property
    def n_right(self) -> int:
        return int(round(self.x_max / self.step))


@dataclass(frozen=True)
class HjbSolution:
    """Grid samples of ``v, v', v''`` on uniformly spaced nodes.

    ``nodes`` spans ``[x_min, x_max]`` of ``params`` unless the trajectory
    diverged, in which case it stops at the last node before divergence
    and ``truncated`` is set.  Evaluation outside the node range clamps to
    the nearest end node.
    """

    params: HjbParams
    nodes: np.ndarray
    v: np.ndarray
    vx: np.ndarray
    vxx: np.ndarray
    init: Tuple[float, float]
    pilot_score: float = math.nan
    truncated: bool = False

    @property
    def lo_reached(self) -> float:
        return float(self.nodes[0])

    @property
    def hi_reached(self) -> float:
        return float(self.nodes[-1])

    def eval_v(self, x):
        return np.interp(x, self.nodes, self.v)

    def eval_vx(self, x):
        return np.interp(x, self.nodes, self.vx)

    def eval_vxx(self, x):
        return np.interp(x, self.nodes, self.vxx)

    def eval_h(self, x):
        r = self.params.range
        return diffusion_coeff_array(self.eval_vxx(x), self.params.lam, r.lo, r.hi)

    def temperature(self, x):
        """Effective temperature ``h(x)^2 / 2``."""
        h = self.eval_h(x)
        return 0.5 * h * h


class Blowup(ArithmeticError):
    """Integration left ``|v|, |v'| <= blowup_threshold``.

    ``x`` is the first node (or stage abscissa) where this happened and
    ``partial`` the solution on the nodes computed before it.
    """

    def __init__(self, x: float, partial: Optional[HjbSolution] = None):
        super().__init__(f"HJB trajectory diverged at x = {x:.6g}")
        self.x = x
        self.partial = partial


def hjb_residual(x, v, vx, vxx, obj: Objective1D, params: HjbParams) -> float:
    """Left-hand side of the reduced HJB equation at one state."""
    r = params.range
    lp, _ = lp_and_mean_scalar(vxx / params.lam, r.lo, r.hi)
    return -params.rho * v - float(obj.grad(x)) * vx + float(obj.eval(x)) - params.lam * lp


def _solve_vxx(s: float, lam: float, lo: float, hi: float, guess: float) -> float:
    """Root ``m`` of ``R(m) = -s - lam * log Z(m / lam)``.

    ``R`` is increasing with slope ``E[u] in (lo, hi)`` and concave, so
    Newton iterates approach the root monotonically once they are to its
    left; a right-side start overshoots left once.  Bisection on an
    expanded bracket is the fallback.
    """
    if not math.isfinite(s):
        raise RootSolveError(f"non-finite linear part {s!r}")

    def resid(m):
        lp, mu = lp_and_mean_scalar(m / lam, lo, hi)
        return -s - lam * lp, mu

    m = guess if math.isfinite(guess) else 0.0
    below, above = -math.inf, math.inf
    for _ in range(_MAX_NEWTON):
        r, mu = resid(m)
        if r == 0.0:
            return m
        if r < 0.0:
            below = m
        else:
            above = m
        step = -r / mu
        nxt = m + step
        if below < nxt < above:
            if abs(step) <= max(_ROOT_ATOL, 4.0 * _EPS * abs(nxt)):
                return nxt
            m = nxt
        elif math.isfinite(below) and math.isfinite(above):
            m = 0.5 * (below + above)
        else:
            m = nxt
        if not math.isfinite(m):
            break
    return _bisect_vxx(resid, guess, lo, hi)


def _bisect_vxx(resid, guess, lo, hi):
    start = guess if math.isfinite(guess) else 0.0
    a = b = start
    width = 1.0
    for _ in range(_MAX_DOUBLINGS):
        if resid(a)[0] < 0.0:
            break
        a = start - width
        width *= 2.0
    else:
        raise RootSolveError("bracket expansion failed below the guess")
    width = 1.0
    for _ in range(_MAX_DOUBLINGS):
        if resid(b)[0] > 0.0:
            break
        b = start + width
        width *= 2.0
    else:
        raise RootSolveError("bracket expansion failed above the guess")
    while b - a > max(_ROOT_ATOL, 4.0 * _EPS * max(abs(a), abs(b))):
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        if resid(mid)[0] < 0.0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def implicit_vxx(x, v, vx, obj: Objective1D, params: HjbParams, guess: float = 0.0) -> float:
    """Solve the reduced HJB equation for ``v''`` at the state ``(x, v, v')``."""
    if not all(math.isfinite(q) for q in (x, v, vx)):
        raise RootSolveError("non-finite state")
    s = params.rho * v + float(obj.grad(x)) * vx - float(obj.eval(x))
    r = params.range
    return _solve_vxx(s, params.lam, r.lo, r.hi, guess)


def _shoot(obj, params, v0, vx0, direction):
    """RK4 from x = 0 in one direction.

    Returns node arrays (ordered outward from 0) and the abscissa where
    the trajectory diverged, or ``None``.
    """
    n = params.n_right if direction > 0 else params.n_left
    h = params.step
    dx = direction * h
    half = direction * h * 0.5 * np.arange(2 * n + 1)
    f_half = np.asarray(obj.eval(half), dtype=float).tolist()
    g_half = np.asarray(obj.grad(half), dtype=float).tolist()
    rho, lam = params.rho, params.lam
    lo, hi = params.range.lo, params.range.hi
    cap = params.blowup_threshold

    def rhs(j, v, vx, guess):
        return _solve_vxx(rho * v + g_half[j] * vx - f_half[j], lam, lo, hi, guess)

    xs = [0.0]
    vs = [v0]
    vxs = [vx0]
    m = rhs(0, v0, vx0, 0.0)
    ms = [m]
    v, vx = v0, vx0
    for i in range(n):
        j = 2 * i
        # k = (dv, dvx) = (vx, m) at each stage
        a1, b1 = vx, m
        v2, vx2 = v + 0.5 * dx * a1, vx + 0.5 * dx * b1
        if not (abs(v2) <= cap and abs(vx2) <= cap):
            return xs, vs, vxs, ms, half[j + 1]
        b2 = rhs(j + 1, v2, vx2, b1)
        a2 = vx2
        v3, vx3 = v + 0.5 * dx * a2, vx + 0.5 * dx * b2
        if not (abs(v3) <= cap and abs(vx3) <= cap):
            return xs, vs, vxs, ms, half[j + 1]
        b3 = rhs(j + 1, v3, vx3, b2)
        a3 = vx3
        v4, vx4 = v + dx * a3, vx + dx * b3
        if not (abs(v4) <= cap and abs(vx4) <= cap):
            return xs, vs, vxs, ms, half[j + 2]
        b4 = rhs(j + 2, v4, vx4, b3)
        a4 = vx4
        v = v + dx / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        vx = vx + dx / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        if not (abs(v) <= cap and abs(vx) <= cap):
            return xs, vs, vxs, ms, half[j + 2]
        m = rhs(j + 2, v, vx, b4)
        xs.append(half[j + 2])
        vs.append(v)
        vxs.append(vx)
        ms.append(m)
    return xs, vs, vxs, ms, None


def integrate(obj: Objective1D, params: HjbParams, init: Sequence[float]) -> HjbSolution:
    """Integrate outward from ``x = 0`` to both ends of the domain.

    Raises :class:`Blowup` when ``|v|`` or ``|v'|`` exceeds the threshold;
    the exception carries the solution on the nodes reached so far.
    """
    v0, vx0 = (float(q) for q in init)
    if not (math.isfinite(v0) and math.isfinite(vx0)):
        raise ValueError(f"initial condition must be finite, got {init!r}")
    init_pair = (v0, vx0)
    cap = params.blowup_threshold
    if not (abs(v0) <= cap and abs(vx0) <= cap):
        raise Blowup(0.0, None)

    right = _shoot(obj, params, v0, vx0, +1)
    left = _shoot(obj, params, v0, vx0, -1)
    # stitch: left side reversed (without its copy of x = 0) then right side
    cols = [np.array(l[:0:-1] + r) for l, r in zip(left[:4], right[:4])]
    # node abscissae are i * step exactly, independent of accumulation
    nodes = cols[0]
    sol = HjbSolution(
        params=params,
        nodes=nodes,
        v=cols[1],
        vx=cols[2],
        vxx=cols[3],
        init=init_pair,
        truncated=right[4] is not None or left[4] is not None,
    )
    if sol.truncated:
        where = [w for w in (right[4], left[4]) if w is not None]
        raise Blowup(float(min(where, key=abs)), sol)
    return sol


def draw_inits(params: HjbParams) -> np.ndarray:
    """``n_inits`` pairs ``(v(0), v'(0))`` of independent standard normals."""
    rng = np.random.default_rng(params.init_seed)
    return rng.standard_normal((params.n_inits, 2))


def _integrate_or_partial(args):
    obj, params, init = args
    try:
        return integrate(obj, params, init), None
    except Blowup as exc:
        return exc.partial, exc.x


def solve(
    obj: Objective1D,
    params: HjbParams,
    pilot=None,
    init: Optional[Sequence[float]] = None,
    workers: int = 1,
) -> HjbSolution:
    """Shooting over random initial conditions, choosing by pilot score.

    ``pilot`` is a :class:`~langevin_hjb.simulate.SimConfig`; each
    surviving candidate drives a short Monte Carlo run of the
    state-dependent algorithm and the one with the lowest mean objective
    at the final pilot iteration wins (ties go to the earlier draw).
    Passing ``init`` bypasses the random draws.  Without ``pilot`` the
    first survivor is returned with a NaN score.
    """
    inits = [tuple(map(float, init))] if init is not None else [tuple(p) for p in draw_inits(params)]
    jobs = [(obj, params, p) for p in inits]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_integrate_or_partial, jobs))
    else:
        results = [_integrate_or_partial(j) for j in jobs]

    survivors: List[HjbSolution] = []
    for p, (sol, diverged_at) in zip(inits, results):
        if diverged_at is None:
            survivors.append(sol)
            continue
        usable = (
            params.on_blowup == "truncate"
            and sol is not None
            and sol.nodes[0] < 0.0 < sol.nodes[-1]
        )
        logger.info(
            "init (%.4f, %.4f) diverged at x=%.4g%s",
            p[0], p[1], diverged_at, " (kept truncated)" if usable else "",
        )
        if usable:
            survivors.append(sol)
    if not survivors:
        raise NoSurvivingSolution(f"all {len(inits)} initialisations diverged")
    if pilot is None:
        return survivors[0]

    from .simulate import run

    pilot_cfg = replace(pilot, policy="state-dependent")
    best, best_score = None, math.inf
    for sol in survivors:
        try:
            stats = run(pilot_cfg, sol).stats
            score = stats[-1].mean_f
        except Exception as exc:  # pilot failure disqualifies the candidate
            logger.info("pilot run failed for init %s: %s", sol.init, exc)
            score = math.inf
        logger.info("init (%.4f, %.4f) pilot score %.6g", sol.init[0], sol.init[1], score)
        if best is None or score < best_score:
            best, best_score = sol, score
    return replace(best, pilot_score=best_score)
