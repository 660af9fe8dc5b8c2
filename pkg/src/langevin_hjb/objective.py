"""Scalar objective functions with analytic gradients.

Objectives are looked up by name through a small registry so that the
command line can select them with ``--objective <name>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple

import numpy as np

__all__ = [
    "Objective1D",
    "double_well",
    "eval_f",
    "eval_grad",
    "register",
    "get_objective",
    "available_objectives",
]


@dataclass(frozen=True)
class Objective1D:
    """A scalar objective ``f: R -> R`` together with its derivative.

    ``eval`` and ``grad`` must accept numpy arrays as well as floats.
    ``grad_bound`` is informational only (``math.inf`` when unknown) and
    ``breakpoints`` lists the points where ``f''`` may jump.
    """

    name: str
    eval: Callable
    grad: Callable
    grad_bound: float = math.inf
    breakpoints: Tuple[float, ...] = field(default_factory=tuple)

    def __call__(self, x):
        return self.eval(x)


def _check_finite(x) -> None:
    if not np.all(np.isfinite(x)):
        raise ValueError(f"objective evaluated at non-finite point {x!r}")


def eval_f(obj: Objective1D, x):
    _check_finite(x)
    return obj.eval(x)


def eval_grad(obj: Objective1D, x):
    _check_finite(x)
    return obj.grad(x)


# Asymmetric double well: local minimum f(-3) = 2, global minimum f(4) = 0.
_DW_BREAKS = (-6.0, -2.0, 2.0, 6.0)


def _double_well_f(x):
    x = np.asarray(x, dtype=float)
    out = np.select(
        [x > 6.0, x > 2.0, x > -2.0, x > -6.0],
        [4.0 * x - 20.0, (x - 4.0) ** 2, 8.0 - x * x, 2.0 * (x + 3.0) ** 2 + 2.0],
        default=-12.0 * x - 52.0,
    )
    return float(out) if out.ndim == 0 else out


def _double_well_grad(x):
    x = np.asarray(x, dtype=float)
    out = np.select(
        [x > 6.0, x > 2.0, x > -2.0, x > -6.0],
        [np.full_like(x, 4.0), 2.0 * (x - 4.0), -2.0 * x, 4.0 * (x + 3.0)],
        default=np.full_like(x, -12.0),
    )
    return float(out) if out.ndim == 0 else out


def double_well() -> Objective1D:
    """The five-piece asymmetric double well (C^1, minima at -3 and 4)."""
    return Objective1D(
        name="double-well",
        eval=_double_well_f,
        grad=_double_well_grad,
        grad_bound=12.0,
        breakpoints=_DW_BREAKS,
    )


_REGISTRY: Dict[str, Callable[[], Objective1D]] = {"double-well": double_well}


def register(name: str, factory: Callable[[], Objective1D]) -> None:
    if name in _REGISTRY:
        raise ValueError(f"objective {name!r} already registered")
    _REGISTRY[name] = factory


def get_objective(name: str) -> Objective1D:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise KeyError(
            f"unknown objective {name!r}; available: {', '.join(sorted(_REGISTRY))}"
        ) from None


def available_objectives():
    return sorted(_REGISTRY)
