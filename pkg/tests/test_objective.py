import numpy as np
import pytest
from hypothesis import given, strategies as st

from langevin_hjb.objective import (
    Objective1D,
    available_objectives,
    double_well,
    eval_f,
    eval_grad,
    get_objective,
    register,
)


def test_known_values():
    f = double_well()
    assert f.eval(4.0) == 0.0
    assert f.eval(-3.0) == 2.0
    assert f.eval(0.0) == 8.0
    assert f.eval(10.0) == 20.0
    assert f.eval(-10.0) == 68.0


def test_registry():
    assert "double-well" in available_objectives()
    assert get_objective("double-well").name == "double-well"
    with pytest.raises(KeyError):
        get_objective("no-such-objective")


def test_register_custom():
    quad = Objective1D("quad-test", lambda x: np.asarray(x) ** 2, lambda x: 2 * np.asarray(x))
    register("quad-test", lambda: quad)
    assert get_objective("quad-test").eval(3.0) == 9.0


@pytest.mark.parametrize("b", [-6.0, -2.0, 2.0, 6.0])
def test_continuity_at_breakpoints(b):
    f = double_well()
    eps = 1e-8
    assert abs(f.eval(b + eps) - f.eval(b - eps)) < 1e-6
    assert abs(f.grad(b + eps) - f.grad(b - eps)) < 1e-6


@given(st.floats(-50, 50, allow_nan=False))
def test_gradient_matches_finite_difference(x):
    f = double_well()
    h = 1e-6
    fd = (f.eval(x + h) - f.eval(x - h)) / (2 * h)
    assert abs(fd - f.grad(x)) < 1e-4


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_gradient_bounded_and_global_min(x):
    f = double_well()
    assert abs(f.grad(x)) <= f.grad_bound
    assert f.eval(x) >= 0.0


def test_vectorised_matches_scalar():
    f = double_well()
    xs = np.linspace(-9, 9, 101)
    np.testing.assert_array_equal(f.eval(xs), [f.eval(float(x)) for x in xs])


def test_rejects_non_finite():
    f = double_well()
    with pytest.raises(ValueError):
        eval_f(f, float("nan"))
    with pytest.raises(ValueError):
        eval_grad(f, np.array([0.0, np.inf]))
