import math
from dataclasses import replace

import numpy as np
import pytest

from langevin_hjb import hjb, truncexp as te
from langevin_hjb.objective import Objective1D, double_well
from langevin_hjb.truncexp import TemperatureRange

RANGE = TemperatureRange(1e-4, 500.0)


def small_params(**kw):
    base = dict(rho=1.25, lam=0.3125, range=RANGE, x_min=-1.0, x_max=1.0, step=1e-3)
    base.update(kw)
    return hjb.HjbParams(**base)


def test_params_validation():
    with pytest.raises(ValueError):
        small_params(x_min=0.5)
    with pytest.raises(ValueError):
        small_params(step=0.3)
    with pytest.raises(ValueError):
        small_params(lam=0.0)
    p = small_params()
    assert (p.n_left, p.n_right) == (1000, 1000)


@pytest.mark.parametrize("s", [-1e3, -5.0, 0.0, 2.0, 1e4])
def test_implicit_root_satisfies_equation(s):
    # solve  -s - lam * LP(m / lam) = 0  for m
    lam = 0.3125
    m = hjb._solve_vxx(s, lam, RANGE.lo, RANGE.hi, 0.0)
    lp = float(te.log_partition_array(m / lam, RANGE.lo, RANGE.hi))
    assert abs(s + lam * lp) <= 1e-9 * max(1.0, abs(s))


def test_implicit_vxx_residual_zero():
    obj, p = double_well(), small_params()
    m = hjb.implicit_vxx(0.3, 1.0, 2.0, obj, p)
    assert abs(hjb.hjb_residual(0.3, 1.0, 2.0, m, obj, p)) < 1e-9


def test_linear_objective_has_closed_form():
    # f(x) = x with rho = 1: v = x - c solves  -v - v' + x - lam LP(v''/lam) = 0
    # when v'' = 0 and c = 1 + lam * log(hi - lo)
    obj = Objective1D("lin", lambda x: np.asarray(x, float) * 1.0, lambda x: np.ones_like(np.asarray(x, float)))
    p = small_params(rho=1.0, lam=0.5, range=TemperatureRange(0.5, 2.0))
    c = 1.0 + 0.5 * math.log(1.5)
    sol = hjb.integrate(obj, p, (-c, 1.0))
    np.testing.assert_allclose(sol.v, sol.nodes - c, atol=1e-9)
    np.testing.assert_allclose(sol.vxx, 0.0, atol=1e-8)


def test_integrate_rejects_non_finite_init():
    with pytest.raises(ValueError):
        hjb.integrate(double_well(), small_params(), (math.nan, 0.0))


def test_preset_blowup_carries_partial():
    p = hjb.HjbParams(rho=1.25, lam=0.3125, range=RANGE)
    with pytest.raises(hjb.Blowup) as info:
        hjb.integrate(double_well(), p, (-0.2853, 1.1575))
    part = info.value.partial
    assert part.truncated and part.nodes[0] == -8.0
    assert 4.0 < info.value.x < 4.1


def test_discard_mode_raises_when_nothing_survives():
    p = hjb.HjbParams(rho=1.25, lam=0.3125, range=RANGE, on_blowup="discard")
    with pytest.raises(hjb.NoSurvivingSolution):
        hjb.solve(double_well(), p, init=(-0.2853, 1.1575))


def test_solution_evaluation_clamps(preset_solution):
    sol = preset_solution
    end = sol.nodes[-1]
    assert sol.eval_v(100.0) == sol.v[-1]
    assert sol.eval_h(end + 1.0) == sol.eval_h(end)
    np.testing.assert_allclose(sol.temperature(sol.nodes[:5]), sol.eval_h(sol.nodes[:5]) ** 2 / 2)


def test_draw_inits_reproducible():
    p = small_params(n_inits=5, init_seed=3)
    np.testing.assert_array_equal(hjb.draw_inits(p), hjb.draw_inits(p))
    assert hjb.draw_inits(p).shape == (5, 2)


def test_solve_random_inits_with_pilot():
    from langevin_hjb.simulate import SimConfig

    p = replace(small_params(), n_inits=3)
    pilot = SimConfig(policy="state-dependent", eta=0.1, n_steps=20, n_reps=5, x0=0.0)
    sol = hjb.solve(double_well(), p, pilot=pilot)
    assert math.isfinite(sol.pilot_score)
    assert tuple(sol.init) in {tuple(r) for r in hjb.draw_inits(p)}
