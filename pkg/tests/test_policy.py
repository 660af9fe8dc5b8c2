import numpy as np
import pytest
from scipy import stats

from langevin_hjb import truncexp as te
from langevin_hjb.policy import (
    POLICY_NAMES,
    BangBang,
    Constant,
    PowerLaw,
    SampledRelaxed,
    StateDependent,
    needs_solution,
    temperature,
)
from langevin_hjb.truncexp import TemperatureRange


def test_constant():
    p = Constant(0.5)
    assert temperature(p, 10, 1.0) == 0.5
    np.testing.assert_array_equal(p.temperature(0, np.zeros(3)), [0.5] * 3)
    with pytest.raises(ValueError):
        Constant(-1.0)
    with pytest.raises(ValueError):
        Constant(1000.0, TemperatureRange(1e-4, 500.0))


def test_power_law():
    p = PowerLaw(31.25, 0.9)
    assert p.temperature(0, 0.0) == pytest.approx(31.25 ** 0.9)
    assert p.temperature(9, 0.0) == pytest.approx(3.125 ** 0.9)
    with pytest.raises(ValueError):
        PowerLaw(1.0, 0.3)
    with pytest.raises(ValueError):
        p.temperature(-1, 0.0)


def test_bang_bang_and_state_dependent(preset_solution):
    sol = preset_solution
    r = sol.params.range
    xs = np.linspace(-8, 4, 200)
    bb = BangBang(sol).temperature(0, xs)
    assert set(np.unique(bb)) <= {r.lo, r.hi}
    np.testing.assert_array_equal(bb == r.hi, sol.eval_vxx(xs) < 0)
    sd = StateDependent(sol)
    np.testing.assert_allclose(sd.temperature(0, xs), sd.noise_coeff(xs) ** 2 / 2)
    assert np.all((sd.temperature(0, xs) >= r.lo) & (sd.temperature(0, xs) <= r.hi))


def test_sampled_relaxed_distribution(preset_solution):
    sol = preset_solution
    x = 2.5
    rate = float(sol.eval_vxx(x)) / sol.params.lam
    rng = np.random.default_rng(0)
    draws = SampledRelaxed(sol).temperature(0, np.full(3000, x), rng.random(3000))
    lo, hi = sol.params.range.lo, sol.params.range.hi
    res = stats.kstest(draws, lambda u: te.cdf_array(rate, u, lo, hi))
    assert res.pvalue > 1e-3


def test_needs_solution():
    assert {n for n in POLICY_NAMES if needs_solution(n)} == {"bang-bang", "state-dependent", "sampled-relaxed"}
