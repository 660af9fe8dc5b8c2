import pytest
from hypothesis import given, settings, strategies as st
from dataclasses import replace

from langevin_hjb.config import (
    PRESETS,
    AlgorithmConfig,
    ConfigError,
    dump_config,
    load_config,
    parse_config,
)


def test_preset_values():
    cfg = load_config("paper-preset")
    assert "paper-preset" in PRESETS
    assert (cfg.x0, cfg.n_steps, cfg.n_reps, cfg.temp_lo, cfg.temp_hi) == (-3.0, 500, 500, 1e-4, 500.0)
    assert (cfg.hjb.rho, cfg.hjb.lam, cfg.hjb.init) == (1.25, 0.3125, (-0.2853, 1.1575))
    algos = {a.name: a for a in cfg.algorithms}
    assert algos["constant"].eta == 0.5 and algos["constant"].beta == pytest.approx(0.4883, abs=1e-4)
    assert (algos["power-law"].d, algos["power-law"].b) == (31.25, 0.9)
    assert algos["replica-exchange"].gamma == 250.0
    assert algos["state-dependent"].eta == 0.125
    assert not cfg.common_noise


def test_round_trip_preset():
    cfg = load_config("paper-preset")
    assert parse_config(dump_config(cfg)) == cfg


@settings(max_examples=50)
@given(
    x0=st.floats(-50, 50, allow_nan=False),
    seed=st.integers(0, 2**63),
    eta=st.floats(1e-6, 2.0),
    beta=st.floats(0.0, 1e3),
    common=st.booleans(),
)
def test_round_trip_random(x0, seed, eta, beta, common):
    base = load_config("paper-preset")
    cfg = replace(
        base,
        x0=x0,
        seed=seed,
        common_noise=common,
        algorithms=base.algorithms + (AlgorithmConfig("extra", "constant", eta, beta=beta),),
    )
    assert parse_config(dump_config(cfg)) == cfg


@pytest.mark.parametrize(
    "text",
    [
        "[bogus]\nx = 1\n",
        "[algorithm.a]\neta = 0.1\n",
        "[algorithm.a]\npolicy = constant\neta = 0.1\n",
        "[algorithm.a]\npolicy = warp\neta = 0.1\n",
        "[algorithm.a]\npolicy = power-law\neta = 0.1\nd = 1\nb = 2\n",
        "[experiment]\nn_reps = many\n",
        "[experiment]\nobjective = nope\n",
        "[temperature]\nlo = 0\n",
        "[hjb]\nstep = 0.3\n",
        "[hjb]\ninit = 1\n",
    ],
)
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.ini"))
    bad = tmp_path / "m.json"
    bad.write_text("{}")
    with pytest.raises(ConfigError):
        load_config(str(bad))
