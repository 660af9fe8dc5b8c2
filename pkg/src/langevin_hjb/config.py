"""Experiment configuration: INI parsing, serialisation and presets.

Layout::

    [experiment]      objective, x0, n_steps, n_reps, seed, common_noise
    [temperature]     lo, hi
    [hjb]             rho, lambda, x_min, x_max, step, n_inits, init_seed,
                      blowup_threshold, on_blowup, init (optional "v0, vx0"),
                      pilot_reps, pilot_steps
    [algorithm.NAME]  policy, eta, and beta | d, b | gamma as the policy needs

Floats are written with ``repr`` so ``parse(dump(cfg)) == cfg``.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Dict, List, Optional, Tuple

from .hjb import HjbParams
from .objective import available_objectives
from .policy import POLICY_NAMES, needs_solution
from .simulate import SimConfig, SimulationError, build_policy
from .truncexp import TemperatureRange

__all__ = [
    "ConfigError",
    "AlgorithmConfig",
    "HjbConfig",
    "ExperimentConfig",
    "parse_config",
    "dump_config",
    "load_config",
    "PRESETS",
]

PRESETS = ("paper-preset",)
_ALGO_PREFIX = "algorithm."


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AlgorithmConfig:
    name: str
    policy: str
    eta: float
    beta: Optional[float] = None
    d: Optional[float] = None
    b: Optional[float] = None
    gamma: Optional[float] = None


@dataclass(frozen=True)
class HjbConfig:
    rho: float = 1.25
    lam: float = 0.3125
    x_min: float = -8.0
    x_max: float = 8.0
    step: float = 1e-3
    n_inits: int = 20
    init_seed: int = 0
    blowup_threshold: float = 1e8
    on_blowup: str = "truncate"
    init: Optional[Tuple[float, float]] = None
    pilot_reps: int = 50
    pilot_steps: int = 200


@dataclass(frozen=True)
class ExperimentConfig:
    objective: str = "double-well"
    x0: float = -3.0
    n_steps: int = 500
    n_reps: int = 500
    seed: int = 0
    common_noise: bool = False
    temp_lo: float = 1e-4
    temp_hi: float = 500.0
    hjb: HjbConfig = field(default_factory=HjbConfig)
    algorithms: Tuple[AlgorithmConfig, ...] = ()

    @property
    def temp_range(self) -> TemperatureRange:
        return TemperatureRange(self.temp_lo, self.temp_hi)

    def hjb_params(self) -> HjbParams:
        h = self.hjb
        return HjbParams(
            rho=h.rho,
            lam=h.lam,
            range=self.temp_range,
            x_min=h.x_min,
            x_max=h.x_max,
            step=h.step,
            n_inits=h.n_inits,
            init_seed=h.init_seed,
            blowup_threshold=h.blowup_threshold,
            on_blowup=h.on_blowup,
        )

    def algorithm(self, name: str) -> AlgorithmConfig:
        for a in self.algorithms:
            if a.name == name:
                return a
        raise ConfigError(f"no algorithm named {name!r}; have {[a.name for a in self.algorithms]}")

    def sim_config(self, algo: AlgorithmConfig) -> SimConfig:
        return SimConfig(
            policy=algo.policy,
            eta=algo.eta,
            n_steps=self.n_steps,
            n_reps=self.n_reps,
            x0=self.x0,
            seed=self.seed,
            objective=self.objective,
            beta=algo.beta,
            d=algo.d,
            b=algo.b,
            replica_gamma=algo.gamma,
            common_noise=self.common_noise,
            label=algo.name,
        )

    def pilot_config(self) -> SimConfig:
        etas = [a.eta for a in self.algorithms if a.policy == "state-dependent"]
        return SimConfig(
            policy="state-dependent",
            eta=etas[0] if etas else 0.125,
            n_steps=self.hjb.pilot_steps,
            n_reps=self.hjb.pilot_reps,
            x0=self.x0,
            seed=self.seed,
            objective=self.objective,
            label="pilot",
        )


def _get(sec, key, conv, default=None, required=False):
    if key not in sec:
        if required:
            raise ConfigError(f"[{sec.name}] missing required key {key!r}")
        return default
    raw = sec[key].strip()
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"[{sec.name}] {key} = {raw!r}: {exc}") from None


def _bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _pair(raw: str) -> Tuple[float, float]:
    parts = [p for p in raw.replace(",", " ").split() if p]
    if len(parts) != 2:
        raise ValueError("expected two numbers 'v0, vx0'")
    return float(parts[0]), float(parts[1])


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    known = {"experiment", "temperature", "hjb"}
    for name in cp.sections():
        if name not in known and not name.startswith(_ALGO_PREFIX):
            raise ConfigError(f"unknown section [{name}]")

    cfg = ExperimentConfig()
    if cp.has_section("experiment"):
        s = cp["experiment"]
        cfg = replace(
            cfg,
            objective=_get(s, "objective", str, cfg.objective),
            x0=_get(s, "x0", float, cfg.x0),
            n_steps=_get(s, "n_steps", int, cfg.n_steps),
            n_reps=_get(s, "n_reps", int, cfg.n_reps),
            seed=_get(s, "seed", int, cfg.seed),
            common_noise=_get(s, "common_noise", _bool, cfg.common_noise),
        )
    if cp.has_section("temperature"):
        s = cp["temperature"]
        cfg = replace(cfg, temp_lo=_get(s, "lo", float, cfg.temp_lo), temp_hi=_get(s, "hi", float, cfg.temp_hi))
    if cp.has_section("hjb"):
        s = cp["hjb"]
        d = HjbConfig()
        cfg = replace(
            cfg,
            hjb=HjbConfig(
                rho=_get(s, "rho", float, d.rho),
                lam=_get(s, "lambda", float, d.lam),
                x_min=_get(s, "x_min", float, d.x_min),
                x_max=_get(s, "x_max", float, d.x_max),
                step=_get(s, "step", float, d.step),
                n_inits=_get(s, "n_inits", int, d.n_inits),
                init_seed=_get(s, "init_seed", int, d.init_seed),
                blowup_threshold=_get(s, "blowup_threshold", float, d.blowup_threshold),
                on_blowup=_get(s, "on_blowup", str, d.on_blowup),
                init=_get(s, "init", _pair, None),
                pilot_reps=_get(s, "pilot_reps", int, d.pilot_reps),
                pilot_steps=_get(s, "pilot_steps", int, d.pilot_steps),
            ),
        )
    algos: List[AlgorithmConfig] = []
    for name in cp.sections():
        if not name.startswith(_ALGO_PREFIX):
            continue
        s = cp[name]
        algos.append(
            AlgorithmConfig(
                name=name[len(_ALGO_PREFIX):],
                policy=_get(s, "policy", str, required=True),
                eta=_get(s, "eta", float, required=True),
                beta=_get(s, "beta", float),
                d=_get(s, "d", float),
                b=_get(s, "b", float),
                gamma=_get(s, "gamma", float),
            )
        )
    cfg = replace(cfg, algorithms=tuple(algos))
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.objective not in available_objectives():
        raise ConfigError(f"unknown objective {cfg.objective!r}")
    try:
        cfg.temp_range
        cfg.hjb_params()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.n_steps < 1 or cfg.n_reps < 1:
        raise ConfigError("n_steps and n_reps must be >= 1")
    if cfg.hjb.pilot_reps < 1 or cfg.hjb.pilot_steps < 1:
        raise ConfigError("pilot_reps and pilot_steps must be >= 1")
    names = [a.name for a in cfg.algorithms]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate algorithm names")
    need = {"constant": ("beta",), "power-law": ("d", "b"), "replica-exchange": ("gamma",)}
    for a in cfg.algorithms:
        if a.policy not in POLICY_NAMES:
            raise ConfigError(f"[{_ALGO_PREFIX}{a.name}] unknown policy {a.policy!r}")
        if not a.eta > 0:
            raise ConfigError(f"[{_ALGO_PREFIX}{a.name}] eta must be positive")
        for key in need.get(a.policy, ()):
            if getattr(a, key) is None:
                raise ConfigError(f"[{_ALGO_PREFIX}{a.name}] policy {a.policy} needs {key}")
        try:
            sim = cfg.sim_config(a)
            if not needs_solution(a.policy):
                build_policy(sim)
        except (ValueError, SimulationError) as exc:
            raise ConfigError(f"[{_ALGO_PREFIX}{a.name}] {exc}") from None


def dump_config(cfg: ExperimentConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp["experiment"] = {
        "objective": cfg.objective,
        "x0": repr(cfg.x0),
        "n_steps": str(cfg.n_steps),
        "n_reps": str(cfg.n_reps),
        "seed": str(cfg.seed),
        "common_noise": "true" if cfg.common_noise else "false",
    }
    cp["temperature"] = {"lo": repr(cfg.temp_lo), "hi": repr(cfg.temp_hi)}
    h = cfg.hjb
    hsec = {
        "rho": repr(h.rho),
        "lambda": repr(h.lam),
        "x_min": repr(h.x_min),
        "x_max": repr(h.x_max),
        "step": repr(h.step),
        "n_inits": str(h.n_inits),
        "init_seed": str(h.init_seed),
        "blowup_threshold": repr(h.blowup_threshold),
        "on_blowup": h.on_blowup,
        "pilot_reps": str(h.pilot_reps),
        "pilot_steps": str(h.pilot_steps),
    }
    if h.init is not None:
        hsec["init"] = f"{h.init[0]!r}, {h.init[1]!r}"
    cp["hjb"] = hsec
    for a in cfg.algorithms:
        sec: Dict[str, str] = {"policy": a.policy, "eta": repr(a.eta)}
        for key in ("beta", "d", "b", "gamma"):
            val = getattr(a, key)
            if val is not None:
                sec[key] = repr(val)
        cp[_ALGO_PREFIX + a.name] = sec
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}")
    return resources.files("langevin_hjb.presets").joinpath(f"{name}.ini").read_text()


def load_config(path_or_preset: str) -> ExperimentConfig:
    """Read a config file, a bundled preset name, or a run manifest."""
    import json
    from pathlib import Path

    if path_or_preset in PRESETS:
        return parse_config(preset_text(path_or_preset))
    path = Path(path_or_preset)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if path.suffix == ".json":
        try:
            text = json.loads(text)["config_ini"]
        except (ValueError, KeyError, TypeError):
            raise ConfigError(f"{path} is not a run manifest") from None
    return parse_config(text)
