"""Command-line front end.

Subcommands::

    solve-hjb      solve the HJB equation and write the solution on its grid
    run            simulate one algorithm
    compare        simulate every algorithm of a config side by side
    temp-profile   tabulate v, v'', h and h^2/2 on a user grid

Every command writes CSV files plus a JSON manifest into ``--out``.  The
manifest embeds the effective configuration, so ``--config manifest.json``
reruns the same experiment and reproduces the CSVs byte for byte.

Exit status is 0 on success, 2 for configuration or usage errors and 3
when the solver or the simulation fails.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import hjb, io, simulate
from .config import AlgorithmConfig, ConfigError, ExperimentConfig, dump_config, load_config, validate
from .objective import get_objective
from .policy import POLICY_NAMES, needs_solution

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

SOLVER_ERRORS = (hjb.NoSurvivingSolution, hjb.RootSolveError, hjb.Blowup, simulate.SimulationError)

log = logging.getLogger("langevin_hjb")


class UsageError(ConfigError):
    pass


def _pair(text: str):
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected 'v0,vx0'")
    return float(parts[0]), float(parts[1])


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration")
    g.add_argument("--config", default="paper-preset",
                   help="INI file, bundled preset name, or a manifest JSON (default: paper-preset)")
    g.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: ./out)")
    g.add_argument("--seed", type=int, help="Monte Carlo seed")
    g.add_argument("--objective", help="objective name")
    g.add_argument("--eta", type=float, help="step size for the selected algorithm(s)")
    g.add_argument("--rho", type=float, help="HJB discount rate")
    g.add_argument("--lambda", dest="lam", type=float, help="entropy weight")
    g.add_argument("--temp-lo", type=float, help="lower temperature bound")
    g.add_argument("--temp-hi", type=float, help="upper temperature bound")
    g.add_argument("--steps", type=int, help="iterations per replication")
    g.add_argument("--reps", type=int, help="number of replications")
    g.add_argument("--x0", type=float, help="starting point")
    g.add_argument("--common-noise", action=argparse.BooleanOptionalAction, default=None,
                   help="share Gaussian draws across algorithms")
    g.add_argument("--init", type=_pair, help="HJB initial condition 'v0,vx0' (skips random shooting)")
    g.add_argument("--workers", type=int, default=1, help="processes for the HJB shooting (default: 1)")
    g.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="langevin-hjb", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-hjb", help="solve the HJB equation")
    _common(p)

    p = sub.add_parser("run", help="simulate one algorithm")
    _common(p)
    p.add_argument("--algorithm", help="algorithm section name in the config")
    p.add_argument("--policy", choices=POLICY_NAMES, help="policy for an algorithm not in the config")
    p.add_argument("--beta", type=float, help="constant temperature")
    p.add_argument("--d", type=float, help="power-law scale")
    p.add_argument("--b", type=float, help="power-law exponent")
    p.add_argument("--gamma", type=float, help="replica-exchange temperature")

    p = sub.add_parser("compare", help="simulate all configured algorithms")
    _common(p)

    p = sub.add_parser("temp-profile", help="tabulate the state-dependent temperature")
    _common(p)
    p.add_argument("--solution", type=Path, help="hjb_solution.npz from solve-hjb (otherwise solve afresh)")
    p.add_argument("--grid-min", type=float, default=-8.0)
    p.add_argument("--grid-max", type=float, default=8.0)
    p.add_argument("--grid-n", type=int, default=1601, help="number of grid points (default: 1601)")
    return parser


def apply_overrides(cfg: ExperimentConfig, args: argparse.Namespace,
                    algorithms: Optional[Sequence[str]] = None) -> ExperimentConfig:
    """Fold command-line flags into ``cfg``; ``--eta`` hits ``algorithms`` (all if None)."""
    top = {}
    for flag, key in (("seed", "seed"), ("objective", "objective"), ("steps", "n_steps"),
                      ("reps", "n_reps"), ("x0", "x0"), ("common_noise", "common_noise"),
                      ("temp_lo", "temp_lo"), ("temp_hi", "temp_hi")):
        val = getattr(args, flag, None)
        if val is not None:
            top[key] = val
    cfg = replace(cfg, **top)

    h = {}
    for flag, key in (("rho", "rho"), ("lam", "lam"), ("init", "init")):
        val = getattr(args, flag, None)
        if val is not None:
            h[key] = val
    if h:
        cfg = replace(cfg, hjb=replace(cfg.hjb, **h))

    if args.eta is not None:
        cfg = replace(cfg, algorithms=tuple(
            replace(a, eta=args.eta) if algorithms is None or a.name in algorithms else a
            for a in cfg.algorithms
        ))
    validate(cfg)
    return cfg


def _select_algorithm(cfg: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    """Reduce ``cfg`` to the single algorithm that ``run`` should simulate."""
    extra = {k: getattr(args, k) for k in ("beta", "d", "b", "gamma") if getattr(args, k) is not None}
    name = args.algorithm
    if name is None and args.policy is None:
        if len(cfg.algorithms) != 1:
            raise UsageError("config has several algorithms; pick one with --algorithm or --policy")
        name = cfg.algorithms[0].name
    if name is None:
        name = args.policy
    have = {a.name: a for a in cfg.algorithms}
    if name in have:
        algo = replace(have[name], **extra)
        if args.eta is not None:
            algo = replace(algo, eta=args.eta)
        if args.policy is not None:
            algo = replace(algo, policy=args.policy)
    else:
        if args.policy is None:
            raise UsageError(f"no algorithm named {name!r}; have {sorted(have)}")
        if args.eta is None:
            raise UsageError("--eta is required for an algorithm not in the config")
        algo = AlgorithmConfig(name=name, policy=args.policy, eta=args.eta, **extra)
    cfg = replace(cfg, algorithms=(algo,))
    validate(cfg)
    return cfg


def _solve(cfg: ExperimentConfig, workers: int) -> hjb.HjbSolution:
    obj = get_objective(cfg.objective)
    t0 = time.perf_counter()
    sol = hjb.solve(obj, cfg.hjb_params(), pilot=cfg.pilot_config(), init=cfg.hjb.init, workers=workers)
    log.info("HJB solved in %.1fs on [%.4g, %.4g]", time.perf_counter() - t0, sol.lo_reached, sol.hi_reached)
    return sol


def _write_solution(out: Path, sol: hjb.HjbSolution) -> List[str]:
    io.write_solution_csv(out / "hjb_solution.csv", sol)
    io.save_solution_npz(out / "hjb_solution.npz", sol)
    return ["hjb_solution.csv", "hjb_solution.npz"]


def _simulate(cfg: ExperimentConfig, sol: Optional[hjb.HjbSolution]) -> List[simulate.RunResult]:
    results = []
    for algo in cfg.algorithms:
        t0 = time.perf_counter()
        res = simulate.run(cfg.sim_config(algo), sol)
        log.info("%s: %d steps x %d reps in %.1fs, %d excluded", algo.name, cfg.n_steps,
                 cfg.n_reps, time.perf_counter() - t0, res.n_excluded)
        results.append(res)
    return results


def _run_manifest(cfg: ExperimentConfig, results, sol, files) -> dict:
    doc = {
        "seeds": {
            "monte_carlo": cfg.seed,
            "hjb_init_seed": cfg.hjb.init_seed,
            "common_noise": cfg.common_noise,
        },
        "algorithms": [r.config.name for r in results],
        "excluded_trajectories": {r.config.name: r.n_excluded for r in results},
        "files": files,
    }
    if sol is not None:
        doc["hjb"] = io.hjb_summary(sol)
    return doc


def cmd_solve_hjb(cfg: ExperimentConfig, args) -> dict:
    sol = _solve(cfg, args.workers)
    files = _write_solution(args.out, sol)
    return {"seeds": {"hjb_init_seed": cfg.hjb.init_seed, "monte_carlo": cfg.seed},
            "hjb": io.hjb_summary(sol), "files": files}


def cmd_run(cfg: ExperimentConfig, args) -> dict:
    algo = cfg.algorithms[0]
    sol = _solve(cfg, args.workers) if needs_solution(algo.policy) else None
    files = _write_solution(args.out, sol) if sol is not None else []
    (result,) = _simulate(cfg, sol)
    io.write_stats_csv(args.out / f"{algo.name}.csv", result)
    files.append(f"{algo.name}.csv")
    return _run_manifest(cfg, [result], sol, files)


def cmd_compare(cfg: ExperimentConfig, args) -> dict:
    if len(cfg.algorithms) < 2:
        raise UsageError("compare needs at least two [algorithm.NAME] sections")
    sol = None
    if any(needs_solution(a.policy) for a in cfg.algorithms):
        sol = _solve(cfg, args.workers)
    files = _write_solution(args.out, sol) if sol is not None else []
    results = _simulate(cfg, sol)
    for r in results:
        io.write_stats_csv(args.out / f"{r.config.name}.csv", r)
        files.append(f"{r.config.name}.csv")
    io.write_comparison_csv(args.out / "comparison.csv", results)
    files.append("comparison.csv")
    return _run_manifest(cfg, results, sol, files)


def cmd_temp_profile(cfg: ExperimentConfig, args) -> dict:
    if args.grid_n < 1:
        raise UsageError("--grid-n must be >= 1")
    if args.grid_n > 1 and not args.grid_min < args.grid_max:
        raise UsageError("--grid-min must be below --grid-max")
    if args.solution is not None:
        try:
            sol = io.load_solution_npz(args.solution)
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot load solution {args.solution}: {exc}") from None
    else:
        sol = _solve(cfg, args.workers)
    xs = np.linspace(args.grid_min, args.grid_max, args.grid_n)
    io.write_profile_csv(args.out / "temperature_profile.csv", sol, xs)
    return {"hjb": io.hjb_summary(sol),
            "grid": {"min": args.grid_min, "max": args.grid_max, "n": args.grid_n},
            "solution_file": None if args.solution is None else str(args.solution),
            "files": ["temperature_profile.csv"]}


COMMANDS = {
    "solve-hjb": cmd_solve_hjb,
    "run": cmd_run,
    "compare": cmd_compare,
    "temp-profile": cmd_temp_profile,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.command == "run":
            cfg = _select_algorithm(apply_overrides(cfg, args, algorithms=()), args)
        else:
            cfg = apply_overrides(cfg, args)
        args.out.mkdir(parents=True, exist_ok=True)
        started = time.time()
        extra = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"langevin-hjb: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SOLVER_ERRORS as exc:
        print(f"langevin-hjb: solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"langevin-hjb: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    extra["started_unix"] = started
    extra["elapsed_seconds"] = round(time.time() - started, 3)
    io.write_manifest(args.out / "manifest.json", command=args.command,
                      config_ini=dump_config(cfg), extra=extra)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
