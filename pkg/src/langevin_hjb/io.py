"""CSV and manifest persistence.

Numbers are written with ``%.12g`` in a fixed column order so identical
runs produce identical bytes.  Manifests are JSON and embed the full INI
text of the configuration, which is enough to rerun the experiment.
"""

from __future__ import annotations

import json
import math
import platform
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence

import numpy as np

from . import __version__
from .hjb import HjbParams, HjbSolution
from .simulate import RunResult
from .truncexp import TemperatureRange

STATS_COLUMNS = ("k", "mean_f", "std_err", "min_f", "max_f")


def fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.12g" % value


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_stats_csv(path: Path, result: RunResult) -> None:
    write_rows(
        path,
        STATS_COLUMNS,
        ((s.k, s.mean_f, s.std_err, s.min_f, s.max_f) for s in result.stats),
    )


def write_comparison_csv(path: Path, results: Sequence[RunResult]) -> None:
    n = len(results[0].stats)
    if any(len(r.stats) != n for r in results):
        raise ValueError("all runs must have the same number of iterations")
    header = ["k"]
    for r in results:
        header += [f"{r.config.name}_mean_f", f"{r.config.name}_std_err"]
    rows = []
    for i in range(n):
        row: List = [results[0].stats[i].k]
        for r in results:
            row += [r.stats[i].mean_f, r.stats[i].std_err]
        rows.append(row)
    write_rows(path, header, rows)


def solution_rows(sol: HjbSolution, xs=None):
    if xs is None:
        xs, v, vx, vxx = sol.nodes, sol.v, sol.vx, sol.vxx
    else:
        xs = np.asarray(xs, dtype=float)
        v, vx, vxx = sol.eval_v(xs), sol.eval_vx(xs), sol.eval_vxx(xs)
    h = sol.eval_h(xs)
    return xs, v, vx, vxx, h, 0.5 * h * h


def write_solution_csv(path: Path, sol: HjbSolution) -> None:
    xs, v, vx, vxx, h, temp = solution_rows(sol)
    write_rows(path, ("x", "v", "vx", "vxx", "h", "temperature"), zip(xs, v, vx, vxx, h, temp))


def write_profile_csv(path: Path, sol: HjbSolution, xs) -> None:
    xs, v, _, vxx, h, temp = solution_rows(sol, xs)
    write_rows(path, ("x", "v", "vxx", "h", "temperature"), zip(xs, v, vxx, h, temp))


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def hjb_summary(sol: HjbSolution) -> Dict:
    return {
        "init": list(sol.init),
        "pilot_score": sol.pilot_score,
        "truncated": sol.truncated,
        "domain_reached": [sol.lo_reached, sol.hi_reached],
        "selection_rule": "lowest mean f at the final iteration of a state-dependent pilot run",
        "params": {
            **{k: v for k, v in asdict(sol.params).items() if k != "range"},
            "temp_lo": sol.params.range.lo,
            "temp_hi": sol.params.range.hi,
        },
    }


def write_manifest(path: Path, *, command: str, config_ini: str, extra: Mapping) -> None:
    doc = {
        "tool": "langevin-hjb",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "command": command,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config_ini": config_ini,
        **extra,
    }
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n")


def save_solution_npz(path: Path, sol: HjbSolution) -> None:
    p = sol.params
    np.savez(
        path,
        nodes=sol.nodes,
        v=sol.v,
        vx=sol.vx,
        vxx=sol.vxx,
        init=np.array(sol.init),
        pilot_score=np.array(sol.pilot_score),
        truncated=np.array(sol.truncated),
        scalars=np.array([p.rho, p.lam, p.range.lo, p.range.hi, p.x_min, p.x_max, p.step, p.blowup_threshold]),
        ints=np.array([p.n_inits, p.init_seed]),
        on_blowup=np.array(p.on_blowup),
    )


def load_solution_npz(path: Path) -> HjbSolution:
    with np.load(path) as z:
        rho, lam, lo, hi, x_min, x_max, step, cap = (float(q) for q in z["scalars"])
        n_inits, init_seed = (int(q) for q in z["ints"])
        params = HjbParams(
            rho=rho,
            lam=lam,
            range=TemperatureRange(lo, hi),
            x_min=x_min,
            x_max=x_max,
            step=step,
            n_inits=n_inits,
            init_seed=init_seed,
            blowup_threshold=cap,
            on_blowup=str(z["on_blowup"]),
        )
        return HjbSolution(
            params=params,
            nodes=z["nodes"].copy(),
            v=z["v"].copy(),
            vx=z["vx"].copy(),
            vxx=z["vxx"].copy(),
            init=tuple(float(q) for q in z["init"]),
            pilot_score=float(z["pilot_score"]),
            truncated=bool(z["truncated"]),
        )
