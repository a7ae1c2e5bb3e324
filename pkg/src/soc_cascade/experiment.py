"""Replicated, parameter-swept simulation campaigns.

A campaign is the cross product grid-points x attack-plans x replicates.
Each run's seed is a SplitMix64 chain over (master_seed, point index,
replicate index), so adding replicates or reordering execution never
perturbs existing runs; runs execute on a bounded thread pool (capped by
SOC_CASCADE_THREADS) and results are assembled in grid order, making the
output byte-identical at any worker count.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .accel import worker_count
from .attack import AttackPlan
from .graph import SupplyNetwork
from .rc import RcConfig, rc_run
from .rng import key_hash
from .rt import RtConfig, rt_run
from .trace import SimTrace

STD_CONVENTION = "population"  # divide by N, not N-1


class ExperimentError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    model: str  # "rc" | "rt"
    base_config: RcConfig | RtConfig
    grid: dict[str, list]
    plans: list[AttackPlan]
    replicates: int
    master_seed: int = 0

    def __post_init__(self):
        if self.model not in ("rc", "rt"):
            raise ExperimentError(f"model must be 'rc' or 'rt', got {self.model!r}")
        if self.replicates < 1:
            raise ExperimentError("replicates must be a positive integer")
        if not self.grid:
            raise ExperimentError("grid must name at least one parameter")
        if not self.plans:
            raise ExperimentError("at least one attack plan is required")
        valid = {f.name for f in dataclasses.fields(self.base_config)}
        for key in self.grid:
            if key not in valid:
                raise ExperimentError(
                    f"grid key {key!r} is not a config field (one of {sorted(valid)})"
                )
            if not self.grid[key]:
                raise ExperimentError(f"grid key {key!r} has no values")

    def points(self) -> list[dict]:
        """Grid points in deterministic (sorted-key, row-major) order."""
        keys = sorted(self.grid)
        return [
            dict(zip(keys, combo))
            for combo in itertools.product(*(self.grid[k] for k in keys))
        ]

    def replicate_seed(self, point_idx: int, rep_idx: int) -> int:
        return key_hash(self.master_seed, point_idx, rep_idx)

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": self.model,
                "base_config": json.loads(self.base_config.to_json()),
                "grid": self.grid,
                "plans": [json.loads(p.to_json()) for p in self.plans],
                "replicates": self.replicates,
                "master_seed": self.master_seed,
                "std_convention": STD_CONVENTION,
                "seed_derivation": "splitmix64(master_seed, point, replicate)",
            },
            sort_keys=True,
            indent=1,
        ) + "\n"


@dataclass
class RunResult:
    point_idx: int
    plan_idx: int
    rep_idx: int
    params: dict
    seed: int
    trace: SimTrace | None
    error: str | None = None


def _single_run(net, spec: ExperimentSpec, point_idx, plan_idx, rep_idx) -> RunResult:
    params = spec.points()[point_idx]
    seed = spec.replicate_seed(point_idx, rep_idx)
    plan = spec.plans[plan_idx]
    try:
        cfg = dataclasses.replace(spec.base_config, **params)
        if spec.model == "rt":
            cfg = dataclasses.replace(cfg, rng_seed=seed)
            trace = rt_run(net, cfg, plan)
        else:
            trace = rc_run(net, cfg, plan)
        return RunResult(point_idx, plan_idx, rep_idx, params, seed, trace)
    except Exception as exc:  # individual failures are recorded, not fatal
        return RunResult(point_idx, plan_idx, rep_idx, params, seed, None, str(exc))


def run_experiment(net: SupplyNetwork, spec: ExperimentSpec) -> list[RunResult]:
    """Execute the full campaign; order of the result list is canonical."""
    points = spec.points()
    jobs = [
        (pi, li, ri)
        for pi in range(len(points))
        for li in range(len(spec.plans))
        for ri in range(spec.replicates)
    ]
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(
            pool.map(lambda j: _single_run(net, spec, *j), jobs)
        )
    return results


def _mean(vals):
    return sum(vals) / len(vals)


def _std(vals):
    mu = _mean(vals)
    return math.sqrt(sum((v - mu) ** 2 for v in vals) / len(vals))


@dataclass
class PointSummary:
    point_idx: int
    plan_idx: int
    params: dict
    n_runs: int
    mean_terminal: float | None
    std_terminal: float | None
    min_terminal: float | None
    max_terminal: float | None
    mean_t_half: float | None
    std_t_half: float | None
    min_t_half: float | None
    max_t_half: float | None
    n_never: int
    missing: bool = False


def summarize(results: list[RunResult], spec: ExperimentSpec) -> list[PointSummary]:
    """Per (grid point, plan) statistics of terminal ratio and time-to-half.

    Runs that never reach half-failed are excluded from the time statistics
    and counted in ``n_never``; points where every run failed are marked
    missing.
    """
    groups: dict[tuple[int, int], list[RunResult]] = {}
    for r in results:
        groups.setdefault((r.point_idx, r.plan_idx), []).append(r)
    out = []
    for (pi, li) in sorted(groups):
        rs = [r for r in groups[(pi, li)] if r.trace is not None]
        params = groups[(pi, li)][0].params
        if not rs:
            out.append(
                PointSummary(pi, li, params, 0, None, None, None, None,
                             None, None, None, None, 0, missing=True)
            )
            continue
        terms = [r.trace.terminal_affected for r in rs]
        halves = [r.trace.time_to_half() for r in rs]
        reached = [h for h in halves if h is not None]
        out.append(
            PointSummary(
                point_idx=pi,
                plan_idx=li,
                params=params,
                n_runs=len(rs),
                mean_terminal=_mean(terms),
                std_terminal=_std(terms),
                min_terminal=min(terms),
                max_terminal=max(terms),
                mean_t_half=_mean(reached) if reached else None,
                std_t_half=_std(reached) if reached else None,
                min_t_half=min(reached) if reached else None,
                max_t_half=max(reached) if reached else None,
                n_never=len(halves) - len(reached),
            )
        )
    return out


def summary_csv(summaries: list[PointSummary], spec: ExperimentSpec) -> str:
    lines = ["point,param_values,plan,mean_terminal,std_terminal,mean_t_half,n_never"]
    for s in summaries:
        params = ";".join(f"{k}={s.params[k]!r}" for k in sorted(s.params))
        plan = spec.plans[s.plan_idx].strategy
        if s.missing:
            lines.append(f"{s.point_idx},{params},{plan},missing,missing,missing,0")
            continue
        t_half = "never" if s.mean_t_half is None else repr(s.mean_t_half)
        lines.append(
            f"{s.point_idx},{params},{plan},{s.mean_terminal!r},"
            f"{s.std_terminal!r},{t_half},{s.n_never}"
        )
    return "\n".join(lines) + "\n"


def write_results(
    out_dir: Path, spec: ExperimentSpec, results: list[RunResult]
) -> list[PointSummary]:
    """Lay out spec.json, runs/<point>/<replicate>/trace.csv, summary.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "spec.json").write_text(spec.to_json(), encoding="utf-8")
    for r in results:
        run_dir = out_dir / "runs" / f"point-{r.point_idx:03d}-plan-{r.plan_idx}" / f"rep-{r.rep_idx:03d}"
        run_dir.mkdir(parents=True, exist_ok=True)
        meta = {
            "params": r.params,
            "plan": json.loads(spec.plans[r.plan_idx].to_json()),
            "seed": r.seed,
            "error": r.error,
        }
        (run_dir / "run.json").write_text(
            json.dumps(meta, sort_keys=True, indent=1) + "\n", encoding="utf-8"
        )
        if r.trace is not None:
            (run_dir / "trace.csv").write_text(r.trace.to_csv(), encoding="utf-8")
    summaries = summarize(results, spec)
    (out_dir / "summary.csv").write_text(summary_csv(summaries, spec), encoding="utf-8")
    return summaries
