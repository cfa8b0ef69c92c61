"""Benchmark harness: scenario files in, per-run CSV and summary JSON out.

Each run is an isolated, seeded planner execution (seed = seed base + run
index), so any subset of runs reproduces the same per-run results. Failed or
crashed runs become failure rows. Summary statistics censor failures at the
scenario time limit, matching the box-plot convention of capping runtimes at
the threshold.
"""

from __future__ import annotations

import csv
import json
import os
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .diversity import Path, write_path_file
from .library import PathLibrary
from .mesh import TriMesh, load_mesh
from .planner import PlannerParams, rrt_connect_plan, rrt_ir_plan, rrt_plan
from .se3 import Configuration, SampleBounds
from .align import icp_with_guess, transform_paths

CSV_HEADER = ("scenario", "planner", "run", "seed", "success", "time_s",
              "setup_s", "iterations", "path_len", "waypoints")
PLANNERS = ("rrt", "rrt_connect", "rrt_lib")
SEED_ENV_VAR = "PATHLIB_SEED"


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    env_mesh: str
    query_mesh: str
    start: Configuration
    goal: Configuration
    planners: tuple[str, ...]
    runs: int
    time_limit: float
    seed_base: int = 0
    params: dict | None = None
    library: str | None = None
    env_id: str | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.time_limit <= 0.0:
            raise ValueError("time_limit must be positive")
        unknown = set(self.planners) - set(PLANNERS)
        if unknown:
            raise ValueError(f"unknown planners: {sorted(unknown)}")
        if "rrt_lib" in self.planners and not self.library:
            raise ValueError("rrt_lib scenarios need a library file")


@dataclass(frozen=True)
class RunResult:
    scenario: str
    planner: str
    run: int
    seed: int
    success: bool
    time_s: float
    setup_s: float
    iterations: int
    path_len: float
    waypoints: int

    def as_row(self) -> list:
        return [self.scenario, self.planner, self.run, self.seed,
                int(self.success), repr(self.time_s), repr(self.setup_s),
                self.iterations, repr(self.path_len), self.waypoints]


def load_scenarios(path: str) -> list[Scenario]:
    """Parse a scenario JSON file; mesh/library paths resolve relative to it."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    entries = doc["scenarios"] if isinstance(doc, dict) else doc
    base_dir = os.path.dirname(os.path.abspath(path))

    def _resolve(p: str | None) -> str | None:
        if p is None or os.path.isabs(p):
            return p
        return os.path.join(base_dir, p)

    out = []
    for e in entries:
        planners = e.get("planners") or [e["planner"]]
        out.append(Scenario(
            scenario_id=e["id"],
            env_mesh=_resolve(e["env_mesh"]),
            query_mesh=_resolve(e["query_mesh"]),
            start=Configuration.from_array(np.asarray(e["start"], dtype=np.float64)),
            goal=Configuration.from_array(np.asarray(e["goal"], dtype=np.float64)),
            planners=tuple(planners),
            runs=int(e["runs"]),
            time_limit=float(e["time_limit"]),
            seed_base=int(e.get("seed_base", 0)),
            params=e.get("params"),
            library=_resolve(e.get("library")),
            env_id=e.get("env_id"),
        ))
    return out


@lru_cache(maxsize=64)
def _mesh(path: str) -> TriMesh:
    return load_mesh(path)


@lru_cache(maxsize=8)
def _library(path: str) -> PathLibrary:
    return PathLibrary.load(path)


def _planner_params(scenario: Scenario, seed: int, max_time: float) -> PlannerParams:
    overrides = dict(scenario.params or {})
    bounds = overrides.pop("bounds", None)
    if bounds is not None:
        bounds = SampleBounds(np.asarray(bounds[0], dtype=np.float64),
                              np.asarray(bounds[1], dtype=np.float64))
    return PlannerParams(seed=seed, max_time=max_time, bounds=bounds,
                         **overrides)


def seed_base_for(scenario: Scenario) -> int:
    env = os.environ.get(SEED_ENV_VAR)
    return int(env) if env else scenario.seed_base


def run_single(scenario: Scenario, planner: str, run_idx: int,
               paths_dir: str | None = None) -> RunResult:
    """One isolated planner execution; crashes become failure rows."""
    seed = seed_base_for(scenario) + run_idx
    t0 = time.perf_counter()
    setup_s = 0.0
    try:
        obj = _mesh(scenario.query_mesh)
        env = _mesh(scenario.env_mesh)
        guides: tuple[Path, ...] = ()
        if planner == "rrt_lib":
            lib = _library(scenario.library)
            env_id = scenario.env_id or ""
            record, corr = lib.query(obj, env_id)
            icp = icp_with_guess(obj, record.mesh, corr)
            guides = tuple(transform_paths(record.paths, icp.transform))
            setup_s = time.perf_counter() - t0
        budget = max(0.01, scenario.time_limit - (time.perf_counter() - t0))
        params = _planner_params(scenario, seed, budget)
        if planner == "rrt":
            result = rrt_plan(obj, env, scenario.start, scenario.goal, params)
        elif planner == "rrt_connect":
            result = rrt_connect_plan(obj, env, scenario.start, scenario.goal,
                                      params)
        elif planner == "rrt_lib":
            result = rrt_ir_plan(obj, env, scenario.start, scenario.goal,
                                 guides=guides, inhibited=(), params=params)
        else:
            raise ValueError(f"unknown planner {planner!r}")
        if result.success and paths_dir is not None:
            name = f"{scenario.scenario_id}_{planner}_{run_idx}.path.csv"
            write_path_file(os.path.join(paths_dir, name), result.path)
        return RunResult(
            scenario=scenario.scenario_id, planner=planner, run=run_idx,
            seed=seed, success=result.success,
            time_s=time.perf_counter() - t0, setup_s=setup_s,
            iterations=result.iterations, path_len=result.path_len,
            waypoints=result.waypoints)
    except Exception:
        traceback.print_exc()
        return RunResult(
            scenario=scenario.scenario_id, planner=planner, run=run_idx,
            seed=seed, success=False, time_s=time.perf_counter() - t0,
            setup_s=setup_s, iterations=0, path_len=0.0, waypoints=0)


def _run_job(args) -> RunResult:
    return run_single(*args)


def run_benchmark(scenarios: list[Scenario], out_dir: str,
                  jobs: int = 1) -> tuple[str, str]:
    """Execute every scenario x planner x run; write results.csv + summary.json."""
    os.makedirs(out_dir, exist_ok=True)
    paths_dir = os.path.join(out_dir, "paths")
    os.makedirs(paths_dir, exist_ok=True)
    jobs_list = [(s, planner, run, paths_dir)
                 for s in scenarios
                 for planner in s.planners
                 for run in range(s.runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_job, jobs_list, chunksize=1))
    else:
        rows = [run_single(*job) for job in jobs_list]

    csv_path = os.path.join(out_dir, "results.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow(r.as_row())

    summary = summarize(rows, {s.scenario_id: s.time_limit for s in scenarios})
    summary_path = os.path.join(out_dir, "summary.json")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1)
        fh.write("\n")
    return csv_path, summary_path


def summarize(rows: list[RunResult],
              time_limits: dict[str, float]) -> dict:
    """Per (scenario, planner): success rate and censored runtime quartiles.

    Failures contribute the scenario time limit, successes their actual
    time, so the statistics match runtime plots capped at the threshold.
    """
    groups: dict[tuple[str, str], list[RunResult]] = {}
    for r in rows:
        groups.setdefault((r.scenario, r.planner), []).append(r)
    out: dict[str, dict] = {}
    for (scenario, planner), members in sorted(groups.items()):
        limit = time_limits[scenario]
        times = np.asarray([r.time_s if r.success else limit for r in members])
        q1, med, q3 = (float(v) for v in np.percentile(times, [25, 50, 75]))
        out.setdefault(scenario, {})[planner] = {
            "runs": len(members),
            "successes": sum(r.success for r in members),
            "success_rate": sum(r.success for r in members) / len(members),
            "time_q1_s": q1,
            "time_median_s": med,
            "time_q3_s": q3,
        }
    return out


def read_results_csv(path: str) -> list[RunResult]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(CSV_HEADER):
            raise ValueError(f"unexpected CSV header: {reader.fieldnames}")
        return [RunResult(
            scenario=row["scenario"], planner=row["planner"],
            run=int(row["run"]), seed=int(row["seed"]),
            success=bool(int(row["success"])), time_s=float(row["time_s"]),
            setup_s=float(row["setup_s"]), iterations=int(row["iterations"]),
            path_len=float(row["path_len"]), waypoints=int(row["waypoints"]),
        ) for row in reader]
