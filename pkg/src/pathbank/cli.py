"""Command-line front end: build libraries, answer queries, run benchmarks.

Exit codes: 0 on full success, 1 when some work failed (a prepare record
errored, or a plan found no path), 2 for bad arguments or unreadable inputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import bench as bench_mod
from .align import icp_with_guess, transform_paths
from .diversity import Path, path_length, write_path_file
from .library import (DEFAULT_D_MIN, DEFAULT_PATIENCE, DEFAULT_PREPARE_BUDGET_S,
                      DEFAULT_SCALE_FACTOR, LibraryError, PathLibrary,
                      PreparationError, prepare)
from .mesh import MeshLoadError, load_mesh
from .planner import PlannerParams, rrt_ir_plan, rrt_plan
from .se3 import Configuration, SampleBounds


def _configuration(text: str) -> Configuration:
    parts = text.split(",")
    if len(parts) != 7:
        raise argparse.ArgumentTypeError(
            "expected 7 comma-separated values: x,y,z,qw,qx,qy,qz")
    return Configuration.from_array(np.asarray([float(p) for p in parts]))


def _params_from_dict(overrides: dict | None, **fixed) -> PlannerParams:
    kwargs = dict(overrides or {})
    bounds = kwargs.pop("bounds", None)
    if bounds is not None:
        kwargs["bounds"] = SampleBounds(np.asarray(bounds[0], dtype=np.float64),
                                        np.asarray(bounds[1], dtype=np.float64))
    kwargs.update(fixed)
    return PlannerParams(**kwargs)


def cmd_prepare(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        config = json.load(fh)
    base_dir = os.path.dirname(os.path.abspath(args.config))

    def _resolve(p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(base_dir, p)

    env_meshes = {env_id: load_mesh(_resolve(p))
                  for env_id, p in config["environments"].items()}
    obj_meshes = {obj_id: load_mesh(_resolve(p))
                  for obj_id, p in config["objects"].items()}

    lib = PathLibrary(d_min=float(config.get("d_min", DEFAULT_D_MIN)))
    for env_id, mesh in env_meshes.items():
        lib.register_environment(env_id, mesh)

    failures = 0
    for pair in config["pairs"]:
        obj_id, env_id = pair["object"], pair["env"]
        start = Configuration.from_array(np.asarray(pair["start"], dtype=np.float64))
        goal = Configuration.from_array(np.asarray(pair["goal"], dtype=np.float64))
        params = _params_from_dict({**config.get("params", {}),
                                    **pair.get("params", {})})
        t0 = time.perf_counter()
        try:
            record = prepare(
                obj_meshes[obj_id], env_meshes[env_id], start, goal,
                object_id=obj_id, env_id=env_id, params=params,
                d_min=float(pair.get("d_min", config.get("d_min", DEFAULT_D_MIN))),
                n_patience=int(pair.get("n_patience",
                                        config.get("n_patience", DEFAULT_PATIENCE))),
                scale_factor=float(pair.get("scale_factor",
                                            config.get("scale_factor",
                                                       DEFAULT_SCALE_FACTOR))),
                budget_s=float(pair.get("budget_s",
                                        config.get("budget_s",
                                                   DEFAULT_PREPARE_BUDGET_S))))
        except (PreparationError, ValueError, KeyError) as exc:
            failures += 1
            print(f"record {obj_id} x {env_id}: FAILED ({exc})", file=sys.stderr)
            continue
        lib.add_record(record)
        diag = record.diagnostics
        print(f"record {obj_id} x {env_id}: {len(record.paths)} paths, "
              f"{diag.trials} trials, {diag.elapsed_s:.1f} s, "
              f"terminated by {diag.terminated_by}")

    if not lib.records:
        print("prepare: no records succeeded", file=sys.stderr)
        return 1
    lib.save(args.out)
    print(f"library written to {args.out} ({len(lib.records)} records)")
    return 1 if failures else 0


def cmd_plan(args) -> int:
    lib = PathLibrary.load(args.lib)
    query = load_mesh(args.query)
    try:
        env = lib.env_mesh(args.env)
    except LookupError as exc:
        print(f"plan: {exc}", file=sys.stderr)
        return 2
    params = _params_from_dict(None, seed=args.seed, max_time=args.time_limit)

    t0 = time.perf_counter()
    guides: tuple[Path, ...] = ()
    sim_s = icp_s = 0.0
    try:
        record, corr = lib.query(query, args.env)
        sim_s = time.perf_counter() - t0
        t1 = time.perf_counter()
        icp = icp_with_guess(query, record.mesh, corr)
        guides = tuple(transform_paths(record.paths, icp.transform))
        icp_s = time.perf_counter() - t1
    except LookupError as exc:
        if args.strict:
            print(f"plan: {exc}", file=sys.stderr)
            return 2
        print(f"plan: {exc}; falling back to unguided planning",
              file=sys.stderr)

    t2 = time.perf_counter()
    if guides:
        result = rrt_ir_plan(query, env, args.start, args.goal,
                             guides=guides, inhibited=(), params=params)
    else:
        result = rrt_plan(query, env, args.start, args.goal, params)
    planning_s = time.perf_counter() - t2
    total_s = time.perf_counter() - t0

    print(f"similarity_s: {sim_s:.4f}")
    print(f"icp_s: {icp_s:.4f}")
    print(f"planning_s: {planning_s:.4f}")
    print(f"total_s: {total_s:.4f}")
    print(f"success: {result.success}")
    if not result.success:
        print("plan: no path found within the time limit", file=sys.stderr)
        return 1
    print(f"waypoints: {result.waypoints}")
    print(f"path_len: {result.path_len:.4f}")
    write_path_file(args.out, result.path)
    print(f"path written to {args.out}")
    return 0


def cmd_bench(args) -> int:
    scenarios = bench_mod.load_scenarios(args.scenarios)
    csv_path, summary_path = bench_mod.run_benchmark(
        scenarios, args.out_dir, jobs=args.jobs)
    with open(summary_path, encoding="utf-8") as fh:
        summary = json.load(fh)
    for scenario_id, planners in summary.items():
        for planner, stats in planners.items():
            print(f"{scenario_id} / {planner}: "
                  f"{stats['successes']}/{stats['runs']} ok, "
                  f"median {stats['time_median_s']:.2f} s")
    print(f"results written to {csv_path} and {summary_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathbank",
        description="SE(3) motion planning with a library of reusable paths")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="build a path library from a config file")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--out", required=True, help="output library JSON")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("plan", help="answer a planning query against a library")
    p.add_argument("--lib", required=True, help="library JSON")
    p.add_argument("--query", required=True, help="query mesh (OBJ/STL)")
    p.add_argument("--env", required=True, help="environment id in the library")
    p.add_argument("--start", required=True, type=_configuration,
                   metavar="x,y,z,qw,qx,qy,qz")
    p.add_argument("--goal", required=True, type=_configuration,
                   metavar="x,y,z,qw,qx,qy,qz")
    p.add_argument("--out", required=True, help="output waypoint file")
    p.add_argument("--strict", action="store_true",
                   help="error instead of falling back to unguided planning")
    p.add_argument("--time-limit", type=float, default=120.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("bench", help="run scenario benchmarks")
    p.add_argument("--scenarios", required=True, help="scenario JSON file")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, KeyError, ValueError, LibraryError, MeshLoadError) as exc:
        print(f"pathbank: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
