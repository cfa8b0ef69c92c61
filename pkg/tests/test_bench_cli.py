import json
import subprocess
import sys

import numpy as np
import pytest

from pathbank.bench import (CSV_HEADER, RunResult, Scenario, load_scenarios,
                            read_results_csv, run_benchmark, run_single,
                            seed_base_for, summarize)
from pathbank.cli import main
from pathbank.diversity import read_path_file
from pathbank.library import PathLibrary, prepare
from pathbank.mesh import save_obj
from pathbank.planner import PlannerParams
from pathbank.procedural import box_mesh, wall_with_windows
from pathbank.se3 import Configuration, Rotation, SampleBounds

BOUNDS_JSON = [[-2.8, -2.0, -2.2], [2.8, 2.0, 2.2]]
START = [0.0, -1.5, 0.0, 1.0, 0.0, 0.0, 0.0]
GOAL = [0.0, 1.5, 0.0, 1.0, 0.0, 0.0, 0.0]


def _cfg(arr):
    return Configuration.from_array(np.asarray(arr, dtype=np.float64))


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Meshes on disk plus a one-record library built against them."""
    root = tmp_path_factory.mktemp("bench_ws")
    wall = wall_with_windows(6.0, 5.0, 0.4, [(0.0, 0.0, 2.0, 2.0)])
    template = box_mesh((2.0, 2.0, 2.0))
    cube = box_mesh((0.8, 0.8, 0.8))
    save_obj(wall, str(root / "wall.obj"))
    save_obj(template, str(root / "template.obj"))
    save_obj(cube, str(root / "cube.obj"))

    params = PlannerParams(seed=41, max_time=5.0,
                           bounds=SampleBounds(*BOUNDS_JSON))
    record = prepare(template, wall, _cfg(START), _cfg(GOAL),
                     object_id="cube", env_id="wall", params=params,
                     d_min=50.0, n_patience=1, budget_s=30.0)
    lib = PathLibrary()
    lib.register_environment("wall", wall, str(root / "wall.obj"))
    lib.add_record(record)
    lib.save(str(root / "library.json"))
    return root


def _scenario(workspace, **overrides):
    fields = dict(
        scenario_id="window", env_mesh=str(workspace / "wall.obj"),
        query_mesh=str(workspace / "cube.obj"), start=_cfg(START),
        goal=_cfg(GOAL), planners=("rrt",), runs=2, time_limit=20.0,
        seed_base=7, params={"bounds": BOUNDS_JSON})
    fields.update(overrides)
    return Scenario(**fields)


# --- scenario files ---

def test_load_scenarios_resolves_relative_paths(tmp_path, workspace):
    doc = {"scenarios": [
        {"id": "a", "env_mesh": "wall.obj", "query_mesh": "cube.obj",
         "start": START, "goal": GOAL, "planner": "rrt", "runs": 3,
         "time_limit": 5.0},
        {"id": "b", "env_mesh": str(workspace / "wall.obj"),
         "query_mesh": str(workspace / "cube.obj"), "start": START,
         "goal": GOAL, "planners": ["rrt", "rrt_connect"], "runs": 1,
         "time_limit": 9.5, "seed_base": 3, "params": {"p_goal": 0.2}},
    ]}
    path = tmp_path / "scenarios.json"
    path.write_text(json.dumps(doc))
    a, b = load_scenarios(str(path))
    assert a.env_mesh == str(tmp_path / "wall.obj")  # relative to the file
    assert a.planners == ("rrt",) and a.runs == 3 and a.seed_base == 0
    assert b.env_mesh == str(workspace / "wall.obj")  # absolute kept as-is
    assert b.planners == ("rrt", "rrt_connect")
    assert b.time_limit == 9.5 and b.params == {"p_goal": 0.2}


def test_scenario_validation(workspace):
    with pytest.raises(ValueError, match="runs"):
        _scenario(workspace, runs=0)
    with pytest.raises(ValueError, match="time_limit"):
        _scenario(workspace, time_limit=0.0)
    with pytest.raises(ValueError, match="unknown planners"):
        _scenario(workspace, planners=("bogus",))
    with pytest.raises(ValueError, match="library"):
        _scenario(workspace, planners=("rrt_lib",))


# --- running ---

def test_run_single_is_seed_isolated(workspace):
    s = _scenario(workspace)
    first = run_single(s, "rrt", 1)
    again = run_single(s, "rrt", 1)
    assert first.seed == s.seed_base + 1
    assert first.success and again.success
    assert first.iterations == again.iterations
    assert first.path_len == again.path_len
    assert first.waypoints == again.waypoints


def test_seed_env_var_overrides_base(workspace, monkeypatch):
    s = _scenario(workspace)
    assert seed_base_for(s) == 7
    monkeypatch.setenv("PATHLIB_SEED", "100")
    assert seed_base_for(s) == 100
    r = run_single(s, "rrt", 2)
    assert r.seed == 102


def test_run_benchmark_writes_rows_and_matching_summary(tmp_path, workspace):
    s = _scenario(workspace, planners=("rrt", "rrt_connect"), runs=2)
    csv_path, summary_path = run_benchmark([s], str(tmp_path / "out"))
    rows = read_results_csv(csv_path)
    assert len(rows) == 4  # 1 scenario x 2 planners x 2 runs
    assert {(r.planner, r.run) for r in rows} == {
        ("rrt", 0), ("rrt", 1), ("rrt_connect", 0), ("rrt_connect", 1)}
    # the stored summary must be exactly recomputable from the CSV
    with open(summary_path, encoding="utf-8") as fh:
        stored = json.load(fh)
    assert summarize(rows, {"window": s.time_limit}) == stored
    # seed isolation: rerunning one cell reproduces the stored row
    row = [r for r in rows if r.planner == "rrt" and r.run == 1][0]
    solo = run_single(s, "rrt", 1)
    assert (solo.iterations, solo.path_len) == (row.iterations, row.path_len)


def test_run_benchmark_exports_waypoint_files(tmp_path, workspace):
    s = _scenario(workspace, runs=1)
    run_benchmark([s], str(tmp_path / "out"))
    exported = tmp_path / "out" / "paths" / "window_rrt_0.path.csv"
    assert exported.exists()
    p = read_path_file(str(exported))
    np.testing.assert_array_equal(p.as_array()[0], np.asarray(START))


def test_rrt_lib_runs_use_library_guides(workspace):
    s = _scenario(workspace, planners=("rrt_lib",),
                  library=str(workspace / "library.json"), env_id="wall")
    r = run_single(s, "rrt_lib", 0)
    assert r.success
    assert r.setup_s > 0.0


def test_crashing_run_becomes_failure_row(tmp_path, workspace, capsys):
    s = _scenario(workspace, query_mesh=str(tmp_path / "missing.obj"), runs=1)
    r = run_single(s, "rrt", 0)
    assert not r.success and r.iterations == 0 and r.waypoints == 0


# --- summaries ---

def _row(planner, run, success, time_s):
    return RunResult("s", planner, run, run, success, time_s, 0.0,
                     10, 1.0 if success else 0.0, 3 if success else 0)


def test_summarize_censors_failures_at_limit():
    rows = [_row("rrt", 0, True, 1.0), _row("rrt", 1, True, 2.0),
            _row("rrt", 2, False, 0.3)]
    out = summarize(rows, {"s": 10.0})
    stats = out["s"]["rrt"]
    assert stats["runs"] == 3 and stats["successes"] == 2
    assert stats["success_rate"] == pytest.approx(2 / 3)
    # failure counts as the 10 s limit, not its 0.3 s wall time
    assert stats["time_median_s"] == 2.0
    assert stats["time_q3_s"] == 6.0  # midpoint of 2 and 10


def test_read_results_csv_rejects_unknown_header(tmp_path):
    bad = tmp_path / "results.csv"
    bad.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError, match="header"):
        read_results_csv(str(bad))


def test_csv_round_trip_is_exact(tmp_path, workspace):
    s = _scenario(workspace, runs=1)
    csv_path, _ = run_benchmark([s], str(tmp_path / "out"))
    rows = read_results_csv(csv_path)
    text = csv_path if isinstance(csv_path, str) else str(csv_path)
    import csv as _csv
    with open(text, newline="") as fh:
        raw = list(_csv.reader(fh))
    assert raw[0] == list(CSV_HEADER)
    assert [str(v) for v in rows[0].as_row()] == raw[1]


# --- command line ---

def _prepare_config(workspace, tmp_path, pairs=None, **extra):
    config = {
        "environments": {"wall": str(workspace / "wall.obj")},
        "objects": {"cube": str(workspace / "template.obj")},
        "pairs": pairs if pairs is not None else [
            {"object": "cube", "env": "wall", "start": START, "goal": GOAL}],
        "params": {"seed": 43, "max_time": 5.0, "bounds": BOUNDS_JSON},
        "d_min": 50.0, "n_patience": 1, "budget_s": 30.0,
    }
    config.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return path


def test_cli_prepare_then_plan(tmp_path, workspace, capsys):
    config = _prepare_config(workspace, tmp_path)
    lib_path = tmp_path / "lib" / "library.json"
    assert main(["prepare", "--config", str(config),
                 "--out", str(lib_path)]) == 0
    assert "1 records" in capsys.readouterr().out

    out_path = tmp_path / "answer.path.csv"
    code = main(["plan", "--lib", str(lib_path),
                 "--query", str(workspace / "cube.obj"), "--env", "wall",
                 "--start", "0,-1.5,0,1,0,0,0", "--goal", "0,1.5,0,1,0,0,0",
                 "--out", str(out_path), "--time-limit", "20", "--seed", "3"])
    captured = capsys.readouterr()
    assert code == 0
    assert "success: True" in captured.out
    assert "planning_s:" in captured.out
    p = read_path_file(str(out_path))
    np.testing.assert_array_equal(p.as_array()[0], np.asarray(START))


def test_cli_prepare_partial_failure_exits_1(tmp_path, workspace, capsys):
    pairs = [
        {"object": "cube", "env": "wall", "start": START, "goal": GOAL},
        {"object": "cube", "env": "wall", "start": [2.5, 0, 0, 1, 0, 0, 0],
         "goal": GOAL},  # start collides with the wall
    ]
    config = _prepare_config(workspace, tmp_path, pairs=pairs)
    lib_path = tmp_path / "library.json"
    assert main(["prepare", "--config", str(config),
                 "--out", str(lib_path)]) == 1
    assert "FAILED" in capsys.readouterr().err
    assert len(PathLibrary.load(str(lib_path)).records) == 1


def test_cli_prepare_nothing_succeeds_exits_1(tmp_path, workspace, capsys):
    config = _prepare_config(workspace, tmp_path, pairs=[
        {"object": "cube", "env": "wall", "start": [2.5, 0, 0, 1, 0, 0, 0],
         "goal": GOAL}])
    assert main(["prepare", "--config", str(config),
                 "--out", str(tmp_path / "library.json")]) == 1
    assert "no records succeeded" in capsys.readouterr().err


def test_cli_plan_unknown_env_exits_2(workspace, tmp_path, capsys):
    code = main(["plan", "--lib", str(workspace / "library.json"),
                 "--query", str(workspace / "cube.obj"), "--env", "nosuch",
                 "--start", "0,-1.5,0,1,0,0,0", "--goal", "0,1.5,0,1,0,0,0",
                 "--out", str(tmp_path / "x.csv")])
    assert code == 2
    assert "no environment" in capsys.readouterr().err


def test_cli_plan_strict_requires_a_record(tmp_path, workspace, capsys):
    empty = PathLibrary()
    empty.register_environment(
        "wall", wall_with_windows(6.0, 5.0, 0.4, [(0.0, 0.0, 2.0, 2.0)]),
        str(workspace / "wall.obj"))
    lib_path = tmp_path / "empty.json"
    empty.save(str(lib_path))
    args = ["plan", "--lib", str(lib_path),
            "--query", str(workspace / "cube.obj"), "--env", "wall",
            "--start", "0,-1.5,0,1,0,0,0", "--goal", "0,1.5,0,1,0,0,0",
            "--out", str(tmp_path / "x.csv"), "--time-limit", "20"]
    assert main(args + ["--strict"]) == 2
    capsys.readouterr()
    # without --strict the same query falls back to unguided planning
    assert main(args) == 0
    captured = capsys.readouterr()
    assert "falling back" in captured.err
    assert "success: True" in captured.out


def test_cli_plan_no_path_exits_1(tmp_path, workspace, capsys):
    # start is sealed inside a closed shell, so no path can exist
    shell = box_mesh((4.0, 4.0, 4.0))
    lib = PathLibrary()
    lib.register_environment("cell", shell)
    lib_path = tmp_path / "cell.json"
    lib.save(str(lib_path))
    code = main(["plan", "--lib", str(lib_path),
                 "--query", str(workspace / "cube.obj"), "--env", "cell",
                 "--start", "0,0,0,1,0,0,0", "--goal", "0,3,0,1,0,0,0",
                 "--out", str(tmp_path / "x.csv"), "--time-limit", "1.0"])
    assert code == 1
    assert "no path" in capsys.readouterr().err


def test_cli_missing_inputs_exit_2(tmp_path, capsys):
    assert main(["prepare", "--config", str(tmp_path / "none.json"),
                 "--out", str(tmp_path / "lib.json")]) == 2
    assert main(["bench", "--scenarios", str(tmp_path / "none.json"),
                 "--out-dir", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "pathbank:" in err


def test_cli_bench_end_to_end(tmp_path, workspace, capsys):
    doc = {"scenarios": [{
        "id": "window", "env_mesh": str(workspace / "wall.obj"),
        "query_mesh": str(workspace / "cube.obj"), "start": START,
        "goal": GOAL, "planners": ["rrt", "rrt_lib"], "runs": 2,
        "time_limit": 20.0, "seed_base": 5, "env_id": "wall",
        "library": str(workspace / "library.json"),
        "params": {"bounds": BOUNDS_JSON}}]}
    scen_path = tmp_path / "scenarios.json"
    scen_path.write_text(json.dumps(doc))
    out_dir = tmp_path / "runs"
    assert main(["bench", "--scenarios", str(scen_path),
                 "--out-dir", str(out_dir)]) == 0
    captured = capsys.readouterr().out
    assert "window / rrt:" in captured
    assert "window / rrt_lib:" in captured
    assert (out_dir / "results.csv").exists()
    assert (out_dir / "summary.json").exists()
    assert len(read_results_csv(str(out_dir / "results.csv"))) == 4


def test_module_entry_point_help():
    proc = subprocess.run([sys.executable, "-m", "pathbank", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "prepare" in proc.stdout and "bench" in proc.stdout
