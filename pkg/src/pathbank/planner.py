"""Sampling-based rigid-body planners: RRT, RRT-Connect, and guided RRT.

The guided variant biases sampling toward a set of guiding paths and rejects
tree nodes that fall inside inhibited regions (configuration balls), except
near the start or goal. Per iteration the raw sample is:

  with probability p_goal                 -> the goal configuration
  else with probability p_bias            -> a perturbed waypoint of a
                                             uniformly chosen guiding path
  else                                    -> uniform over bounds x SO(3)

so the guide branch fires with probability p_bias * (1 - p_goal) overall.
Inhibition is enforced at node-admission time, not at sampling time: a new
node is rejected when it lies within d_inhibited of any inhibited center
while farther than d_safe from both start and goal.

Determinism: a planner run consumes a single seeded generator, so identical
inputs and seed reproduce the tree exactly provided the time limit does not
bind (wall-clock cutoffs are inherently run-dependent; budget by
max_iterations for reproducibility).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .collision import config_valid, motion_valid
from .diversity import Path, path_length
from .mesh import TriMesh
from .se3 import (Configuration, MetricWeights, Rotation, SampleBounds,
                  config_distance, interpolate, random_rotation,
                  sample_uniform)


@dataclass(frozen=True)
class PlannerParams:
    p_goal: float = 0.05
    p_bias: float = 0.80
    d_guide: float = 0.50
    d_inhibited: float = 1.20
    d_safe: float = 0.80
    extend_step: float = 0.4
    collision_step: float = 0.05
    max_time: float = 120.0
    max_iterations: int | None = None
    seed: int = 0
    bounds: SampleBounds | None = None
    weights: MetricWeights = MetricWeights()

    def __post_init__(self):
        if not (0.0 <= self.p_goal <= 1.0 and 0.0 <= self.p_bias <= 1.0):
            raise ValueError("p_goal and p_bias must lie in [0, 1]")
        for name in ("d_guide", "d_inhibited", "d_safe", "extend_step",
                     "collision_step"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.max_time <= 0.0:
            raise ValueError("max_time must be positive")


class Tree:
    """Growable RRT tree; node 0 is the root and has parent -1."""

    def __init__(self, root: Configuration):
        self.configs: list[Configuration] = [root]
        self.parents: list[int] = [-1]
        self._array = np.empty((16, 7), dtype=np.float64)
        self._array[0] = root.to_array()

    def __len__(self) -> int:
        return len(self.configs)

    def add(self, q: Configuration, parent: int) -> int:
        idx = len(self.configs)
        if idx == self._array.shape[0]:
            grown = np.empty((2 * idx, 7), dtype=np.float64)
            grown[:idx] = self._array
            self._array = grown
        self._array[idx] = q.to_array()
        self.configs.append(q)
        self.parents.append(parent)
        return idx

    def nearest(self, q: Configuration, w_rot: float) -> tuple[int, float]:
        idx, dist = kernels.nearest_config(self._array[:len(self.configs)],
                                           q.to_array(), w_rot)
        return idx, dist

    def branch(self, idx: int) -> list[Configuration]:
        """Configurations from the root to node idx."""
        out = []
        while idx >= 0:
            out.append(self.configs[idx])
            idx = self.parents[idx]
        out.reverse()
        return out


@dataclass(frozen=True)
class PlanResult:
    path: Path | None
    success: bool
    time_s: float
    iterations: int
    nodes: int
    path_len: float
    waypoints: int
    trees: tuple[Tree, ...] = field(repr=False, default=())


def default_bounds(obj: TriMesh, env: TriMesh,
                   margin: float = 0.5) -> SampleBounds:
    """Translation bounds covering the environment plus room to move around it."""
    lo, hi = env.aabb
    pad = obj.bounding_radius + margin
    return SampleBounds(lo - pad, hi + pad)


def draw_sample(rng: np.random.Generator, params: PlannerParams,
                bounds: SampleBounds, goal: Configuration,
                guides: Sequence[Path]) -> tuple[str, Configuration]:
    """One raw sample and the branch that produced it ("goal"/"guide"/"uniform")."""
    u = rng.random()
    if u < params.p_goal:
        return "goal", goal
    if guides and u < params.p_goal + params.p_bias * (1.0 - params.p_goal):
        path = guides[int(rng.integers(len(guides)))]
        wp = path[int(rng.integers(len(path)))]
        offset = _uniform_ball(rng, params.d_guide)
        angle = rng.random() * (params.d_guide / params.weights.w_rot)
        spin = Rotation.from_axis_angle(_uniform_direction(rng), angle)
        return "guide", Configuration(wp.translation + offset,
                                      wp.rotation.compose(spin))
    return "uniform", sample_uniform(bounds, rng)


def _uniform_direction(rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.normal(size=3)
        n = float(np.linalg.norm(v))
        if n > 1e-12:
            return v / n


def _uniform_ball(rng: np.random.Generator, radius: float) -> np.ndarray:
    return _uniform_direction(rng) * (radius * rng.random() ** (1.0 / 3.0))


def _check_endpoints(obj: TriMesh, env: TriMesh, start: Configuration,
                     goal: Configuration) -> None:
    if not config_valid(obj, env, start):
        raise ValueError("start configuration is in collision")
    if not config_valid(obj, env, goal):
        raise ValueError("goal configuration is in collision")


def _inhibited_violation(q_arr: np.ndarray, centers: np.ndarray,
                         start_arr: np.ndarray, goal_arr: np.ndarray,
                         params: PlannerParams) -> bool:
    w = params.weights.w_rot
    _, d_start = kernels.nearest_config(start_arr, q_arr, w)
    if d_start <= params.d_safe:
        return False
    _, d_goal = kernels.nearest_config(goal_arr, q_arr, w)
    if d_goal <= params.d_safe:
        return False
    _, d_inh = kernels.nearest_config(centers, q_arr, w)
    return d_inh < params.d_inhibited


def _result(path: list[Configuration] | None, t0: float, iterations: int,
            trees: tuple[Tree, ...], weights: MetricWeights) -> PlanResult:
    nodes = sum(len(t) for t in trees)
    elapsed = time.perf_counter() - t0
    if path is None:
        return PlanResult(None, False, elapsed, iterations, nodes, 0.0, 0,
                          trees)
    p = Path(path)
    return PlanResult(p, True, elapsed, iterations, nodes,
                      path_length(p, weights), len(p), trees)


def rrt_ir_plan(obj: TriMesh, env: TriMesh, start: Configuration,
                goal: Configuration, guides: Sequence[Path] = (),
                inhibited: Sequence[Configuration] = (),
                params: PlannerParams = PlannerParams()) -> PlanResult:
    """Guided RRT with inhibited regions; with empty guides and regions this
    is exactly the plain RRT (same sampling law, same tree for a seed)."""
    t0 = time.perf_counter()
    _check_endpoints(obj, env, start, goal)
    weights = params.weights
    bounds = params.bounds or default_bounds(obj, env)
    rng = np.random.default_rng(params.seed)
    tree = Tree(start)

    if config_distance(start, goal, weights) == 0.0:
        return _result([start], t0, 0, (tree,), weights)
    if config_distance(start, goal, weights) <= params.extend_step \
            and motion_valid(obj, env, start, goal, params.collision_step,
                             weights):
        tree.add(goal, 0)
        return _result([start, goal], t0, 0, (tree,), weights)

    centers = (np.stack([c.to_array() for c in inhibited])
               if inhibited else None)
    start_arr = start.to_array()[None, :]
    goal_arr = goal.to_array()[None, :]
    guides = tuple(guides)

    iterations = 0
    while (params.max_iterations is None or iterations < params.max_iterations) \
            and time.perf_counter() - t0 < params.max_time:
        iterations += 1
        _, q_rand = draw_sample(rng, params, bounds, goal, guides)
        near_idx, dist = tree.nearest(q_rand, weights.w_rot)
        if dist == 0.0:
            continue
        q_near = tree.configs[near_idx]
        q_new = interpolate(q_near, q_rand,
                            min(1.0, params.extend_step / dist))
        if centers is not None and _inhibited_violation(
                q_new.to_array(), centers, start_arr, goal_arr, params):
            continue
        if not motion_valid(obj, env, q_near, q_new, params.collision_step,
                            weights):
            continue
        new_idx = tree.add(q_new, near_idx)
        if config_distance(q_new, goal, weights) <= params.extend_step \
                and motion_valid(obj, env, q_new, goal, params.collision_step,
                                 weights):
            goal_idx = tree.add(goal, new_idx)
            return _result(tree.branch(goal_idx), t0, iterations, (tree,),
                           weights)
    return _result(None, t0, iterations, (tree,), weights)


def rrt_plan(obj: TriMesh, env: TriMesh, start: Configuration,
             goal: Configuration,
             params: PlannerParams = PlannerParams()) -> PlanResult:
    """Plain RRT with goal bias: the guided planner with nothing to guide it."""
    return rrt_ir_plan(obj, env, start, goal, (), (), params)


def _connect(tree: Tree, target: Configuration, obj: TriMesh, env: TriMesh,
             params: PlannerParams) -> int | None:
    """Greedily extend `tree` toward target; node index on arrival, else None."""
    weights = params.weights
    idx, dist = tree.nearest(target, weights.w_rot)
    while True:
        if dist == 0.0:
            return idx
        s = min(1.0, params.extend_step / dist)
        q_new = interpolate(tree.configs[idx], target, s)
        if not motion_valid(obj, env, tree.configs[idx], q_new,
                            params.collision_step, weights):
            return None
        idx = tree.add(q_new, idx)
        if s >= 1.0:
            return idx
        dist = config_distance(q_new, target, weights)


def rrt_connect_plan(obj: TriMesh, env: TriMesh, start: Configuration,
                     goal: Configuration,
                     params: PlannerParams = PlannerParams()) -> PlanResult:
    """Bidirectional RRT with the greedy connect heuristic; no goal bias."""
    t0 = time.perf_counter()
    _check_endpoints(obj, env, start, goal)
    weights = params.weights
    bounds = params.bounds or default_bounds(obj, env)
    rng = np.random.default_rng(params.seed)
    tree_a = Tree(start)   # grows from start on even iterations
    tree_b = Tree(goal)
    trees = (tree_a, tree_b)

    if config_distance(start, goal, weights) == 0.0:
        return _result([start], t0, 0, trees, weights)

    from_start = True
    iterations = 0
    while (params.max_iterations is None or iterations < params.max_iterations) \
            and time.perf_counter() - t0 < params.max_time:
        iterations += 1
        grow, other = (tree_a, tree_b) if from_start else (tree_b, tree_a)
        q_rand = sample_uniform(bounds, rng)
        near_idx, dist = grow.nearest(q_rand, weights.w_rot)
        if dist == 0.0:
            from_start = not from_start
            continue
        q_new = interpolate(grow.configs[near_idx], q_rand,
                            min(1.0, params.extend_step / dist))
        if motion_valid(obj, env, grow.configs[near_idx], q_new,
                        params.collision_step, weights):
            new_idx = grow.add(q_new, near_idx)
            bridge = _connect(other, q_new, obj, env, params)
            if bridge is not None:
                grow_branch = grow.branch(new_idx)
                other_branch = other.branch(bridge)
                if from_start:
                    waypoints = grow_branch + other_branch[::-1][1:]
                else:
                    waypoints = other_branch + grow_branch[::-1][1:]
                return _result(waypoints, t0, iterations, trees, weights)
        from_start = not from_start
    return _result(None, t0, iterations, trees, weights)
