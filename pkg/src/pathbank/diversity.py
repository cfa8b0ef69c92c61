"""Path distances and the distinctness predicate used during preparation.

The directed path distance averages, over the waypoints of the first path,
the metric distance to the nearest waypoint of the second; it is asymmetric
by construction. Distinctness symmetrizes with a max and compares the
minimum over the existing set against a threshold.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .se3 import Configuration, MetricWeights, config_distance, interpolate


class Path:
    """Ordered, nonempty sequence of configurations."""

    __slots__ = ("waypoints", "_array")

    def __init__(self, waypoints: Iterable[Configuration]):
        self.waypoints = tuple(waypoints)
        if not self.waypoints:
            raise ValueError("path must contain at least one waypoint")
        self._array = None

    def as_array(self) -> np.ndarray:
        """Waypoints as an (n, 7) array of [x y z qw qx qy qz] rows."""
        if self._array is None:
            arr = np.stack([q.to_array() for q in self.waypoints])
            if not np.isfinite(arr).all():
                raise ValueError("path contains non-finite coordinates")
            arr.setflags(write=False)
            self._array = arr
        return self._array

    @classmethod
    def from_array(cls, arr) -> "Path":
        return cls(Configuration.from_array(row) for row in np.asarray(arr))

    def __len__(self) -> int:
        return len(self.waypoints)

    def __iter__(self):
        return iter(self.waypoints)

    def __getitem__(self, i):
        return self.waypoints[i]

    def __repr__(self) -> str:
        return f"Path({len(self.waypoints)} waypoints)"


def _pairwise(a: np.ndarray, b: np.ndarray, weights: MetricWeights) -> np.ndarray:
    """Metric distance matrix between two waypoint arrays."""
    dt = a[:, None, :3] - b[None, :, :3]
    trans = np.sqrt((dt * dt).sum(axis=2))
    dot = np.abs(a[:, 3:] @ b[:, 3:].T)
    ang = 2.0 * np.arccos(np.minimum(dot, 1.0))
    return trans + weights.w_rot * ang


def path_distance(p1: Path, p2: Path,
                  weights: MetricWeights = MetricWeights()) -> float:
    """Directed distance: mean over p1's waypoints of the nearest-waypoint
    distance into p2. Asymmetric."""
    d = _pairwise(p1.as_array(), p2.as_array(), weights)
    return float(d.min(axis=1).mean())


def set_distance(p: Path, paths: Sequence[Path],
                 weights: MetricWeights = MetricWeights()) -> float:
    """Minimum over the set of the symmetrized (max of both directions)
    path distance."""
    if not paths:
        raise ValueError("set_distance needs a nonempty path set")
    best = math.inf
    pa = p.as_array()
    for pk in paths:
        d = _pairwise(pa, pk.as_array(), weights)
        forward = float(d.min(axis=1).mean())
        backward = float(d.min(axis=0).mean())
        best = min(best, max(forward, backward))
    return best


def is_distinct(p: Path, paths: Sequence[Path], d_min: float,
                weights: MetricWeights = MetricWeights()) -> bool:
    """True iff the set is empty or p exceeds d_min from every set member
    (strict inequality at the boundary)."""
    if d_min <= 0.0:
        raise ValueError("d_min must be positive")
    if not paths:
        return True
    return set_distance(p, paths, weights) > d_min


def path_length(p: Path, weights: MetricWeights = MetricWeights()) -> float:
    """Total metric length along consecutive waypoints."""
    return sum(config_distance(a, b, weights)
               for a, b in zip(p.waypoints, p.waypoints[1:]))


def write_path_file(filename: str, p: Path) -> None:
    """Write waypoints as CSV rows `x,y,z,qw,qx,qy,qz` (exact float reprs)."""
    with open(filename, "w", encoding="utf-8") as fh:
        fh.write("x,y,z,qw,qx,qy,qz\n")
        for row in p.as_array():
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_path_file(filename: str) -> Path:
    with open(filename, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "x,y,z,qw,qx,qy,qz":
            raise ValueError(f"unexpected path file header: {header!r}")
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    return Path.from_array(np.asarray(rows, dtype=np.float64))


def resample(p: Path, spacing: float = 0.25,
             weights: MetricWeights = MetricWeights()) -> Path:
    """Densify a path so consecutive waypoints are at most `spacing` apart.

    Original waypoints are retained; this is an optional pre-pass for the
    distance computations so sparse paths cannot understate coverage. The
    distances themselves never densify implicitly.
    """
    if spacing <= 0.0:
        raise ValueError("spacing must be positive")
    out: list[Configuration] = []
    for a, b in zip(p.waypoints, p.waypoints[1:]):
        dist = config_distance(a, b, weights)
        segments = max(1, math.ceil(dist / spacing))
        out.extend(interpolate(a, b, i / segments) for i in range(segments))
    out.append(p.waypoints[-1])
    return Path(out)
