"""Rigid alignment: closed-form least squares and ICP with an initial guess.

The closed-form solver is the centroid-subtraction + SVD construction with
reflection correction; ICP seeds it from a correspondence set, then
alternates nearest-target-vertex assignment with re-solving, which makes the
summed squared residual non-increasing across iterations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .diversity import Path
from .mesh import TriMesh
from .se3 import Configuration, Rotation

_RANK_TOL = 1e-9


class DegenerateGeometryError(ValueError):
    """Raised when point pairs cannot determine a rigid transform."""


@dataclass(frozen=True)
class RigidTransform:
    """Rotation-then-translation map: p -> R p + t."""

    rotation: Rotation
    translation: np.ndarray

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(Rotation.identity(), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.matrix().T + self.translation

    def as_configuration(self) -> Configuration:
        return Configuration(self.translation, self.rotation)

    def to_array(self) -> np.ndarray:
        return self.as_configuration().to_array()

    @classmethod
    def from_array(cls, arr) -> "RigidTransform":
        q = Configuration.from_array(arr)
        return cls(q.rotation, q.translation)


@dataclass(frozen=True)
class IcpResult:
    """Final transform plus the residual trace.

    `errors[0]` is the summed squared residual of the initial guess over the
    seed correspondences; later entries are per-iteration residuals over all
    source vertices (non-increasing).
    """

    transform: RigidTransform
    errors: tuple[float, ...]
    iterations: int

    @property
    def initial_error(self) -> float:
        return self.errors[0]

    @property
    def final_error(self) -> float:
        return self.errors[-1]


def _solve(src: np.ndarray, tgt: np.ndarray) -> RigidTransform:
    sc = src.mean(axis=0)
    tc = tgt.mean(axis=0)
    cov = (src - sc).T @ (tgt - tc)
    u, s, vt = np.linalg.svd(cov)
    if s[1] <= _RANK_TOL * s[0]:
        raise DegenerateGeometryError(
            "point pairs are collinear or coincident; rotation is not determined")
    d = np.sign(np.linalg.det(vt.T @ u.T))
    rot_m = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    rot = Rotation.from_matrix(rot_m)
    trans = tc - rot_m @ sc
    return RigidTransform(rot, trans)


def solve_rigid(pairs) -> RigidTransform:
    """Least-squares rigid transform from (source point, target point) pairs.

    Accepts an (n, 2, 3) array or an equivalent nested sequence; needs at
    least 3 non-collinear pairs.
    """
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[1] != 2 or arr.shape[2] != 3:
        raise ValueError("pairs must have shape (n, 2, 3)")
    if arr.shape[0] < 3:
        raise DegenerateGeometryError("need at least 3 point pairs")
    return _solve(arr[:, 0], arr[:, 1])


def icp_with_guess(source: TriMesh, target: TriMesh, correspondences,
                   max_iterations: int = 15,
                   eps_min: float = 1e-10) -> IcpResult:
    """ICP seeded by a correspondence set.

    The initial transform is solved from the given index pairs and its
    residual evaluated over those pairs; while the iteration count is below
    `max_iterations` and the residual exceeds `eps_min`, every source vertex
    is matched to its nearest target vertex and the transform re-solved.
    """
    idx = np.asarray(getattr(correspondences, "pairs", correspondences),
                     dtype=np.int64)
    if idx.ndim != 2 or idx.shape[1] != 2:
        raise ValueError("correspondences must be (l, 2) index pairs")
    src_seed = source.vertices[idx[:, 0]]
    tgt_seed = target.vertices[idx[:, 1]]
    transform = _solve(src_seed, tgt_seed)
    eps = float(((tgt_seed - transform.apply(src_seed)) ** 2).sum())
    errors = [eps]

    tree = cKDTree(target.vertices)
    k = 0
    while k < max_iterations and eps > eps_min:
        _, nn = tree.query(transform.apply(source.vertices))
        matched = target.vertices[nn]
        transform = _solve(source.vertices, matched)
        eps = float(((matched - transform.apply(source.vertices)) ** 2).sum())
        errors.append(eps)
        k += 1
    return IcpResult(transform=transform, errors=tuple(errors), iterations=k)


def transform_paths(paths: Sequence[Path], transform: RigidTransform) -> list[Path]:
    """Re-pose every waypoint by right-composition with the alignment.

    With T mapping query points onto template points, each template waypoint
    q_w becomes q_w ∘ T, so the query object swept through the new waypoints
    occupies the world volume the template occupied.
    """
    t_cfg = transform.as_configuration()
    return [Path(q.compose(t_cfg) for q in p) for p in paths]
