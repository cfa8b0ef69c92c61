"""Mesh-mesh collision queries and discrete motion validation.

Collision semantics are surface-intersection only: two meshes collide iff
some pair of triangles intersects. A mesh fully contained in a closed solid
without touching its surface does not register; the procedural environments
used here (walls with window openings) cannot produce that case along a
continuous motion from a collision-free pose.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .mesh import TriMesh
from .se3 import Configuration, MetricWeights, config_distance, interpolate

LEAF_SIZE = 4


class Bvh:
    """Static bounding-volume hierarchy over a mesh's triangles.

    Built by median split on the longest axis of triangle-centroid spread,
    leaf size 4. Nodes are stored as flat arrays so the kernel backends can
    traverse without touching Python objects: per-node AABBs, child index
    pairs (-1 marks a leaf), and (start, count) ranges into a permuted
    primitive index list.
    """

    __slots__ = ("nodes_min", "nodes_max", "children", "ranges", "prims")

    def __init__(self, nodes_min, nodes_max, children, ranges, prims):
        self.nodes_min = nodes_min
        self.nodes_max = nodes_max
        self.children = children
        self.ranges = ranges
        self.prims = prims

    @classmethod
    def build(cls, vertices: np.ndarray, triangles: np.ndarray,
              leaf_size: int = LEAF_SIZE) -> "Bvh":
        verts = np.asarray(vertices, dtype=np.float64)
        tris = np.asarray(triangles, dtype=np.int32)
        corners = verts[tris]  # (m, 3, 3)
        tri_lo = corners.min(axis=1)
        tri_hi = corners.max(axis=1)
        centroids = corners.mean(axis=1)
        prims = np.arange(tris.shape[0], dtype=np.int32)

        nodes_min: list[np.ndarray] = []
        nodes_max: list[np.ndarray] = []
        children: list[list[int]] = []
        ranges: list[list[int]] = []

        def build_node(start: int, end: int) -> int:
            idx = len(nodes_min)
            sel = prims[start:end]
            nodes_min.append(tri_lo[sel].min(axis=0))
            nodes_max.append(tri_hi[sel].max(axis=0))
            children.append([-1, -1])
            ranges.append([start, end - start])
            count = end - start
            if count > leaf_size:
                cen = centroids[sel]
                spread = cen.max(axis=0) - cen.min(axis=0)
                axis = int(np.argmax(spread))
                if spread[axis] > 0.0:
                    order = np.argsort(cen[:, axis], kind="stable")
                    prims[start:end] = sel[order]
                    left = build_node(start, start + count // 2)
                    right = build_node(start + count // 2, end)
                    children[idx] = [left, right]
            return idx

        build_node(0, tris.shape[0])
        bvh = cls(
            np.ascontiguousarray(nodes_min, dtype=np.float64),
            np.ascontiguousarray(nodes_max, dtype=np.float64),
            np.ascontiguousarray(children, dtype=np.int32),
            np.ascontiguousarray(ranges, dtype=np.int32),
            prims,
        )
        for arr in bvh.arrays():
            arr.setflags(write=False)
        return bvh

    def arrays(self):
        """The flat-node tuple consumed by the kernel backends."""
        return (self.nodes_min, self.nodes_max, self.children, self.ranges,
                self.prims)

    @property
    def node_count(self) -> int:
        return self.nodes_min.shape[0]


def meshes_intersect(a: TriMesh, pose_a: Configuration, b: TriMesh,
                     method: str = "bvh") -> bool:
    """True iff any triangle of `a` posed by `pose_a` intersects a triangle of `b`.

    `b` is taken in the world frame. `method` selects BVH traversal (default)
    or the all-pairs reference path ("brute"); both return identical results.
    """
    rot = pose_a.rotation.matrix()
    trans = pose_a.translation
    if method == "bvh":
        return bool(kernels.mesh_pair_intersect(
            a.vertices, a.triangles, a.bvh.arrays(), rot, trans,
            b.vertices, b.triangles, b.bvh.arrays()))
    if method == "brute":
        return bool(kernels.brute_force_intersect(
            a.vertices, a.triangles, rot, trans, b.vertices, b.triangles))
    raise ValueError(f"unknown collision method: {method!r}")


def config_valid(obj: TriMesh, env: TriMesh, q: Configuration,
                 method: str = "bvh") -> bool:
    """True iff the object posed at q does not intersect the environment."""
    return not meshes_intersect(obj, q, env, method=method)


def motion_valid(obj: TriMesh, env: TriMesh, a: Configuration,
                 b: Configuration, step: float = 0.05,
                 weights: MetricWeights = MetricWeights(),
                 method: str = "bvh") -> bool:
    """Validate the interpolated motion from a to b at resolution `step`.

    Poses are checked at evenly spaced interpolation parameters, endpoints
    included, so consecutive poses differ by at most `step` in the
    configuration metric. The number of segments is rounded up to a power of
    two, which makes the checked pose set at any coarser step a subset of the
    set at any finer step: refining can only reveal collisions, never hide
    one.
    """
    if step <= 0.0:
        raise ValueError("step must be positive")
    dist = config_distance(a, b, weights)
    if dist <= step:
        segments = 1
    else:
        segments = 1 << math.ceil(math.log2(dist / step))
    for i in range(segments + 1):
        if not config_valid(obj, env, interpolate(a, b, i / segments),
                            method=method):
            return False
    return True
