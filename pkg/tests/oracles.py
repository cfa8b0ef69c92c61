"""Independent geometry oracles for the collision tests.

The triangle test here is a separating-axis formulation: two triangles are
disjoint iff their projections separate along one of the candidate axes
(each face normal, the nine edge-edge cross products, and the six in-plane
edge normals that make the test exact for coplanar pairs). The production
code uses an interval-based formulation instead, so agreement between the
two is meaningful evidence rather than the same algorithm twice.
"""

from __future__ import annotations

import numpy as np

_EPS = 1e-12


def _separated(axis, tri_a, tri_b) -> bool:
    norm = np.dot(axis, axis)
    if norm < _EPS:
        return False
    pa = tri_a @ axis
    pb = tri_b @ axis
    return pa.max() < pb.min() or pb.max() < pa.min()


def tri_tri_sat(tri_a, tri_b) -> bool:
    """True when the (closed) triangles intersect."""
    tri_a = np.asarray(tri_a, dtype=np.float64)
    tri_b = np.asarray(tri_b, dtype=np.float64)
    ea = [tri_a[(i + 1) % 3] - tri_a[i] for i in range(3)]
    eb = [tri_b[(i + 1) % 3] - tri_b[i] for i in range(3)]
    na = np.cross(ea[0], ea[1])
    nb = np.cross(eb[0], eb[1])
    axes = [na, nb]
    axes += [np.cross(e1, e2) for e1 in ea for e2 in eb]
    axes += [np.cross(na, e) for e in ea]
    axes += [np.cross(nb, e) for e in eb]
    return not any(_separated(axis, tri_a, tri_b) for axis in axes)


def posed_triangles(mesh, rot, trans) -> np.ndarray:
    verts = np.asarray(mesh.vertices) @ np.asarray(rot).T + np.asarray(trans)
    return verts[np.asarray(mesh.triangles)]


def meshes_intersect_sat(mesh_a, rot, trans, mesh_b) -> bool:
    """All-pairs SAT mesh intersection; mesh_a posed by (rot, trans)."""
    tris_a = posed_triangles(mesh_a, rot, trans)
    tris_b = np.asarray(mesh_b.vertices)[np.asarray(mesh_b.triangles)]
    # cheap AABB prefilter per pair keeps the O(n*m) loop tolerable
    lo_a, hi_a = tris_a.min(axis=1), tris_a.max(axis=1)
    lo_b, hi_b = tris_b.min(axis=1), tris_b.max(axis=1)
    for i in range(tris_a.shape[0]):
        overlap = (lo_a[i] <= hi_b).all(axis=1) & (lo_b <= hi_a[i]).all(axis=1)
        for j in np.nonzero(overlap)[0]:
            if tri_tri_sat(tris_a[i], tris_b[j]):
                return True
    return False
