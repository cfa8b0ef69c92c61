"""Procedural test geometry: boxes, plates, and walls with window openings."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .mesh import TriMesh

# Faces of a unit box as vertex-index quads (outward winding).
_BOX_QUADS = (
    (0, 1, 3, 2),  # -z
    (4, 6, 7, 5),  # +z
    (0, 4, 5, 1),  # -y
    (2, 3, 7, 6),  # +y
    (0, 2, 6, 4),  # -x
    (1, 5, 7, 3),  # +x
)


def _box_arrays(lo, hi, base: int):
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    corners = np.array([
        [lo[0], lo[1], lo[2]],
        [hi[0], lo[1], lo[2]],
        [lo[0], hi[1], lo[2]],
        [hi[0], hi[1], lo[2]],
        [lo[0], lo[1], hi[2]],
        [hi[0], lo[1], hi[2]],
        [lo[0], hi[1], hi[2]],
        [hi[0], hi[1], hi[2]],
    ])
    tris = []
    for a, b, c, d in _BOX_QUADS:
        tris.append((base + a, base + b, base + c))
        tris.append((base + a, base + c, base + d))
    return corners, tris


def box_mesh(extents: Sequence[float] = (1.0, 1.0, 1.0),
             center: Sequence[float] = (0.0, 0.0, 0.0)) -> TriMesh:
    """Axis-aligned box with the given edge lengths, 12 triangles."""
    ext = np.asarray(extents, dtype=np.float64)
    ctr = np.asarray(center, dtype=np.float64)
    if (ext <= 0).any():
        raise ValueError("box extents must be positive")
    verts, tris = _box_arrays(ctr - ext / 2.0, ctr + ext / 2.0, 0)
    return TriMesh(verts, tris)


def plate(width: float, height: float, thickness: float) -> TriMesh:
    """Thin rectangular slab: width along x, thickness along y, height along z."""
    return box_mesh((width, thickness, height))


def wall_with_windows(width: float, height: float, thickness: float,
                      windows: Sequence[tuple[float, float, float, float]],
                      center: Sequence[float] = (0.0, 0.0, 0.0)) -> TriMesh:
    """Wall in the xz plane with rectangular through-openings.

    The slab spans width along x, thickness along y, and height along z,
    centered at `center`. Each window is (cx, cz, w, h) in wall-local
    coordinates and must lie strictly inside the wall outline. The solid
    region around the openings is decomposed into a grid of boxes cut by the
    window edges.
    """
    if not windows:
        return box_mesh((width, thickness, height), center)
    ctr = np.asarray(center, dtype=np.float64)
    x_cuts = {-width / 2.0, width / 2.0}
    z_cuts = {-height / 2.0, height / 2.0}
    rects = []
    for cx, cz, w, h in windows:
        x0, x1 = cx - w / 2.0, cx + w / 2.0
        z0, z1 = cz - h / 2.0, cz + h / 2.0
        if x0 <= -width / 2.0 or x1 >= width / 2.0 \
                or z0 <= -height / 2.0 or z1 >= height / 2.0:
            raise ValueError("window must lie strictly inside the wall outline")
        rects.append((x0, x1, z0, z1))
        x_cuts.update((x0, x1))
        z_cuts.update((z0, z1))
    xs = sorted(x_cuts)
    zs = sorted(z_cuts)

    verts_parts = []
    tris_parts = []
    base = 0
    y0, y1 = -thickness / 2.0, thickness / 2.0
    for i in range(len(xs) - 1):
        for j in range(len(zs) - 1):
            mx = (xs[i] + xs[i + 1]) / 2.0
            mz = (zs[j] + zs[j + 1]) / 2.0
            inside = any(x0 < mx < x1 and z0 < mz < z1
                         for x0, x1, z0, z1 in rects)
            if inside:
                continue
            v, t = _box_arrays((xs[i], y0, zs[j]), (xs[i + 1], y1, zs[j + 1]),
                               base)
            verts_parts.append(v + ctr)
            tris_parts.extend(t)
            base += 8
    return TriMesh(np.vstack(verts_parts), tris_parts)
