"""Pure-NumPy kernel backend.

Triangle-triangle intersection follows Moller's interval-overlap formulation
(the no-division variant), vectorized over candidate pairs; coplanar pairs
fall back to the 2D edge/containment tests. The arithmetic mirrors the
compiled backend expression-for-expression so both produce identical booleans.
"""

import numpy as np


def _cross(a, b):
    out = np.empty_like(a)
    out[..., 0] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    out[..., 1] = a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2]
    out[..., 2] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return out


def _dot(a, b):
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def _intervals(vv0, vv1, vv2, d0, d1, d2, d0d1, d0d2):
    """Interval endpoints on the intersection line; flags coplanar pairs."""
    c1 = d0d1 > 0.0
    c2 = ~c1 & (d0d2 > 0.0)
    c3 = ~c1 & ~c2 & ((d1 * d2 > 0.0) | (d0 != 0.0))
    c4 = ~(c1 | c2 | c3) & (d1 != 0.0)
    c5 = ~(c1 | c2 | c3 | c4) & (d2 != 0.0)
    coplanar = ~(c1 | c2 | c3 | c4 | c5)
    conds = [c1, c2, c3, c4, c5]
    a = np.select(conds, [vv2, vv1, vv0, vv1, vv2], default=0.0)
    b = np.select(
        conds,
        [(vv0 - vv2) * d2, (vv0 - vv1) * d1, (vv1 - vv0) * d0,
         (vv0 - vv1) * d1, (vv0 - vv2) * d2],
        default=0.0,
    )
    c = np.select(
        conds,
        [(vv1 - vv2) * d2, (vv2 - vv1) * d1, (vv2 - vv0) * d0,
         (vv2 - vv1) * d1, (vv1 - vv2) * d2],
        default=0.0,
    )
    x0 = np.select(conds, [d2 - d0, d1 - d0, d0 - d1, d1 - d0, d2 - d0], default=0.0)
    x1 = np.select(conds, [d2 - d1, d1 - d2, d0 - d2, d1 - d2, d2 - d1], default=0.0)
    return a, b, c, x0, x1, coplanar


def _edge_edge(ax, ay, v0x, v0y, u0x, u0y, u1x, u1y):
    bx = u0x - u1x
    by = u0y - u1y
    cx = v0x - u0x
    cy = v0y - u0y
    f = ay * bx - ax * by
    d = by * cx - bx * cy
    if (f > 0.0 and 0.0 <= d <= f) or (f < 0.0 and f <= d <= 0.0):
        e = ax * cy - ay * cx
        if f > 0.0:
            return 0.0 <= e <= f
        return f <= e <= 0.0
    return False


def _edge_against_tri(v0, v1, u0, u1, u2, i0, i1):
    ax = v1[i0] - v0[i0]
    ay = v1[i1] - v0[i1]
    return (
        _edge_edge(ax, ay, v0[i0], v0[i1], u0[i0], u0[i1], u1[i0], u1[i1])
        or _edge_edge(ax, ay, v0[i0], v0[i1], u1[i0], u1[i1], u2[i0], u2[i1])
        or _edge_edge(ax, ay, v0[i0], v0[i1], u2[i0], u2[i1], u0[i0], u0[i1])
    )


def _point_in_tri(p, u0, u1, u2, i0, i1):
    a = u1[i1] - u0[i1]
    b = -(u1[i0] - u0[i0])
    c = -a * u0[i0] - b * u0[i1]
    d0 = a * p[i0] + b * p[i1] + c
    a = u2[i1] - u1[i1]
    b = -(u2[i0] - u1[i0])
    c = -a * u1[i0] - b * u1[i1]
    d1 = a * p[i0] + b * p[i1] + c
    a = u0[i1] - u2[i1]
    b = -(u0[i0] - u2[i0])
    c = -a * u2[i0] - b * u2[i1]
    d2 = a * p[i0] + b * p[i1] + c
    return d0 * d1 > 0.0 and d0 * d2 > 0.0


def _coplanar_tri_tri(n, v0, v1, v2, u0, u1, u2):
    ax, ay, az = abs(n[0]), abs(n[1]), abs(n[2])
    if ax > ay:
        if ax > az:
            i0, i1 = 1, 2
        else:
            i0, i1 = 0, 1
    else:
        if az > ay:
            i0, i1 = 0, 1
        else:
            i0, i1 = 0, 2
    if (
        _edge_against_tri(v0, v1, u0, u1, u2, i0, i1)
        or _edge_against_tri(v1, v2, u0, u1, u2, i0, i1)
        or _edge_against_tri(v2, v0, u0, u1, u2, i0, i1)
    ):
        return True
    return _point_in_tri(v0, u0, u1, u2, i0, i1) or _point_in_tri(u0, v0, v1, v2, i0, i1)


def tri_pairs_intersect(va, ua):
    """Elementwise triangle-pair intersection for (k, 3, 3) vertex triples."""
    va = np.asarray(va, dtype=np.float64)
    ua = np.asarray(ua, dtype=np.float64)
    k = va.shape[0]
    if k == 0:
        return np.zeros(0, dtype=bool)
    v0, v1, v2 = va[:, 0], va[:, 1], va[:, 2]
    u0, u1, u2 = ua[:, 0], ua[:, 1], ua[:, 2]

    n1 = _cross(v1 - v0, v2 - v0)
    d1 = -_dot(n1, v0)
    du0 = _dot(n1, u0) + d1
    du1 = _dot(n1, u1) + d1
    du2 = _dot(n1, u2) + d1
    du0du1 = du0 * du1
    du0du2 = du0 * du2
    alive = ~((du0du1 > 0.0) & (du0du2 > 0.0))

    n2 = _cross(u1 - u0, u2 - u0)
    d2 = -_dot(n2, u0)
    dv0 = _dot(n2, v0) + d2
    dv1 = _dot(n2, v1) + d2
    dv2 = _dot(n2, v2) + d2
    dv0dv1 = dv0 * dv1
    dv0dv2 = dv0 * dv2
    alive &= ~((dv0dv1 > 0.0) & (dv0dv2 > 0.0))

    d = _cross(n1, n2)
    idx = np.argmax(np.abs(d), axis=1)
    rows = np.arange(k)
    vp0, vp1, vp2 = v0[rows, idx], v1[rows, idx], v2[rows, idx]
    up0, up1, up2 = u0[rows, idx], u1[rows, idx], u2[rows, idx]

    a, b, c, x0, x1, cop1 = _intervals(vp0, vp1, vp2, dv0, dv1, dv2, dv0dv1, dv0dv2)
    e, f, g, y0, y1, _ = _intervals(up0, up1, up2, du0, du1, du2, du0du1, du0du2)

    xx = x0 * x1
    yy = y0 * y1
    xxyy = xx * yy
    tmp = a * xxyy
    i10 = tmp + b * x1 * yy
    i11 = tmp + c * x0 * yy
    tmp = e * xxyy
    i20 = tmp + f * y1 * xx
    i21 = tmp + g * y0 * xx
    lo1 = np.minimum(i10, i11)
    hi1 = np.maximum(i10, i11)
    lo2 = np.minimum(i20, i21)
    hi2 = np.maximum(i20, i21)
    out = alive & ~cop1 & ~((hi1 < lo2) | (hi2 < lo1))

    for i in np.nonzero(cop1 & alive)[0]:
        out[i] = _coplanar_tri_tri(n1[i], v0[i], v1[i], v2[i], u0[i], u1[i], u2[i])
    return out


def tri_tri_intersect(v0, v1, v2, u0, u1, u2) -> bool:
    """Single triangle-pair test."""
    va = np.asarray([[v0, v1, v2]], dtype=np.float64)
    ua = np.asarray([[u0, u1, u2]], dtype=np.float64)
    return bool(tri_pairs_intersect(va, ua)[0])


_BOX_PAD = 1e-9  # keeps transformed boxes conservative under rounding


def _transform_points(pts, rot, trans):
    out = np.empty_like(pts)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    out[:, 0] = x * rot[0, 0] + y * rot[0, 1] + z * rot[0, 2] + trans[0]
    out[:, 1] = x * rot[1, 0] + y * rot[1, 1] + z * rot[1, 2] + trans[1]
    out[:, 2] = x * rot[2, 0] + y * rot[2, 1] + z * rot[2, 2] + trans[2]
    return out


def transform_boxes(lo, hi, rot, trans):
    """Conservative AABBs of rigidly transformed AABBs (Arvo's method)."""
    lo_r = lo[:, None, :] * rot[None, :, :]  # (n, 3out, 3in) contributions
    hi_r = hi[:, None, :] * rot[None, :, :]
    new_lo = np.minimum(lo_r, hi_r).sum(axis=2) + trans - _BOX_PAD
    new_hi = np.maximum(lo_r, hi_r).sum(axis=2) + trans + _BOX_PAD
    return new_lo, new_hi


def _boxes_disjoint(lo_a, hi_a, lo_b, hi_b):
    return ((hi_a < lo_b) | (hi_b < lo_a)).any(axis=-1)


def mesh_pair_intersect(a_verts, a_tris, a_bvh, rot, trans, b_verts, b_tris, b_bvh) -> bool:
    """BVH-vs-BVH mesh intersection; mesh a is posed by (rot, trans)."""
    a_min, a_max, a_child, a_range, a_prim = a_bvh
    b_min, b_max, b_child, b_range, b_prim = b_bvh
    rot = np.asarray(rot, dtype=np.float64)
    trans = np.asarray(trans, dtype=np.float64)
    aw = _transform_points(a_verts, rot, trans)
    a_min_w, a_max_w = transform_boxes(a_min, a_max, rot, trans)
    a_size = (a_max_w - a_min_w).sum(axis=1)
    b_size = (b_max - b_min).sum(axis=1)

    pa = np.zeros(1, dtype=np.int64)
    pb = np.zeros(1, dtype=np.int64)
    while pa.size:
        keep = ~_boxes_disjoint(a_min_w[pa], a_max_w[pa], b_min[pb], b_max[pb])
        pa = pa[keep]
        pb = pb[keep]
        if not pa.size:
            return False
        a_leaf = a_child[pa, 0] < 0
        b_leaf = b_child[pb, 0] < 0
        both = a_leaf & b_leaf
        if both.any():
            ia = []
            ib = []
            for na, nb in zip(pa[both], pb[both]):
                sa, ca = a_range[na]
                sb, cb = b_range[nb]
                ta = a_prim[sa:sa + ca]
                tb = b_prim[sb:sb + cb]
                ia.append(np.repeat(ta, tb.size))
                ib.append(np.tile(tb, ta.size))
            ia = np.concatenate(ia)
            ib = np.concatenate(ib)
            if tri_pairs_intersect(aw[a_tris[ia]], b_verts[b_tris[ib]]).any():
                return True
        pa = pa[~both]
        pb = pb[~both]
        if not pa.size:
            continue
        a_leaf = a_leaf[~both]
        split_a = ~a_leaf & (b_leaf[~both] | (a_size[pa] >= b_size[pb]))
        next_a = []
        next_b = []
        if split_a.any():
            kids = a_child[pa[split_a]]
            next_a.append(kids.reshape(-1))
            next_b.append(np.repeat(pb[split_a], 2))
        split_b = ~split_a
        if split_b.any():
            kids = b_child[pb[split_b]]
            next_b.append(kids.reshape(-1))
            next_a.append(np.repeat(pa[split_b], 2))
        pa = np.concatenate(next_a)
        pb = np.concatenate(next_b)
    return False


def brute_force_intersect(a_verts, a_tris, rot, trans, b_verts, b_tris,
                          max_pairs_per_batch: int = 65536) -> bool:
    """All-pairs triangle testing without acceleration; mesh a posed by (rot, trans)."""
    rot = np.asarray(rot, dtype=np.float64)
    trans = np.asarray(trans, dtype=np.float64)
    aw = _transform_points(a_verts, rot, trans)
    ta = aw[a_tris]
    tb = b_verts[b_tris]
    nb = tb.shape[0]
    rows = max(1, max_pairs_per_batch // nb)
    for start in range(0, ta.shape[0], rows):
        block = ta[start:start + rows]
        ia = np.repeat(np.arange(block.shape[0]), nb)
        ib = np.tile(np.arange(nb), block.shape[0])
        if tri_pairs_intersect(block[ia], tb[ib]).any():
            return True
    return False


def nearest_config(nodes, q, w_rot: float):
    """Index and distance of the node closest to q under the SE(3) metric."""
    nodes = np.asarray(nodes, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    dt = nodes[:, :3] - q[:3]
    trans = np.sqrt(dt[:, 0] * dt[:, 0] + dt[:, 1] * dt[:, 1] + dt[:, 2] * dt[:, 2])
    dot = np.abs(nodes[:, 3] * q[3] + nodes[:, 4] * q[4]
                 + nodes[:, 5] * q[5] + nodes[:, 6] * q[6])
    ang = 2.0 * np.arccos(np.minimum(dot, 1.0))
    dist = trans + w_rot * ang
    i = int(np.argmin(dist))
    return i, float(dist[i])
