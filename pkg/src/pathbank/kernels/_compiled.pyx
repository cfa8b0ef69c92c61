# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled kernel backend.

Same triangle-triangle interval tests, BVH traversal, and nearest-neighbour
scan as the pure backend, written as scalar loops. Expressions are kept in
the same order and association as the NumPy code so both backends return
identical booleans on identical inputs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport acos, fabs, sqrt

cnp.import_array()

cdef double BOX_PAD = 1e-9  # keeps transformed boxes conservative under rounding
cdef int STACK_CAP = 4096


cdef inline double _dmin(double a, double b) noexcept nogil:
    return a if a < b else b


cdef inline double _dmax(double a, double b) noexcept nogil:
    return a if a > b else b


cdef bint _edge_edge(double ax, double ay, double v0x, double v0y,
                     double u0x, double u0y, double u1x, double u1y) noexcept nogil:
    cdef double bx = u0x - u1x
    cdef double by = u0y - u1y
    cdef double cx = v0x - u0x
    cdef double cy = v0y - u0y
    cdef double f = ay * bx - ax * by
    cdef double d = by * cx - bx * cy
    cdef double e
    if (f > 0.0 and d >= 0.0 and d <= f) or (f < 0.0 and d <= 0.0 and d >= f):
        e = ax * cy - ay * cx
        if f > 0.0:
            return e >= 0.0 and e <= f
        return e <= 0.0 and e >= f
    return False


cdef bint _edge_against_tri(const double* v0, const double* v1,
                            const double* u0, const double* u1, const double* u2,
                            int i0, int i1) noexcept nogil:
    cdef double ax = v1[i0] - v0[i0]
    cdef double ay = v1[i1] - v0[i1]
    if _edge_edge(ax, ay, v0[i0], v0[i1], u0[i0], u0[i1], u1[i0], u1[i1]):
        return True
    if _edge_edge(ax, ay, v0[i0], v0[i1], u1[i0], u1[i1], u2[i0], u2[i1]):
        return True
    return _edge_edge(ax, ay, v0[i0], v0[i1], u2[i0], u2[i1], u0[i0], u0[i1])


cdef bint _point_in_tri(const double* p, const double* u0, const double* u1,
                        const double* u2, int i0, int i1) noexcept nogil:
    cdef double a, b, c, d0, d1, d2
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


cdef bint _coplanar_tri_tri(const double* n,
                            const double* v0, const double* v1, const double* v2,
                            const double* u0, const double* u1, const double* u2) noexcept nogil:
    cdef double ax = fabs(n[0])
    cdef double ay = fabs(n[1])
    cdef double az = fabs(n[2])
    cdef int i0, i1
    if ax > ay:
        if ax > az:
            i0 = 1; i1 = 2
        else:
            i0 = 0; i1 = 1
    else:
        if az > ay:
            i0 = 0; i1 = 1
        else:
            i0 = 0; i1 = 2
    if _edge_against_tri(v0, v1, u0, u1, u2, i0, i1):
        return True
    if _edge_against_tri(v1, v2, u0, u1, u2, i0, i1):
        return True
    if _edge_against_tri(v2, v0, u0, u1, u2, i0, i1):
        return True
    return _point_in_tri(v0, u0, u1, u2, i0, i1) or _point_in_tri(u0, v0, v1, v2, i0, i1)


cdef bint _intervals(double vv0, double vv1, double vv2,
                     double d0, double d1, double d2,
                     double d0d1, double d0d2,
                     double* a, double* b, double* c,
                     double* x0, double* x1) noexcept nogil:
    """Interval endpoints on the intersection line; returns True when coplanar."""
    a[0] = 0.0; b[0] = 0.0; c[0] = 0.0; x0[0] = 0.0; x1[0] = 0.0
    if d0d1 > 0.0:
        a[0] = vv2; b[0] = (vv0 - vv2) * d2; c[0] = (vv1 - vv2) * d2
        x0[0] = d2 - d0; x1[0] = d2 - d1
    elif d0d2 > 0.0:
        a[0] = vv1; b[0] = (vv0 - vv1) * d1; c[0] = (vv2 - vv1) * d1
        x0[0] = d1 - d0; x1[0] = d1 - d2
    elif d1 * d2 > 0.0 or d0 != 0.0:
        a[0] = vv0; b[0] = (vv1 - vv0) * d0; c[0] = (vv2 - vv0) * d0
        x0[0] = d0 - d1; x1[0] = d0 - d2
    elif d1 != 0.0:
        a[0] = vv1; b[0] = (vv0 - vv1) * d1; c[0] = (vv2 - vv1) * d1
        x0[0] = d1 - d0; x1[0] = d1 - d2
    elif d2 != 0.0:
        a[0] = vv2; b[0] = (vv0 - vv2) * d2; c[0] = (vv1 - vv2) * d2
        x0[0] = d2 - d0; x1[0] = d2 - d1
    else:
        return True
    return False


cdef bint _tri_tri(const double* v0, const double* v1, const double* v2,
                   const double* u0, const double* u1, const double* u2) noexcept nogil:
    cdef double e1x, e1y, e1z, e2x, e2y, e2z
    cdef double n1x, n1y, n1z, n2x, n2y, n2z
    cdef double d1, d2
    cdef double du0, du1, du2, dv0, dv1, dv2
    cdef double du0du1, du0du2, dv0dv1, dv0dv2
    cdef double dx, dy, dz, m
    cdef int index
    cdef double vp0, vp1, vp2, up0, up1, up2
    cdef double a, b, c, x0, x1
    cdef double e, f, g, y0, y1
    cdef double xx, yy, xxyy, tmp
    cdef double i10, i11, i20, i21, lo1, hi1, lo2, hi2
    cdef double n1arr[3]

    e1x = v1[0] - v0[0]; e1y = v1[1] - v0[1]; e1z = v1[2] - v0[2]
    e2x = v2[0] - v0[0]; e2y = v2[1] - v0[1]; e2z = v2[2] - v0[2]
    n1x = e1y * e2z - e1z * e2y
    n1y = e1z * e2x - e1x * e2z
    n1z = e1x * e2y - e1y * e2x
    d1 = -(n1x * v0[0] + n1y * v0[1] + n1z * v0[2])
    du0 = n1x * u0[0] + n1y * u0[1] + n1z * u0[2] + d1
    du1 = n1x * u1[0] + n1y * u1[1] + n1z * u1[2] + d1
    du2 = n1x * u2[0] + n1y * u2[1] + n1z * u2[2] + d1
    du0du1 = du0 * du1
    du0du2 = du0 * du2
    if du0du1 > 0.0 and du0du2 > 0.0:
        return False

    e1x = u1[0] - u0[0]; e1y = u1[1] - u0[1]; e1z = u1[2] - u0[2]
    e2x = u2[0] - u0[0]; e2y = u2[1] - u0[1]; e2z = u2[2] - u0[2]
    n2x = e1y * e2z - e1z * e2y
    n2y = e1z * e2x - e1x * e2z
    n2z = e1x * e2y - e1y * e2x
    d2 = -(n2x * u0[0] + n2y * u0[1] + n2z * u0[2])
    dv0 = n2x * v0[0] + n2y * v0[1] + n2z * v0[2] + d2
    dv1 = n2x * v1[0] + n2y * v1[1] + n2z * v1[2] + d2
    dv2 = n2x * v2[0] + n2y * v2[1] + n2z * v2[2] + d2
    dv0dv1 = dv0 * dv1
    dv0dv2 = dv0 * dv2
    if dv0dv1 > 0.0 and dv0dv2 > 0.0:
        return False

    dx = n1y * n2z - n1z * n2y
    dy = n1z * n2x - n1x * n2z
    dz = n1x * n2y - n1y * n2x
    index = 0
    m = fabs(dx)
    if fabs(dy) > m:
        m = fabs(dy)
        index = 1
    if fabs(dz) > m:
        index = 2

    if index == 0:
        vp0 = v0[0]; vp1 = v1[0]; vp2 = v2[0]
        up0 = u0[0]; up1 = u1[0]; up2 = u2[0]
    elif index == 1:
        vp0 = v0[1]; vp1 = v1[1]; vp2 = v2[1]
        up0 = u0[1]; up1 = u1[1]; up2 = u2[1]
    else:
        vp0 = v0[2]; vp1 = v1[2]; vp2 = v2[2]
        up0 = u0[2]; up1 = u1[2]; up2 = u2[2]

    if _intervals(vp0, vp1, vp2, dv0, dv1, dv2, dv0dv1, dv0dv2,
                  &a, &b, &c, &x0, &x1):
        n1arr[0] = n1x; n1arr[1] = n1y; n1arr[2] = n1z
        return _coplanar_tri_tri(n1arr, v0, v1, v2, u0, u1, u2)
    _intervals(up0, up1, up2, du0, du1, du2, du0du1, du0du2,
               &e, &f, &g, &y0, &y1)

    xx = x0 * x1
    yy = y0 * y1
    xxyy = xx * yy
    tmp = a * xxyy
    i10 = tmp + b * x1 * yy
    i11 = tmp + c * x0 * yy
    tmp = e * xxyy
    i20 = tmp + f * y1 * xx
    i21 = tmp + g * y0 * xx
    lo1 = _dmin(i10, i11)
    hi1 = _dmax(i10, i11)
    lo2 = _dmin(i20, i21)
    hi2 = _dmax(i20, i21)
    return not (hi1 < lo2 or hi2 < lo1)


def tri_tri_intersect(v0, v1, v2, u0, u1, u2):
    """Single triangle-pair test."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] va = np.ascontiguousarray(
        [v0, v1, v2, u0, u1, u2], dtype=np.float64)
    return bool(_tri_tri(&va[0, 0], &va[1, 0], &va[2, 0],
                         &va[3, 0], &va[4, 0], &va[5, 0]))


cdef void _transform_verts(const double[:, ::1] src, const double[:, ::1] rot,
                           const double[::1] trans, double[:, ::1] dst) noexcept nogil:
    cdef Py_ssize_t i
    cdef double x, y, z
    for i in range(src.shape[0]):
        x = src[i, 0]; y = src[i, 1]; z = src[i, 2]
        dst[i, 0] = x * rot[0, 0] + y * rot[0, 1] + z * rot[0, 2] + trans[0]
        dst[i, 1] = x * rot[1, 0] + y * rot[1, 1] + z * rot[1, 2] + trans[1]
        dst[i, 2] = x * rot[2, 0] + y * rot[2, 1] + z * rot[2, 2] + trans[2]


cdef void _transform_boxes(const double[:, ::1] lo, const double[:, ::1] hi,
                           const double[:, ::1] rot, const double[::1] trans,
                           double[:, ::1] out_lo, double[:, ::1] out_hi) noexcept nogil:
    cdef Py_ssize_t i
    cdef int o
    cdef double m0, m1, m2, p0, p1, p2, rl, rh
    for i in range(lo.shape[0]):
        for o in range(3):
            rl = lo[i, 0] * rot[o, 0]; rh = hi[i, 0] * rot[o, 0]
            m0 = _dmin(rl, rh); p0 = _dmax(rl, rh)
            rl = lo[i, 1] * rot[o, 1]; rh = hi[i, 1] * rot[o, 1]
            m1 = _dmin(rl, rh); p1 = _dmax(rl, rh)
            rl = lo[i, 2] * rot[o, 2]; rh = hi[i, 2] * rot[o, 2]
            m2 = _dmin(rl, rh); p2 = _dmax(rl, rh)
            out_lo[i, o] = m0 + m1 + m2 + trans[o] - BOX_PAD
            out_hi[i, o] = p0 + p1 + p2 + trans[o] + BOX_PAD


cdef inline bint _boxes_overlap(const double[:, ::1] lo_a, const double[:, ::1] hi_a,
                                Py_ssize_t ia,
                                const double[:, ::1] lo_b, const double[:, ::1] hi_b,
                                Py_ssize_t ib) noexcept nogil:
    if hi_a[ia, 0] < lo_b[ib, 0] or hi_b[ib, 0] < lo_a[ia, 0]:
        return False
    if hi_a[ia, 1] < lo_b[ib, 1] or hi_b[ib, 1] < lo_a[ia, 1]:
        return False
    if hi_a[ia, 2] < lo_b[ib, 2] or hi_b[ib, 2] < lo_a[ia, 2]:
        return False
    return True


cdef bint _leaf_pair(const double[:, ::1] aw, const cnp.int32_t[:, ::1] a_tris,
                     const cnp.int32_t[::1] a_prim, int sa, int ca,
                     const double[:, ::1] bv, const cnp.int32_t[:, ::1] b_tris,
                     const cnp.int32_t[::1] b_prim, int sb, int cb) noexcept nogil:
    cdef int ii, jj, ta, tb
    for ii in range(sa, sa + ca):
        ta = a_prim[ii]
        for jj in range(sb, sb + cb):
            tb = b_prim[jj]
            if _tri_tri(&aw[a_tris[ta, 0], 0], &aw[a_tris[ta, 1], 0],
                        &aw[a_tris[ta, 2], 0],
                        &bv[b_tris[tb, 0], 0], &bv[b_tris[tb, 1], 0],
                        &bv[b_tris[tb, 2], 0]):
                return True
    return False


def mesh_pair_intersect(a_verts, a_tris, a_bvh, rot, trans, b_verts, b_tris, b_bvh):
    """BVH-vs-BVH mesh intersection; mesh a is posed by (rot, trans)."""
    a_min, a_max, a_child, a_range, a_prim = a_bvh
    b_min, b_max, b_child, b_range, b_prim = b_bvh

    cdef const double[:, ::1] av = np.ascontiguousarray(a_verts, dtype=np.float64)
    cdef const cnp.int32_t[:, ::1] at = np.ascontiguousarray(a_tris, dtype=np.int32)
    cdef const double[:, ::1] bv = np.ascontiguousarray(b_verts, dtype=np.float64)
    cdef const cnp.int32_t[:, ::1] bt = np.ascontiguousarray(b_tris, dtype=np.int32)
    cdef const double[:, ::1] rot_m = np.ascontiguousarray(rot, dtype=np.float64)
    cdef const double[::1] trans_v = np.ascontiguousarray(trans, dtype=np.float64)

    cdef const double[:, ::1] amin = np.ascontiguousarray(a_min, dtype=np.float64)
    cdef const double[:, ::1] amax = np.ascontiguousarray(a_max, dtype=np.float64)
    cdef const cnp.int32_t[:, ::1] achild = np.ascontiguousarray(a_child, dtype=np.int32)
    cdef const cnp.int32_t[:, ::1] arange = np.ascontiguousarray(a_range, dtype=np.int32)
    cdef const cnp.int32_t[::1] aprim = np.ascontiguousarray(a_prim, dtype=np.int32)
    cdef const double[:, ::1] bmin = np.ascontiguousarray(b_min, dtype=np.float64)
    cdef const double[:, ::1] bmax = np.ascontiguousarray(b_max, dtype=np.float64)
    cdef const cnp.int32_t[:, ::1] bchild = np.ascontiguousarray(b_child, dtype=np.int32)
    cdef const cnp.int32_t[:, ::1] brange = np.ascontiguousarray(b_range, dtype=np.int32)
    cdef const cnp.int32_t[::1] bprim = np.ascontiguousarray(b_prim, dtype=np.int32)

    cdef double[:, ::1] aw = np.empty((av.shape[0], 3), dtype=np.float64)
    cdef double[:, ::1] amin_w = np.empty((amin.shape[0], 3), dtype=np.float64)
    cdef double[:, ::1] amax_w = np.empty((amin.shape[0], 3), dtype=np.float64)

    cdef cnp.int32_t[:, ::1] stack = np.empty((STACK_CAP, 2), dtype=np.int32)
    cdef int sp = 0
    cdef int na, nb
    cdef bint a_leaf, b_leaf, split_a
    cdef double a_size, b_size
    cdef bint hit = False
    cdef bint overflow = False

    with nogil:
        _transform_verts(av, rot_m, trans_v, aw)
        _transform_boxes(amin, amax, rot_m, trans_v, amin_w, amax_w)
        stack[0, 0] = 0
        stack[0, 1] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            na = stack[sp, 0]
            nb = stack[sp, 1]
            if not _boxes_overlap(amin_w, amax_w, na, bmin, bmax, nb):
                continue
            a_leaf = achild[na, 0] < 0
            b_leaf = bchild[nb, 0] < 0
            if a_leaf and b_leaf:
                if _leaf_pair(aw, at, aprim, arange[na, 0], arange[na, 1],
                              bv, bt, bprim, brange[nb, 0], brange[nb, 1]):
                    hit = True
                    break
                continue
            a_size = (amax_w[na, 0] - amin_w[na, 0]) + (amax_w[na, 1] - amin_w[na, 1]) \
                + (amax_w[na, 2] - amin_w[na, 2])
            b_size = (bmax[nb, 0] - bmin[nb, 0]) + (bmax[nb, 1] - bmin[nb, 1]) \
                + (bmax[nb, 2] - bmin[nb, 2])
            split_a = (not a_leaf) and (b_leaf or a_size >= b_size)
            if sp + 2 > STACK_CAP:
                overflow = True
                break
            if split_a:
                stack[sp, 0] = achild[na, 0]; stack[sp, 1] = nb
                stack[sp + 1, 0] = achild[na, 1]; stack[sp + 1, 1] = nb
            else:
                stack[sp, 0] = na; stack[sp, 1] = bchild[nb, 0]
                stack[sp + 1, 0] = na; stack[sp + 1, 1] = bchild[nb, 1]
            sp += 2
    if overflow:
        raise RuntimeError("BVH traversal stack overflow")
    return bool(hit)


def brute_force_intersect(a_verts, a_tris, rot, trans, b_verts, b_tris,
                          max_pairs_per_batch=65536):
    """All-pairs triangle testing without acceleration; mesh a posed by (rot, trans)."""
    cdef const double[:, ::1] av = np.ascontiguousarray(a_verts, dtype=np.float64)
    cdef const cnp.int32_t[:, ::1] at = np.ascontiguousarray(a_tris, dtype=np.int32)
    cdef const double[:, ::1] bv = np.ascontiguousarray(b_verts, dtype=np.float64)
    cdef const cnp.int32_t[:, ::1] bt = np.ascontiguousarray(b_tris, dtype=np.int32)
    cdef const double[:, ::1] rot_m = np.ascontiguousarray(rot, dtype=np.float64)
    cdef const double[::1] trans_v = np.ascontiguousarray(trans, dtype=np.float64)
    cdef double[:, ::1] aw = np.empty((av.shape[0], 3), dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef bint hit = False
    with nogil:
        _transform_verts(av, rot_m, trans_v, aw)
        for i in range(at.shape[0]):
            for j in range(bt.shape[0]):
                if _tri_tri(&aw[at[i, 0], 0], &aw[at[i, 1], 0], &aw[at[i, 2], 0],
                            &bv[bt[j, 0], 0], &bv[bt[j, 1], 0], &bv[bt[j, 2], 0]):
                    hit = True
                    break
            if hit:
                break
    return bool(hit)


def nearest_config(nodes, q, double w_rot):
    """Index and distance of the node closest to q under the SE(3) metric."""
    cdef const double[:, ::1] nd = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef Py_ssize_t i, best = 0
    cdef double dx, dy, dz, trans, dot, ang, d
    cdef double best_d = float("inf")
    for i in range(nd.shape[0]):
        dx = nd[i, 0] - qv[0]
        dy = nd[i, 1] - qv[1]
        dz = nd[i, 2] - qv[2]
        trans = sqrt(dx * dx + dy * dy + dz * dz)
        dot = fabs(nd[i, 3] * qv[3] + nd[i, 4] * qv[4]
                   + nd[i, 5] * qv[5] + nd[i, 6] * qv[6])
        if dot > 1.0:
            dot = 1.0
        ang = 2.0 * acos(dot)
        d = trans + w_rot * ang
        if d < best_d:
            best_d = d
            best = i
    return int(best), float(best_d)
