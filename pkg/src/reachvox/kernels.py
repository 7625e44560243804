"""Compiled inner loops for kinematics, collision queries, and the sweep.

Everything here is numba @njit with nogil so worker threads scale past the
GIL. Geometry conventions match the rest of the package: rotations are 3x3
matrices, lengths are meters, triangles are pre-indexed (v0, v1, v2) arrays.

The BVH is passed as flat arrays (see collision.MeshAccelerator): internal
nodes have left/right child ids and count == 0; leaves have left == -1 and a
[start, start+count) slice into the triangle order array.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_EPS = 1e-12
_STACK = 128  # BVH traversal stack depth; ample for any realistic mesh


# ---------------------------------------------------------------------------
# small dense linear algebra (hand-rolled: 3x3 BLAS calls cost more than they save)


@njit(cache=True, nogil=True, inline="always")
def _mat3_mul(a, b, out):
    for i in range(3):
        for j in range(3):
            out[i, j] = a[i, 0] * b[0, j] + a[i, 1] * b[1, j] + a[i, 2] * b[2, j]


@njit(cache=True, nogil=True, inline="always")
def _mat3_vec(a, v, out):
    for i in range(3):
        out[i] = a[i, 0] * v[0] + a[i, 1] * v[1] + a[i, 2] * v[2]


@njit(cache=True, nogil=True, inline="always")
def _rodrigues(axis, angle, out):
    # axis must be unit length
    c = math.cos(angle)
    s = math.sin(angle)
    t = 1.0 - c
    x, y, z = axis[0], axis[1], axis[2]
    out[0, 0] = c + t * x * x
    out[0, 1] = t * x * y - s * z
    out[0, 2] = t * x * z + s * y
    out[1, 0] = t * x * y + s * z
    out[1, 1] = c + t * y * y
    out[1, 2] = t * y * z - s * x
    out[2, 0] = t * x * z - s * y
    out[2, 1] = t * y * z + s * x
    out[2, 2] = c + t * z * z


# ---------------------------------------------------------------------------
# forward kinematics


@njit(cache=True, nogil=True)
def fk_links(base_R, base_t, pt_R, pt_t, axes, q, link_R, link_t):
    """World frame of every link for one configuration (outputs into link_R/link_t)."""
    n = pt_t.shape[0]
    R = np.empty((3, 3))
    Rm = np.empty((3, 3))
    Ra = np.empty((3, 3))
    t = np.empty(3)
    tmp = np.empty(3)
    for i in range(3):
        t[i] = base_t[i]
        for j in range(3):
            R[i, j] = base_R[i, j]
    for l in range(n):
        _mat3_vec(R, pt_t[l], tmp)
        for i in range(3):
            t[i] += tmp[i]
        _mat3_mul(R, pt_R[l], Rm)
        _rodrigues(axes[l], q[l], Ra)
        _mat3_mul(Rm, Ra, R)
        for i in range(3):
            link_t[l, i] = t[i]
            for j in range(3):
                link_R[l, i, j] = R[i, j]


@njit(cache=True, nogil=True)
def fk_tips_batch(base_R, base_t, pt_R, pt_t, axes, tool_t, Q, out):
    """Tooltip world positions for a batch of configurations Q (B, n) -> out (B, 3)."""
    n = pt_t.shape[0]
    link_R = np.empty((n, 3, 3))
    link_t = np.empty((n, 3))
    tip = np.empty(3)
    for b in range(Q.shape[0]):
        fk_links(base_R, base_t, pt_R, pt_t, axes, Q[b], link_R, link_t)
        _mat3_vec(link_R[n - 1], tool_t, tip)
        for i in range(3):
            out[b, i] = link_t[n - 1, i] + tip[i]


# ---------------------------------------------------------------------------
# distance primitives


@njit(cache=True, nogil=True)
def point_tri_dist_sq(px, py, pz, a, b, c):
    """Squared distance from point to triangle (Ericson's closest-point regions)."""
    abx, aby, abz = b[0] - a[0], b[1] - a[1], b[2] - a[2]
    acx, acy, acz = c[0] - a[0], c[1] - a[1], c[2] - a[2]
    apx, apy, apz = px - a[0], py - a[1], pz - a[2]
    d1 = abx * apx + aby * apy + abz * apz
    d2 = acx * apx + acy * apy + acz * apz
    if d1 <= 0.0 and d2 <= 0.0:
        return apx * apx + apy * apy + apz * apz
    bpx, bpy, bpz = px - b[0], py - b[1], pz - b[2]
    d3 = abx * bpx + aby * bpy + abz * bpz
    d4 = acx * bpx + acy * bpy + acz * bpz
    if d3 >= 0.0 and d4 <= d3:
        return bpx * bpx + bpy * bpy + bpz * bpz
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        dx = apx - v * abx
        dy = apy - v * aby
        dz = apz - v * abz
        return dx * dx + dy * dy + dz * dz
    cpx, cpy, cpz = px - c[0], py - c[1], pz - c[2]
    d5 = abx * cpx + aby * cpy + abz * cpz
    d6 = acx * cpx + acy * cpy + acz * cpz
    if d6 >= 0.0 and d5 <= d6:
        return cpx * cpx + cpy * cpy + cpz * cpz
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        dx = apx - w * acx
        dy = apy - w * acy
        dz = apz - w * acz
        return dx * dx + dy * dy + dz * dz
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        dx = w * (c[0] - b[0]) - bpx
        dy = w * (c[1] - b[1]) - bpy
        dz = w * (c[2] - b[2]) - bpz
        return dx * dx + dy * dy + dz * dz
    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    dx = a[0] + abx * v + acx * w - px
    dy = a[1] + aby * v + acy * w - py
    dz = a[2] + abz * v + acz * w - pz
    return dx * dx + dy * dy + dz * dz


@njit(cache=True, nogil=True)
def seg_seg_dist_sq(p1, q1, p2, q2):
    """Squared distance between segments [p1,q1] and [p2,q2]."""
    d1x, d1y, d1z = q1[0] - p1[0], q1[1] - p1[1], q1[2] - p1[2]
    d2x, d2y, d2z = q2[0] - p2[0], q2[1] - p2[1], q2[2] - p2[2]
    rx, ry, rz = p1[0] - p2[0], p1[1] - p2[1], p1[2] - p2[2]
    a = d1x * d1x + d1y * d1y + d1z * d1z
    e = d2x * d2x + d2y * d2y + d2z * d2z
    f = d2x * rx + d2y * ry + d2z * rz
    if a <= _EPS and e <= _EPS:
        return rx * rx + ry * ry + rz * rz
    if a <= _EPS:
        s = 0.0
        t = min(max(f / e, 0.0), 1.0)
    else:
        c = d1x * rx + d1y * ry + d1z * rz
        if e <= _EPS:
            t = 0.0
            s = min(max(-c / a, 0.0), 1.0)
        else:
            b = d1x * d2x + d1y * d2y + d1z * d2z
            denom = a * e - b * b
            if denom > _EPS:
                s = min(max((b * f - c * e) / denom, 0.0), 1.0)
            else:
                s = 0.0
            t = b * s + f
            if t < 0.0:
                t = 0.0
                s = min(max(-c / a, 0.0), 1.0)
            elif t > e:
                t = 1.0
                s = min(max((b - c) / a, 0.0), 1.0)
            else:
                t = t / e
    cx = p1[0] + d1x * s - (p2[0] + d2x * t)
    cy = p1[1] + d1y * s - (p2[1] + d2y * t)
    cz = p1[2] + d1z * s - (p2[2] + d2z * t)
    return cx * cx + cy * cy + cz * cz


@njit(cache=True, nogil=True)
def seg_tri_dist_sq(p, q, a, b, c):
    """Squared distance between segment [p,q] and triangle (a,b,c)."""
    # proper plane crossing with interior hit => 0
    abx, aby, abz = b[0] - a[0], b[1] - a[1], b[2] - a[2]
    acx, acy, acz = c[0] - a[0], c[1] - a[1], c[2] - a[2]
    nx = aby * acz - abz * acy
    ny = abz * acx - abx * acz
    nz = abx * acy - aby * acx
    sp = nx * (p[0] - a[0]) + ny * (p[1] - a[1]) + nz * (p[2] - a[2])
    sq = nx * (q[0] - a[0]) + ny * (q[1] - a[1]) + nz * (q[2] - a[2])
    if sp * sq <= 0.0 and abs(sp - sq) > _EPS:
        t = sp / (sp - sq)
        ix = p[0] + t * (q[0] - p[0])
        iy = p[1] + t * (q[1] - p[1])
        iz = p[2] + t * (q[2] - p[2])
        # barycentric containment of the plane hit
        vx, vy, vz = ix - a[0], iy - a[1], iz - a[2]
        dot00 = acx * acx + acy * acy + acz * acz
        dot01 = acx * abx + acy * aby + acz * abz
        dot02 = acx * vx + acy * vy + acz * vz
        dot11 = abx * abx + aby * aby + abz * abz
        dot12 = abx * vx + aby * vy + abz * vz
        denom = dot00 * dot11 - dot01 * dot01
        if denom > _EPS:
            u = (dot11 * dot02 - dot01 * dot12) / denom
            v = (dot00 * dot12 - dot01 * dot02) / denom
            if u >= 0.0 and v >= 0.0 and u + v <= 1.0:
                return 0.0
    best = point_tri_dist_sq(p[0], p[1], p[2], a, b, c)
    d = point_tri_dist_sq(q[0], q[1], q[2], a, b, c)
    if d < best:
        best = d
    d = seg_seg_dist_sq(p, q, a, b)
    if d < best:
        best = d
    d = seg_seg_dist_sq(p, q, b, c)
    if d < best:
        best = d
    d = seg_seg_dist_sq(p, q, c, a)
    if d < best:
        best = d
    return best


@njit(cache=True, nogil=True, inline="always")
def _aabb_point_dist_sq(p, lo, hi):
    d = 0.0
    for i in range(3):
        if p[i] < lo[i]:
            d += (lo[i] - p[i]) ** 2
        elif p[i] > hi[i]:
            d += (p[i] - hi[i]) ** 2
    return d


@njit(cache=True, nogil=True, inline="always")
def _aabb_aabb_dist_sq(alo, ahi, blo, bhi):
    d = 0.0
    for i in range(3):
        if ahi[i] < blo[i]:
            d += (blo[i] - ahi[i]) ** 2
        elif bhi[i] < alo[i]:
            d += (alo[i] - bhi[i]) ** 2
    return d


# ---------------------------------------------------------------------------
# BVH queries


@njit(cache=True, nogil=True)
def bvh_point_dist_sq(p, tv0, tv1, tv2, nmin, nmax, nleft, nright, nstart, ncount, order):
    """Exact squared distance from point to the BVH'd triangle soup."""
    best = np.inf
    stack = np.empty(_STACK, np.int32)
    top = 0
    stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        node = stack[top]
        d = _aabb_point_dist_sq(p, nmin[node], nmax[node])
        if d >= best:
            continue
        if nleft[node] < 0:
            for k in range(nstart[node], nstart[node] + ncount[node]):
                t = order[k]
                dt = point_tri_dist_sq(p[0], p[1], p[2], tv0[t], tv1[t], tv2[t])
                if dt < best:
                    best = dt
        else:
            l = nleft[node]
            r = nright[node]
            dl = _aabb_point_dist_sq(p, nmin[l], nmax[l])
            dr = _aabb_point_dist_sq(p, nmin[r], nmax[r])
            # push farther child first so the nearer one is processed next
            if dl <= dr:
                if dr < best:
                    stack[top] = r
                    top += 1
                if dl < best:
                    stack[top] = l
                    top += 1
            else:
                if dl < best:
                    stack[top] = l
                    top += 1
                if dr < best:
                    stack[top] = r
                    top += 1
    return best


@njit(cache=True, nogil=True)
def bvh_point_within(p, cutoff_sq, tv0, tv1, tv2, nmin, nmax, nleft, nright, nstart, ncount, order):
    """True iff some triangle is within sqrt(cutoff_sq) of p (early exit)."""
    stack = np.empty(_STACK, np.int32)
    stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        node = stack[top]
        if _aabb_point_dist_sq(p, nmin[node], nmax[node]) > cutoff_sq:
            continue
        if nleft[node] < 0:
            for k in range(nstart[node], nstart[node] + ncount[node]):
                t = order[k]
                if point_tri_dist_sq(p[0], p[1], p[2], tv0[t], tv1[t], tv2[t]) <= cutoff_sq:
                    return True
        else:
            stack[top] = nleft[node]
            top += 1
            stack[top] = nright[node]
            top += 1
    return False


@njit(cache=True, nogil=True)
def bvh_seg_hit(pa, pb, radius, tv0, tv1, tv2, nmin, nmax, nleft, nright, nstart, ncount, order):
    """True iff min segment-to-triangle distance < radius (capsule intersects soup)."""
    slo = np.empty(3)
    shi = np.empty(3)
    for i in range(3):
        if pa[i] < pb[i]:
            slo[i] = pa[i]
            shi[i] = pb[i]
        else:
            slo[i] = pb[i]
            shi[i] = pa[i]
    r2 = radius * radius
    stack = np.empty(_STACK, np.int32)
    stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        node = stack[top]
        if _aabb_aabb_dist_sq(slo, shi, nmin[node], nmax[node]) >= r2:
            continue
        if nleft[node] < 0:
            for k in range(nstart[node], nstart[node] + ncount[node]):
                t = order[k]
                if seg_tri_dist_sq(pa, pb, tv0[t], tv1[t], tv2[t]) < r2:
                    return True
        else:
            stack[top] = nleft[node]
            top += 1
            stack[top] = nright[node]
            top += 1
    return False


@njit(cache=True, nogil=True)
def bvh_seg_dist_sq(pa, pb, tv0, tv1, tv2, nmin, nmax, nleft, nright, nstart, ncount, order):
    """Exact squared distance from segment to the BVH'd triangle soup."""
    slo = np.empty(3)
    shi = np.empty(3)
    for i in range(3):
        if pa[i] < pb[i]:
            slo[i] = pa[i]
            shi[i] = pb[i]
        else:
            slo[i] = pb[i]
            shi[i] = pa[i]
    best = np.inf
    stack = np.empty(_STACK, np.int32)
    stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        node = stack[top]
        if _aabb_aabb_dist_sq(slo, shi, nmin[node], nmax[node]) >= best:
            continue
        if nleft[node] < 0:
            for k in range(nstart[node], nstart[node] + ncount[node]):
                t = order[k]
                d = seg_tri_dist_sq(pa, pb, tv0[t], tv1[t], tv2[t])
                if d < best:
                    best = d
        else:
            stack[top] = nleft[node]
            top += 1
            stack[top] = nright[node]
            top += 1
    return best


# ---------------------------------------------------------------------------
# robot-vs-scene collision pieces shared by robot_collides and the sweep


@njit(cache=True, nogil=True)
def _link_world_capsules(l, link_R, link_t, caps_a, caps_b, caps_start, world_a, world_b):
    for k in range(caps_start[l], caps_start[l + 1]):
        for i in range(3):
            world_a[k, i] = (
                link_t[l, i]
                + link_R[l, i, 0] * caps_a[k, 0]
                + link_R[l, i, 1] * caps_a[k, 1]
                + link_R[l, i, 2] * caps_a[k, 2]
            )
            world_b[k, i] = (
                link_t[l, i]
                + link_R[l, i, 0] * caps_b[k, 0]
                + link_R[l, i, 1] * caps_b[k, 1]
                + link_R[l, i, 2] * caps_b[k, 2]
            )


@njit(cache=True, nogil=True)
def _link_collides(
    l,
    link_R,
    link_t,
    caps_a,
    caps_b,
    caps_r,
    caps_start,
    world_a,
    world_b,
    tv0,
    tv1,
    tv2,
    nmin,
    nmax,
    nleft,
    nright,
    nstart,
    ncount,
    order,
    has_scene,
):
    """Check link l's capsules vs scene and vs all earlier non-adjacent links.

    Assumes world capsules of links < l are already cached in world_a/world_b.
    Caches link l's own world capsules as a side effect.
    """
    _link_world_capsules(l, link_R, link_t, caps_a, caps_b, caps_start, world_a, world_b)
    for k in range(caps_start[l], caps_start[l + 1]):
        if has_scene and bvh_seg_hit(
            world_a[k], world_b[k], caps_r[k], tv0, tv1, tv2, nmin, nmax, nleft, nright, nstart, ncount, order
        ):
            return True
        for l2 in range(l - 1):  # adjacent link l-1 exempt
            for k2 in range(caps_start[l2], caps_start[l2 + 1]):
                rr = caps_r[k] + caps_r[k2]
                if seg_seg_dist_sq(world_a[k], world_b[k], world_a[k2], world_b[k2]) < rr * rr:
                    return True
    return False


@njit(cache=True, nogil=True)
def config_collides(
    link_R,
    link_t,
    caps_a,
    caps_b,
    caps_r,
    caps_start,
    tv0,
    tv1,
    tv2,
    nmin,
    nmax,
    nleft,
    nright,
    nstart,
    ncount,
    order,
    has_scene,
):
    """Full collision verdict for one posed configuration (scene + self)."""
    n = link_t.shape[0]
    ncaps = caps_a.shape[0]
    world_a = np.empty((ncaps, 3))
    world_b = np.empty((ncaps, 3))
    for l in range(n):
        if _link_collides(
            l, link_R, link_t, caps_a, caps_b, caps_r, caps_start, world_a, world_b,
            tv0, tv1, tv2, nmin, nmax, nleft, nright, nstart, ncount, order, has_scene,
        ):
            return True
    return False


# ---------------------------------------------------------------------------
# the hierarchical sweep


@njit(cache=True, nogil=True)
def sweep_range(
    o_lo,
    o_hi,
    values,
    counts,
    base_R,
    base_t,
    pt_R,
    pt_t,
    axes,
    tail_R,
    tail_t,
    tip_local,
    caps_a,
    caps_b,
    caps_r,
    caps_start,
    tv0,
    tv1,
    tv2,
    nmin,
    nmax,
    nleft,
    nright,
    nstart,
    ncount,
    order,
    has_scene,
    grid_origin,
    cell,
    dims,
    active,
    green,
    tail_reach,
    amin,
    amax,
    prune,
):
    """Depth-first enumeration over enumerated-joint values for outer indices [o_lo, o_hi).

    Marks green[flat_voxel] = True for every active voxel some collision-free
    configuration's tooltip lands in. With prune=True, subtrees are skipped
    when the partial chain already collides or when the remaining reach cannot
    touch the active region; both prunes only skip configurations that provably
    cannot mark a voxel, so the resulting map is identical to prune=False.
    """
    E = counts.shape[0]
    n = pt_t.shape[0]
    m = n - E
    ncaps = caps_a.shape[0]

    link_R = np.empty((n, 3, 3))
    link_t = np.empty((n, 3))
    FR = np.empty((E + 1, 3, 3))
    Ft = np.empty((E + 1, 3))
    world_a = np.empty((ncaps, 3))
    world_b = np.empty((ncaps, 3))
    Rm = np.empty((3, 3))
    Ra = np.empty((3, 3))
    Rn = np.empty((3, 3))
    tmp = np.empty(3)
    tip = np.empty(3)
    idx = np.empty(E, np.int64)

    for i in range(3):
        Ft[0, i] = base_t[i]
        for j in range(3):
            FR[0, i, j] = base_R[i, j]

    d0, d1, d2 = dims[0], dims[1], dims[2]
    leaves = 0

    level = 0
    idx[0] = o_lo
    while level >= 0:
        limit = o_hi if level == 0 else counts[level]
        if idx[level] >= limit:
            level -= 1
            if level >= 0:
                idx[level] += 1
            continue
        qv = values[level, idx[level]]
        # frame after this joint: F(level) . parent_transform . R(axis, qv)
        _mat3_vec(FR[level], pt_t[level], tmp)
        for i in range(3):
            link_t[level, i] = Ft[level, i] + tmp[i]
        _mat3_mul(FR[level], pt_R[level], Rm)
        _rodrigues(axes[level], qv, Ra)
        _mat3_mul(Rm, Ra, Rn)
        for i in range(3):
            for j in range(3):
                link_R[level, i, j] = Rn[i, j]

        if prune:
            reach = tail_reach[level]
            if _aabb_point_dist_sq(link_t[level], amin, amax) > reach * reach:
                idx[level] += 1
                continue
            if _link_collides(
                level, link_R, link_t, caps_a, caps_b, caps_r, caps_start, world_a, world_b,
                tv0, tv1, tv2, nmin, nmax, nleft, nright, nstart, ncount, order, has_scene,
            ):
                idx[level] += 1
                continue

        if level == E - 1:
            leaves += 1
            _mat3_vec(link_R[level], tip_local, tip)
            for i in range(3):
                tip[i] += link_t[level, i]
            fi = int(math.floor((tip[0] - grid_origin[0]) / cell))
            fj = int(math.floor((tip[1] - grid_origin[1]) / cell))
            fk = int(math.floor((tip[2] - grid_origin[2]) / cell))
            if 0 <= fi < d0 and 0 <= fj < d1 and 0 <= fk < d2:
                flat = (fi * d1 + fj) * d2 + fk
                if active[flat] and not green[flat]:
                    collides = False
                    if not prune:
                        # dense mode skipped the incremental checks; do them now
                        for l2 in range(E):
                            if _link_collides(
                                l2, link_R, link_t, caps_a, caps_b, caps_r, caps_start, world_a, world_b,
                                tv0, tv1, tv2, nmin, nmax, nleft, nright, nstart, ncount, order, has_scene,
                            ):
                                collides = True
                                break
                    if not collides:
                        for k in range(m):
                            lt = E + k
                            _mat3_mul(link_R[level], tail_R[k], Rm)
                            _mat3_vec(link_R[level], tail_t[k], tmp)
                            for i in range(3):
                                link_t[lt, i] = link_t[level, i] + tmp[i]
                                for j in range(3):
                                    link_R[lt, i, j] = Rm[i, j]
                            if _link_collides(
                                lt, link_R, link_t, caps_a, caps_b, caps_r, caps_start, world_a, world_b,
                                tv0, tv1, tv2, nmin, nmax, nleft, nright, nstart, ncount, order, has_scene,
                            ):
                                collides = True
                                break
                    if not collides:
                        green[flat] = True
            idx[level] += 1
        else:
            for i in range(3):
                Ft[level + 1, i] = link_t[level, i]
                for j in range(3):
                    FR[level + 1, i, j] = link_R[level, i, j]
            level += 1
            idx[level] = 0

    return leaves


@njit(cache=True, nogil=True)
def active_centers_mask(centers, cutoff, tv0, tv1, tv2, nmin, nmax, nleft, nright, nstart, ncount, order, out):
    """out[i] = True iff centers[i] is within cutoff of the soup surface."""
    c2 = cutoff * cutoff
    for i in range(centers.shape[0]):
        out[i] = bvh_point_within(
            centers[i], c2, tv0, tv1, tv2, nmin, nmax, nleft, nright, nstart, ncount, order
        )
