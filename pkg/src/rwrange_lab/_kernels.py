"""Compiled inner loops: the grounded-Laplacian PCG solve and escape trials.

Both kernels are deterministic functions of their arguments.  The escape
kernel carries its own tiny counter-based generator (splitmix64) keyed by
(seed, point index, trial index) so that capacity runs are reproducible no
matter how trials are scheduled.  Everything here is uint64-exact; keep the
casts explicit, numpy promotes mixed uint64/int arithmetic to float64.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_FNV_OFFSET = np.uint64(0xCBF29CE484222325)
_FNV_PRIME = np.uint64(0x100000001B3)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)
_SH30 = np.uint64(30)
_SH27 = np.uint64(27)
_SH31 = np.uint64(31)
_SH11 = np.uint64(11)
_INV53 = 1.0 / float(1 << 53)


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _SH30)) * _MIX1
    z = (z ^ (z >> _SH27)) * _MIX2
    return z ^ (z >> _SH31)


@njit(cache=True, inline="always")
def _stream_state(seed, point_idx, trial_idx):
    z = _mix64(np.uint64(seed) + _GOLD * (np.uint64(point_idx) + _ONE))
    return _mix64(z + _GOLD * (np.uint64(trial_idx) + _ONE))


@njit(cache=True, inline="always")
def _next_u64(state):
    state = state + _GOLD
    return state, _mix64(state)


@njit(cache=True, inline="always")
def _coord_hash(row, d):
    h = _FNV_OFFSET
    for j in range(d):
        h = (h ^ np.uint64(row[j])) * _FNV_PRIME
    return _mix64(h)


@njit(cache=True)
def build_point_table(pts, log2_size):
    """Open-addressing table of point indices, slot 0 meaning empty."""
    m, d = pts.shape
    size = 1 << log2_size
    mask = np.uint64(size - 1)
    table = np.zeros(size, dtype=np.int64)
    for i in range(m):
        h = _coord_hash(pts[i], d) & mask
        while table[h] != 0:
            h = (h + _ONE) & mask
        table[h] = i + 1
    return table


@njit(cache=True, inline="always")
def _in_set(pos, pts, table, mask, d):
    h = _coord_hash(pos, d) & mask
    while True:
        entry = table[h]
        if entry == 0:
            return False
        idx = entry - 1
        match = True
        for j in range(d):
            if pts[idx, j] != pos[j]:
                match = False
                break
        if match:
            return True
        h = (h + _ONE) & mask


@njit(cache=True)
def escape_trials(
    pts,
    table,
    log2_size,
    centroid,
    hull_dist2,
    ff_dist2,
    ball_dist2,
    reentry_radius,
    reentry_pow,
    ball_pow,
    harmonic_exponent,
    seed,
    trials,
    fast_forward,
):
    """Count, per source point, walks that leave the escape ball before revisiting the set.

    The walk is simulated step by step while its squared distance from the
    centroid is at most ``ff_dist2``.  Beyond that radius no point of the set
    can be hit before re-entering, so the excursion across the empty annulus
    is resolved in one draw using the harmonic hitting probability
    (r^(2-d) - R^(2-d)) / (rho^(2-d) - R^(2-d)) between the re-entry sphere
    rho and the escape ball R; a re-entering walk resumes exact simulation at
    a uniformly directed lattice point of radius rho.  With ``fast_forward``
    off the walk is stepped exactly all the way to the escape ball.
    """
    m, d = pts.shape
    mask = np.uint64((1 << log2_size) - 1)
    escapes = np.zeros(m, dtype=np.int64)
    total_steps = 0
    pos = np.empty(d, dtype=np.int64)
    diff = np.empty(d, dtype=np.int64)
    direction = np.empty(d, dtype=np.float64)
    two_d = np.uint64(2 * d)
    for i in range(m):
        for t in range(trials):
            state = _stream_state(seed, i, t)
            for j in range(d):
                pos[j] = pts[i, j]
                diff[j] = pos[j] - centroid[j]
            dist2 = 0
            for j in range(d):
                dist2 += diff[j] * diff[j]
            alive = True
            escaped = False
            while alive:
                # exact lattice steps inside the fast-forward radius
                while True:
                    state, bits = _next_u64(state)
                    move = bits % two_d
                    axis = int(move >> _ONE)
                    step = 1 - 2 * int(move & _ONE)
                    old = diff[axis]
                    diff[axis] = old + step
                    pos[axis] += step
                    dist2 += 2 * old * step + 1
                    total_steps += 1
                    if dist2 <= hull_dist2:
                        if _in_set(pos, pts, table, mask, d):
                            alive = False
                            break
                    elif fast_forward:
                        if dist2 > ff_dist2:
                            break
                    elif dist2 > ball_dist2:
                        alive = False
                        escaped = True
                        break
                if not alive:
                    break
                # one harmonic draw across the annulus
                r = np.sqrt(float(dist2))
                p_reenter = (r**harmonic_exponent - ball_pow) / (reentry_pow - ball_pow)
                state, bits = _next_u64(state)
                u = float(bits >> _SH11) * _INV53
                if u >= p_reenter:
                    alive = False
                    escaped = True
                    break
                # re-enter on the sphere of radius reentry_radius
                while True:
                    norm2 = 0.0
                    for j in range(d):
                        state, bits = _next_u64(state)
                        v = 2.0 * (float(bits >> _SH11) * _INV53) - 1.0
                        direction[j] = v
                        norm2 += v * v
                    if 1e-12 < norm2 <= 1.0:
                        break
                scale = reentry_radius / np.sqrt(norm2)
                dist2 = 0
                for j in range(d):
                    offset = np.int64(np.rint(direction[j] * scale))
                    diff[j] = offset
                    pos[j] = centroid[j] + offset
                    dist2 += offset * offset
            if escaped:
                escapes[i] += 1
    return escapes, total_steps


@njit(cache=True)
def pcg_grounded(indptr, indices, source, sink, rel_tolerance, max_iterations, jacobi):
    """Conjugate gradient on the Laplacian with the sink row/column removed.

    Solves L' v = e_source for the grounded system (v at the sink is fixed to
    zero) and returns (v, final residual, iterations, converged).  The right
    hand side has unit norm, so the absolute residual is the relative one.
    """
    nv = indptr.size - 1
    x = np.zeros(nv)
    r = np.zeros(nv)
    z = np.zeros(nv)
    ap = np.zeros(nv)
    inv_diag = np.empty(nv)
    for i in range(nv):
        degree = indptr[i + 1] - indptr[i]
        inv_diag[i] = 1.0 / degree if degree > 0 else 0.0
    r[source] = 1.0
    if jacobi:
        z[source] = inv_diag[source]
    else:
        z[source] = 1.0
    p = z.copy()
    rz = r[source] * z[source]
    residual = 1.0
    for it in range(max_iterations):
        for i in range(nv):
            if i == sink:
                ap[i] = 0.0
                continue
            s = (indptr[i + 1] - indptr[i]) * p[i]
            for jj in range(indptr[i], indptr[i + 1]):
                j = indices[jj]
                if j != sink:
                    s -= p[j]
            ap[i] = s
        p_ap = 0.0
        for i in range(nv):
            p_ap += p[i] * ap[i]
        if p_ap <= 0.0:
            return x, residual, it, False
        alpha = rz / p_ap
        rr = 0.0
        for i in range(nv):
            x[i] += alpha * p[i]
            r[i] -= alpha * ap[i]
            rr += r[i] * r[i]
        residual = np.sqrt(rr)
        if residual <= rel_tolerance:
            return x, residual, it + 1, True
        rz_next = 0.0
        for i in range(nv):
            zi = r[i] * inv_diag[i] if jacobi else r[i]
            z[i] = zi
            rz_next += r[i] * zi
        beta = rz_next / rz
        rz = rz_next
        for i in range(nv):
            p[i] = z[i] + beta * p[i]
    return x, residual, max_iterations, False
