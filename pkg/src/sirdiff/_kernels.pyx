# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scan kernels: ball-hit detection, occupation and coverage.

Semantics must stay in lockstep with the numpy fallback in ``_kernels_py``;
the dispatcher in ``kernels`` picks whichever backend is available.
"""

from libc.math cimport exp, log1p, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()


def first_hit(double[:, ::1] pos, double[::1] target, double radius, double dt,
              bridge_u=None, double step_var=0.0):
    """First time the moving `radius`-ball around the path covers `target`.

    `pos` holds path positions at times 0, dt, 2*dt, ...  The scan reports the
    earliest grid time whose position is within `radius` of `target`, refined
    by one bisection level on the bracketing step (the midpoint of the segment
    decides between (k-1/2)*dt and k*dt).

    When `bridge_u` (uniforms, one per step) is given, a between-grid crossing
    of the distance process is accepted on step k with the Brownian-bridge
    probability exp(-2*a*b/step_var), a and b the clearances at the step
    endpoints.  `step_var` is the per-coordinate variance accrued over one
    step (sigma^2 * dt); zero means "use dt".

    Returns the hit time, or -1.0 if the target is never covered.
    """
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t d = pos.shape[1]
    cdef Py_ssize_t k, j
    cdef double r2 = radius * radius
    cdef double s_prev, s_cur, sm, diff, a, b, p, skip2
    cdef bint use_bridge = bridge_u is not None
    cdef double[::1] u
    cdef Py_ssize_t n_u = 0

    if use_bridge:
        u = bridge_u
        n_u = u.shape[0]
    if step_var <= 0.0:
        step_var = dt
    # crossing probability is below 1e-18 once both clearances exceed
    # sqrt(20.8 * step_var); steps farther out skip the exp entirely
    skip2 = radius + sqrt(20.8 * step_var)
    skip2 = skip2 * skip2
    if n == 0:
        return -1.0

    s_prev = 0.0
    for j in range(d):
        diff = target[j] - pos[0, j]
        s_prev += diff * diff
    if s_prev <= r2:
        return 0.0

    for k in range(1, n):
        s_cur = 0.0
        for j in range(d):
            diff = target[j] - pos[k, j]
            s_cur += diff * diff
        if s_cur <= r2:
            sm = 0.0
            for j in range(d):
                diff = target[j] - 0.5 * (pos[k - 1, j] + pos[k, j])
                sm += diff * diff
            if sm <= r2:
                return (k - 0.5) * dt
            return k * dt
        if use_bridge and k - 1 < n_u and (s_cur <= skip2 or s_prev <= skip2):
            a = sqrt(s_prev) - radius
            b = sqrt(s_cur) - radius
            p = exp(-2.0 * a * b / step_var)
            if u[k - 1] < p:
                return (k - 0.5) * dt
        s_prev = s_cur
    return -1.0


def occupation(double[:, ::1] pos, double[::1] target, double radius, double dt):
    """Time the `radius`-ball around the path covers `target` (trapezoid rule).

    Each step contributes dt * (inside(k-1) + inside(k)) / 2.
    """
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t d = pos.shape[1]
    cdef Py_ssize_t k, j
    cdef double r2 = radius * radius
    cdef double s, diff, total = 0.0
    cdef double in_prev, in_cur

    if n < 2:
        return 0.0
    s = 0.0
    for j in range(d):
        diff = target[j] - pos[0, j]
        s += diff * diff
    in_prev = 1.0 if s <= r2 else 0.0
    for k in range(1, n):
        s = 0.0
        for j in range(d):
            diff = target[j] - pos[k, j]
            s += diff * diff
        in_cur = 1.0 if s <= r2 else 0.0
        total += 0.5 * (in_prev + in_cur) * dt
        in_prev = in_cur
    return total


def covered_mask(double[:, ::1] points, double[:, ::1] pos, double radius):
    """For each query point, 1 if it lies within `radius` of the path polyline.

    Distances are to the segments between consecutive positions (clamped
    projection), which removes most of the vertex-only discretization bias of
    tube volumes; a single position degenerates to a point check.
    """
    cdef Py_ssize_t m = points.shape[0]
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t i, k, j
    cdef double r2 = radius * radius
    cdef double s, diff, dot, vv, tt
    out_arr = np.zeros(m, dtype=np.uint8)
    cdef cnp.uint8_t[::1] out = out_arr

    if n == 1:
        for i in range(m):
            s = 0.0
            for j in range(d):
                diff = points[i, j] - pos[0, j]
                s += diff * diff
            if s <= r2:
                out[i] = 1
        return out_arr

    for i in range(m):
        for k in range(n - 1):
            dot = 0.0
            vv = 0.0
            for j in range(d):
                diff = pos[k + 1, j] - pos[k, j]
                dot += (points[i, j] - pos[k, j]) * diff
                vv += diff * diff
            if vv > 0.0:
                tt = dot / vv
                if tt < 0.0:
                    tt = 0.0
                elif tt > 1.0:
                    tt = 1.0
            else:
                tt = 0.0
            s = 0.0
            for j in range(d):
                diff = points[i, j] - (pos[k, j] + tt * (pos[k + 1, j] - pos[k, j]))
                s += diff * diff
            if s <= r2:
                out[i] = 1
                break
    return out_arr


def covered_prob(double[:, ::1] points, double[:, ::1] pos, double radius,
                 double step_var):
    """Coverage probability of each query point given the discrete path.

    1 when the point is within `radius` of the polyline; otherwise
    1 - prod over steps of (1 - exp(-2*a*b/step_var)), the Brownian-bridge
    probability that the distance process dipped below the radius between
    grid points (a, b the endpoint clearances).  Steps with both clearances
    above sqrt(20.8*step_var) contribute nothing (prob < 1e-18).
    """
    cdef Py_ssize_t m = points.shape[0]
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t i, k, j
    cdef double r2 = radius * radius
    cdef double s, s_prev, s_cur, diff, dot, vv, tt, a, b, log_miss, skip2
    out_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] out = out_arr

    skip2 = radius + sqrt(20.8 * step_var)
    skip2 = skip2 * skip2

    if n == 1:
        for i in range(m):
            s = 0.0
            for j in range(d):
                diff = points[i, j] - pos[0, j]
                s += diff * diff
            if s <= r2:
                out[i] = 1.0
        return out_arr

    for i in range(m):
        log_miss = 0.0
        s_prev = 0.0
        for j in range(d):
            diff = points[i, j] - pos[0, j]
            s_prev += diff * diff
        if s_prev <= r2:
            out[i] = 1.0
            continue
        for k in range(n - 1):
            s_cur = 0.0
            for j in range(d):
                diff = points[i, j] - pos[k + 1, j]
                s_cur += diff * diff
            if s_cur <= r2:
                log_miss = 1.0  # sentinel: certain hit
                break
            # chord check (projection clamped to the segment interior)
            dot = 0.0
            vv = 0.0
            for j in range(d):
                diff = pos[k + 1, j] - pos[k, j]
                dot += (points[i, j] - pos[k, j]) * diff
                vv += diff * diff
            if vv > 0.0 and 0.0 < dot < vv:
                tt = dot / vv
                s = 0.0
                for j in range(d):
                    diff = points[i, j] - (pos[k, j] + tt * (pos[k + 1, j] - pos[k, j]))
                    s += diff * diff
                if s <= r2:
                    log_miss = 1.0
                    break
            if s_prev <= skip2 or s_cur <= skip2:
                a = sqrt(s_prev) - radius
                b = sqrt(s_cur) - radius
                log_miss += log1p(-exp(-2.0 * a * b / step_var))
            s_prev = s_cur
        if log_miss > 0.0:
            out[i] = 1.0
        else:
            out[i] = -(exp(log_miss) - 1.0)
    return out_arr


def exposure_sum(double[:, ::1] points, double[:, ::1] pos, double dt,
                 int kind, double p0):
    """Trapezoid-weighted kernel integral along the path for each query point.

    kind 0: indicator of the closed `p0`-ball; kind 1: exp(-dist^2 / (2*p0^2)).
    Returns integral over path time of mu(point - path(s)) ds.
    """
    cdef Py_ssize_t m = points.shape[0]
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t i, k, j
    cdef double r2 = p0 * p0
    cdef double inv2s2 = 0.0
    cdef double s, diff, w, acc
    out_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] out = out_arr

    if kind == 1:
        inv2s2 = 1.0 / (2.0 * p0 * p0)
    if n < 2:
        return out_arr
    for i in range(m):
        acc = 0.0
        for k in range(n):
            s = 0.0
            for j in range(d):
                diff = points[i, j] - pos[k, j]
                s += diff * diff
            if kind == 0:
                w = 1.0 if s <= r2 else 0.0
            else:
                w = exp(-s * inv2s2)
            if k == 0 or k == n - 1:
                acc += 0.5 * w
            else:
                acc += w
        out[i] = acc * dt
    return out_arr
