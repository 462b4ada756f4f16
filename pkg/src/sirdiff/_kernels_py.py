"""Pure-numpy fallback for the compiled scan kernels.

Mirrors the semantics of ``_kernels.pyx``; used when the extension is not
built or when SIRDIFF_PURE_PYTHON is set.
"""
from __future__ import annotations

import numpy as np


def first_hit(pos, target, radius, dt, bridge_u=None, step_var=0.0):
    pos = np.asarray(pos)
    target = np.asarray(target)
    n = pos.shape[0]
    if n == 0:
        return -1.0
    if step_var <= 0.0:
        step_var = dt
    r2 = radius * radius
    d2 = ((target[None, :] - pos) ** 2).sum(axis=1)
    inside = d2 <= r2
    if inside[0]:
        return 0.0

    hit_k = n  # first grid index inside, n if never
    nz = np.nonzero(inside)[0]
    if nz.size:
        hit_k = int(nz[0])

    cross_k = n  # first step with an accepted bridge crossing, n if never
    if bridge_u is not None and n > 1:
        bridge_u = np.asarray(bridge_u)
        n_u = min(n - 1, bridge_u.shape[0])
        a = np.sqrt(d2[:n_u]) - radius
        b = np.sqrt(d2[1 : n_u + 1]) - radius
        outside = ~inside[: n_u + 1]
        both_out = outside[:-1] & outside[1:]
        # same skip rule as the compiled kernel: crossing prob < 1e-18 once
        # both clearances exceed sqrt(20.8 * step_var)
        skip2 = (radius + np.sqrt(20.8 * step_var)) ** 2
        near = (d2[:n_u] <= skip2) | (d2[1 : n_u + 1] <= skip2)
        with np.errstate(over="ignore"):
            p = np.exp(-2.0 * a * b / step_var)
        accept = both_out & near & (bridge_u[:n_u] < p)
        nz = np.nonzero(accept)[0]
        if nz.size:
            k = int(nz[0]) + 1
            if k < hit_k:
                cross_k = k

    if cross_k < hit_k:
        return (cross_k - 0.5) * dt
    if hit_k == n:
        return -1.0
    k = hit_k
    mid = 0.5 * (pos[k - 1] + pos[k])
    if ((target - mid) ** 2).sum() <= r2:
        return (k - 0.5) * dt
    return k * dt


def occupation(pos, target, radius, dt):
    pos = np.asarray(pos)
    target = np.asarray(target)
    n = pos.shape[0]
    if n < 2:
        return 0.0
    d2 = ((target[None, :] - pos) ** 2).sum(axis=1)
    ins = (d2 <= radius * radius).astype(np.float64)
    return float((0.5 * (ins[:-1] + ins[1:]) * dt).sum())


def covered_mask(points, pos, radius, chunk=256):
    """Segment-distance coverage, mirroring the compiled kernel."""
    points = np.asarray(points)
    pos = np.asarray(pos)
    m = points.shape[0]
    out = np.zeros(m, dtype=np.uint8)
    n = pos.shape[0]
    if n == 0:
        return out
    r2 = radius * radius
    if n == 1:
        d2 = ((points - pos[0][None, :]) ** 2).sum(axis=1)
        return (d2 <= r2).astype(np.uint8)
    seg = pos[1:] - pos[:-1]                      # (n-1, d)
    vv = (seg ** 2).sum(axis=1)                   # (n-1,)
    safe_vv = np.where(vv > 0.0, vv, 1.0)
    for lo in range(0, m, chunk):
        hi = min(lo + chunk, m)
        rel = points[lo:hi, None, :] - pos[None, :-1, :]      # (c, n-1, d)
        tt = (rel * seg[None, :, :]).sum(axis=2) / safe_vv[None, :]
        tt = np.where(vv[None, :] > 0.0, np.clip(tt, 0.0, 1.0), 0.0)
        closest = rel - tt[:, :, None] * seg[None, :, :]
        d2 = (closest ** 2).sum(axis=2)
        out[lo:hi] = (d2.min(axis=1) <= r2).astype(np.uint8)
    return out


def covered_prob(points, pos, radius, step_var, chunk=256):
    """Bridge-corrected coverage probability, mirroring the compiled kernel."""
    points = np.asarray(points)
    pos = np.asarray(pos)
    m = points.shape[0]
    n = pos.shape[0]
    out = np.zeros(m, dtype=np.float64)
    if n == 0:
        return out
    r2 = radius * radius
    if n == 1:
        d2 = ((points - pos[0][None, :]) ** 2).sum(axis=1)
        out[d2 <= r2] = 1.0
        return out
    skip2 = (radius + np.sqrt(20.8 * step_var)) ** 2
    seg = pos[1:] - pos[:-1]
    vv = (seg ** 2).sum(axis=1)
    safe_vv = np.where(vv > 0.0, vv, 1.0)
    for lo in range(0, m, chunk):
        hi = min(lo + chunk, m)
        pts = points[lo:hi]
        vd2 = ((pts[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2)  # (c, n)
        rel = pts[:, None, :] - pos[None, :-1, :]
        tt = (rel * seg[None, :, :]).sum(axis=2) / safe_vv[None, :]
        interior = (tt > 0.0) & (tt < 1.0) & (vv[None, :] > 0.0)
        tt = np.where(interior, tt, 0.0)
        closest = rel - tt[:, :, None] * seg[None, :, :]
        cd2 = (closest ** 2).sum(axis=2)
        seg_hit = np.where(interior, cd2 <= r2, False) | (vd2[:, :-1] <= r2) \
            | (vd2[:, 1:] <= r2)
        covered = seg_hit.any(axis=1)
        a = np.sqrt(vd2[:, :-1]) - radius
        b = np.sqrt(vd2[:, 1:]) - radius
        near = (vd2[:, :-1] <= skip2) | (vd2[:, 1:] <= skip2)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            p = np.exp(-2.0 * a * b / step_var)
            log_miss = np.log1p(-np.clip(p, 0.0, 1.0))
        contrib = np.where(near & ~seg_hit & (a > 0) & (b > 0), log_miss, 0.0)
        prob = -np.expm1(contrib.sum(axis=1))
        out[lo:hi] = np.where(covered, 1.0, prob)
    return out


def exposure_sum(points, pos, dt, kind, p0, chunk=256):
    points = np.asarray(points)
    pos = np.asarray(pos)
    m = points.shape[0]
    n = pos.shape[0]
    out = np.zeros(m, dtype=np.float64)
    if n < 2:
        return out
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    for lo in range(0, m, chunk):
        hi = min(lo + chunk, m)
        d2 = ((points[lo:hi, None, :] - pos[None, :, :]) ** 2).sum(axis=2)
        if kind == 0:
            mu = (d2 <= p0 * p0).astype(np.float64)
        else:
            mu = np.exp(-d2 / (2.0 * p0 * p0))
        out[lo:hi] = (mu * w[None, :]).sum(axis=1) * dt
    return out
