"""Moving-ball sausage geometry: hitting times, occupation, volume estimators,
and the two-dimensional Brownian closed forms (modified Bessel functions).

The sausage of a path is the union of closed balls swept along it.  Volumes
are estimated by hit-or-miss sampling in a path-adaptive bounding box, which
is dimension-agnostic with a binomial-quantifiable error.  Compact shapes are
restricted to closed balls.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from . import kernels
from .config import DiffusionSpec
from .randomness import DiscretizedPath, Purpose, stream


@dataclass
class SausageQuery:
    """One hitting/occupation question about a path's radius-r_m sausage."""

    path: DiscretizedPath
    radius: float
    target: np.ndarray
    horizon: float


def first_hitting_time(q: SausageQuery,
                       bridge_rng: Optional[np.random.Generator] = None,
                       step_var: float = 0.0) -> Optional[float]:
    """Earliest time the sausage covers the target, None if not by the horizon.

    Grid detection with one bisection refinement; with `bridge_rng` given, a
    Brownian-bridge boundary-crossing correction is applied to the distance
    process between grid points (approximate for the radial process).
    """
    pos = q.path.positions_until(q.horizon)
    u = None
    if bridge_rng is not None and pos.shape[0] > 1:
        u = bridge_rng.random(pos.shape[0] - 1)
    t = kernels.first_hit(pos, np.asarray(q.target, dtype=float), q.radius,
                          q.path.dt, u, step_var)
    return None if t < 0 else float(t)


def occupation_time(q: SausageQuery, t: float) -> float:
    """Time within [0, t] the sausage covers the target (trapezoid endpoints)."""
    pos = q.path.positions_until(min(t, q.horizon))
    return float(kernels.occupation(pos, np.asarray(q.target, dtype=float),
                                    q.radius, q.path.dt))


# --------------------------------------------------------------------------
# volume estimation


def volume_of_path(pos: np.ndarray, radius: float, n_points: int,
                   rng: np.random.Generator, step_var: float = 0.0) -> float:
    """Hit-or-miss volume of the union of radius-balls along the path.

    Sample points score their bridge-corrected coverage probability (exact 1
    within segment distance `radius`), so the estimate accounts for
    between-grid excursions; step_var = 0 disables the correction (exact for
    deterministic paths).
    """
    lo = pos.min(axis=0) - radius
    hi = pos.max(axis=0) + radius
    box = float(np.prod(hi - lo))
    pts = rng.uniform(lo, hi, size=(n_points, pos.shape[1]))
    probs = kernels.covered_prob(pts, pos, radius, step_var)
    return box * float(probs.mean())


def bridge_step_var(diffusion: DiffusionSpec, dt: float, difference: bool = False) -> float:
    """Per-step variance of the distance process for the bridge correction.

    Unit dispersion gives dt (2*dt for a difference of two copies); paths
    with unknown or zero dispersion get no correction.
    """
    if diffusion.variant in ("brownian", "brownian_drift", "ou"):
        return 2.0 * dt if difference else dt
    return 0.0


def _paths_positions(diffusion: DiffusionSpec, d: int, t: float, dt: float,
                     rng_main: np.random.Generator,
                     rng_other: Optional[np.random.Generator]) -> np.ndarray:
    n = max(int(round(t / dt)), 0)
    path = DiscretizedPath(diffusion, d, dt, rng_main)
    pos = path.positions_until(n * dt) if n else path.positions()
    if rng_other is None:
        return pos
    other = DiscretizedPath(diffusion, d, dt, rng_other)
    pos2 = other.positions_until(n * dt) if n else other.positions()
    return pos - pos2


def sausage_volume_estimate(diffusion: DiffusionSpec, d: int, t: float,
                            replicates: int, master_seed: int,
                            dt: float = 1e-3, n_points: int = 2048,
                            radius: float = 1.0,
                            difference: bool = False) -> tuple:
    """Monte Carlo estimate of the mean sausage volume at time t.

    With difference=True the path is the difference of two independent copies
    of the diffusion (the contact geometry when both endpoints move).
    Returns (estimate, stderr).
    """
    step_var = bridge_step_var(diffusion, dt, difference)
    vals = np.empty(replicates)
    for r in range(replicates):
        rng_path = stream(master_seed, r, 0, Purpose.PATH)
        rng_other = stream(master_seed, r, 0, Purpose.PATH, sub=1) if difference else None
        pos = _paths_positions(diffusion, d, t, dt, rng_path, rng_other)
        rng_pts = stream(master_seed, r, 0, Purpose.THINNING)
        vals[r] = volume_of_path(pos, radius, n_points, rng_pts, step_var)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(replicates))


def difference_sausage_volume_estimate(diffusion: DiffusionSpec, d: int, t: float,
                                       replicates: int, master_seed: int,
                                       dt: float = 1e-3, n_points: int = 2048,
                                       radius: float = 1.0) -> tuple:
    return sausage_volume_estimate(diffusion, d, t, replicates, master_seed,
                                   dt=dt, n_points=n_points, radius=radius,
                                   difference=True)


def sausage_volume_at_exp_lifetime(diffusion: DiffusionSpec, d: int, alpha: float,
                                   replicates: int, master_seed: int,
                                   dt: float = 1e-3, n_points: int = 2048,
                                   radius: float = 1.0,
                                   difference: bool = False) -> tuple:
    """Mean sausage volume at an independent Exp(alpha) time, with stderr.

    This is the mean number of unit-intensity cloud points swept before
    removal, the quantity behind the instant-contact reproduction bound.
    """
    step_var = bridge_step_var(diffusion, dt, difference)
    vals = np.empty(replicates)
    for r in range(replicates):
        T = stream(master_seed, r, 0, Purpose.LIFETIME).standard_exponential() / alpha
        rng_path = stream(master_seed, r, 0, Purpose.PATH)
        rng_other = stream(master_seed, r, 0, Purpose.PATH, sub=1) if difference else None
        pos = _paths_positions(diffusion, d, T, dt, rng_path, rng_other)
        rng_pts = stream(master_seed, r, 0, Purpose.THINNING)
        vals[r] = volume_of_path(pos, radius, n_points, rng_pts, step_var)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(replicates))


# --------------------------------------------------------------------------
# modified Bessel functions of the second kind, orders 0 and 1

_ASYMPTOTIC_CUTOFF = 30.0


def _bessel_k_quadrature(nu: int, x: float) -> float:
    # integrand exp(-x*cosh(s)) * cosh(s)^nu decays doubly exponentially;
    # beyond x*cosh(s) ~ 750 it underflows, so a finite upper limit is exact
    # to double precision and avoids overflow in cosh
    s_cut = math.acosh(760.0 / x) if x < 760.0 else 1.0

    def f(s: float) -> float:
        e = x * math.cosh(s)
        if e > 745.0:
            return 0.0
        if nu == 0:
            return math.exp(-e)
        return math.exp(-e) * math.cosh(s)

    val, _ = integrate.quad(f, 0.0, s_cut, epsabs=1e-300, epsrel=1e-13, limit=400)
    return val


def _bessel_k_asymptotic(nu: int, x: float) -> float:
    # sqrt(pi/(2x)) e^{-x} sum_k a_k(nu) / x^k with a_k the standard
    # (4 nu^2 - 1^2)(4 nu^2 - 3^2).../ (k! 8^k) coefficients
    mu = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    for k in range(1, 60):
        term *= (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) * total


def bessel_k(nu: int, x: float) -> float:
    """K_nu(x) for nu in {0, 1}, x > 0.

    Adaptive quadrature of the integral representation for moderate x and
    the large-argument expansion beyond; relative error <= 1e-10 on
    [1e-3, 50].
    """
    if nu not in (0, 1):
        raise ValueError("only orders 0 and 1 are supported")
    if not x > 0:
        raise ValueError("argument must be positive")
    if x >= _ASYMPTOTIC_CUTOFF:
        return _bessel_k_asymptotic(nu, x)
    return _bessel_k_quadrature(nu, x)


def bessel_k_ratio(x: float) -> float:
    """K_1(x) / K_0(x); the asymptotic prefactors cancel, so the ratio stays
    finite even where both functions underflow."""
    if x >= _ASYMPTOTIC_CUTOFF:
        def series(nu: int) -> float:
            mu = 4.0 * nu * nu
            term = total = 1.0
            for k in range(1, 60):
                term *= (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
                total += term
                if abs(term) < 1e-17 * abs(total):
                    break
            return total
        return series(1) / series(0)
    return bessel_k(1, x) / bessel_k(0, x)


def z_alpha(alpha: float) -> float:
    """Closed-form mean unit-sausage coverage over an Exp(alpha) lifetime, d=2.

    Integrating the Bessel hitting ratio K_0(r * sqrt(2a)) / K_0(sqrt(2a))
    over the plane outside the unit disk gives
    pi + (2 pi / sqrt(2 alpha)) K_1(sqrt(2 alpha)) / K_0(sqrt(2 alpha)),
    which tends to pi + pi * sqrt(2/alpha) for large alpha.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    s = math.sqrt(2.0 * alpha)
    return math.pi + (2.0 * math.pi / s) * bessel_k_ratio(s)


def spitzer_hit_probability(dist: float, alpha: float) -> float:
    """P(point at distance `dist` is covered by the planar Brownian unit
    sausage before an independent Exp(alpha) time): K_0(dist*sqrt(2a))/K_0(sqrt(2a))."""
    if dist <= 1.0:
        return 1.0
    s = math.sqrt(2.0 * alpha)
    return bessel_k(0, dist * s) / bessel_k(0, s)


# --------------------------------------------------------------------------
# exponential growth envelopes


@dataclass(frozen=True)
class GrowthFit:
    """Envelope gamma_growth * exp(sigma_growth * t) dominating the estimated
    mean sausage volume (plus 2 SE) on the fitted grid."""

    gamma_growth: float
    sigma_growth: float
    grid: tuple
    estimates: tuple
    stderrs: tuple


def fit_growth_envelope(diffusion: DiffusionSpec, d: int, time_grid: Sequence[float],
                        replicates: int, master_seed: int,
                        dt: float = 1e-2, n_points: int = 2048,
                        radius: float = 1.0,
                        difference: bool = False) -> GrowthFit:
    """Least-squares fit of log-volume against t, inflated to dominate.

    Each replicate reuses one path for every grid time (prefix scans), which
    keeps the grid estimates positively correlated and the envelope tight.
    """
    grid = sorted(float(t) for t in time_grid)
    if not grid:
        raise ValueError("time grid must be nonempty")
    t_max = grid[-1]
    samples = np.empty((replicates, len(grid)))
    for r in range(replicates):
        rng_path = stream(master_seed, r, 0, Purpose.PATH)
        rng_other = stream(master_seed, r, 0, Purpose.PATH, sub=1) if difference else None
        pos = _paths_positions(diffusion, d, t_max, dt, rng_path, rng_other)
        rng_pts = stream(master_seed, r, 0, Purpose.THINNING)
        step_var = bridge_step_var(diffusion, dt, difference)
        for c, t in enumerate(grid):
            n = max(int(round(t / dt)), 0)
            samples[r, c] = volume_of_path(pos[: n + 1], radius, n_points, rng_pts,
                                           step_var)
    est = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / math.sqrt(replicates)

    tarr = np.asarray(grid)
    coeffs = np.polyfit(tarr, np.log(est), 1)
    sigma = max(float(coeffs[0]), 0.0)
    gamma = math.exp(float(coeffs[1]))
    # inflate gamma until the envelope dominates every estimate + 2 SE
    need = (est + 2.0 * se) / np.exp(sigma * tarr)
    gamma = max(gamma, float(need.max()))
    return GrowthFit(gamma_growth=gamma, sigma_growth=sigma,
                     grid=tuple(grid), estimates=tuple(float(v) for v in est),
                     stderrs=tuple(float(v) for v in se))


def envelope_dominates(fit: GrowthFit) -> bool:
    est = np.asarray(fit.estimates)
    se = np.asarray(fit.stderrs)
    t = np.asarray(fit.grid)
    return bool(np.all(fit.gamma_growth * np.exp(fit.sigma_growth * t) >= est + 2 * se))
