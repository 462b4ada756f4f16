"""Stochastic primitives: keyed RNG streams, Poisson clouds, lifetimes,
discretized diffusion paths, and first-contact sampling by thinning.

Streams are counter-based (Philox) and keyed by
(master seed, replicate, particle, purpose, sub).  The same key always
reproduces the same stream, and distinct keys are independent, which is what
lets couplings replay identical randomness under different parameter values.
"""
from __future__ import annotations

import enum
import math
from typing import Callable, Optional

import numpy as np

from .config import DiffusionSpec, NumericsConfig


class Purpose(enum.IntEnum):
    POINT_PROCESS = 0
    PATH = 1
    LIFETIME = 2
    THINNING = 3


def stream(master_seed: int, replicate: int, particle: int = 0,
           purpose: Purpose = Purpose.PATH, sub: int = 0) -> np.random.Generator:
    """Independent generator for the given key, reproducible across runs."""
    seq = np.random.SeedSequence(master_seed,
                                 spawn_key=(replicate, particle, int(purpose), sub))
    return np.random.Generator(np.random.Philox(seq))


class ThinningBoundError(RuntimeError):
    """Raised when a rate evaluation exceeds the supplied thinning bound."""


# --------------------------------------------------------------------------
# point cloud and lifetimes


def sample_poisson_cloud(lam: float, half_width: float, d: int,
                         rng: np.random.Generator) -> np.ndarray:
    """Points of a rate-lam Poisson process on [-L, L]^d, origin prepended.

    Index/position decoupling: the count is Poisson(lam * (2L)^d) and the
    positions are i.i.d. uniform, with the conditioned origin point at row 0.
    """
    if lam <= 0 or half_width <= 0:
        raise ValueError("lam and half_width must be positive")
    n = rng.poisson(lam * (2.0 * half_width) ** d)
    pts = rng.uniform(-half_width, half_width, size=(n, d))
    return np.vstack([np.zeros((1, d)), pts])


def sample_lifetime(alpha: float, rng: np.random.Generator) -> float:
    """Exponential(alpha) lifetime; alpha = 0 means never removed.

    Internally always drawn as E / alpha with E standard exponential, so runs
    that share a lifetime stream are automatically coupled across alpha.
    """
    e = rng.standard_exponential()
    if alpha == 0:
        return math.inf
    return e / alpha


# --------------------------------------------------------------------------
# discretized diffusion paths


class DiscretizedPath:
    """Lazily extended discretization of one diffusion started at the origin.

    Positions are stored at times 0, dt, 2*dt, ...; extension consumes the
    path's own generator in a call-pattern-independent order (increments
    only), so extend-to-5-then-10 equals extend-to-10 draw for draw.
    Brownian motion (with or without drift) uses exact Gaussian increments;
    OU and general SDEs use Euler-Maruyama.
    """

    def __init__(self, diffusion: DiffusionSpec, d: int, dt: float,
                 rng: np.random.Generator, anchor_time: float = 0.0,
                 chunk: int = 4096, max_steps: int = 5_000_000):
        self.diffusion = diffusion
        self.d = d
        self.dt = dt
        self.rng = rng
        self.anchor_time = anchor_time
        self.chunk = chunk
        self.max_steps = max_steps
        self._pos = np.zeros((1, d))
        if diffusion.variant == "ou":
            self._A = np.asarray(diffusion.matrix, dtype=float)

    @property
    def n_steps(self) -> int:
        return self._pos.shape[0] - 1

    @property
    def horizon(self) -> float:
        return self.n_steps * self.dt

    def positions(self) -> np.ndarray:
        return self._pos

    def extend_to(self, t: float) -> np.ndarray:
        """Ensure the path covers [0, t]; idempotent for t within horizon."""
        needed = int(math.ceil(t / self.dt - 1e-12))
        if needed > self.max_steps:
            raise RuntimeError(
                f"path would need {needed} steps, above the cap {self.max_steps}")
        k_new = needed - self.n_steps
        if k_new > 0:
            self._grow(k_new)
        return self._pos

    def positions_until(self, t: float) -> np.ndarray:
        self.extend_to(t)
        n = int(math.ceil(t / self.dt - 1e-12))
        return self._pos[: n + 1]

    def _grow(self, k: int) -> None:
        d, dt = self.d, self.dt
        last = self._pos[-1]
        var = self.diffusion.variant
        if var == "static":
            new = np.broadcast_to(last, (k, d)).copy()
        elif var in ("brownian", "brownian_drift"):
            inc = self.rng.standard_normal((k, d)) * math.sqrt(dt)
            if var == "brownian_drift":
                inc = inc + np.asarray(self.diffusion.drift) * dt
            new = last + np.cumsum(inc, axis=0)
        elif var == "ou":
            z = self.rng.standard_normal((k, d)) * math.sqrt(dt)
            new = np.empty((k, d))
            x = last.copy()
            A = self._A
            for i in range(k):
                x = x + (A @ x) * dt + z[i]
                new[i] = x
        else:  # general SDE, Euler-Maruyama
            z = self.rng.standard_normal((k, d)) * math.sqrt(dt)
            a_fn = self.diffusion.drift_fn
            s_fn = self.diffusion.dispersion_fn
            new = np.empty((k, d))
            x = last.copy()
            for i in range(k):
                sig = np.asarray(s_fn(x), dtype=float)
                if sig.ndim == 0:
                    noise = float(sig) * z[i]
                else:
                    noise = sig @ z[i]
                x = x + np.asarray(a_fn(x), dtype=float) * dt + noise
                new[i] = x
        self._pos = np.vstack([self._pos, new])


def make_path(diffusion: DiffusionSpec, d: int, numerics: NumericsConfig,
              rng: np.random.Generator, anchor_time: float = 0.0) -> DiscretizedPath:
    return DiscretizedPath(diffusion, d, numerics.dt, rng,
                           anchor_time=anchor_time,
                           chunk=numerics.path_chunk,
                           max_steps=numerics.max_path_steps)


def dump_path_csv(path: DiscretizedPath, fh) -> None:
    """Debug helper: write t, x_1..x_d rows."""
    fh.write("t," + ",".join(f"x_{j+1}" for j in range(path.d)) + "\n")
    for k, row in enumerate(path.positions()):
        fh.write(f"{k * path.dt:.10g}," + ",".join(f"{v:.10g}" for v in row) + "\n")


# --------------------------------------------------------------------------
# inhomogeneous first-contact sampling


def sample_first_contact_thinned(rate_fn: Callable[[float], float], r_max: float,
                                 horizon: float, rng: np.random.Generator) -> Optional[float]:
    """First point of an inhomogeneous Poisson process with intensity rate_fn.

    Thinning against a rate-r_max homogeneous process; returns None when no
    accepted point falls in [0, horizon].  rate_fn above r_max is an error:
    the bound is a correctness requirement, not a hint.
    """
    if r_max <= 0:
        return None
    t = 0.0
    while True:
        t += rng.standard_exponential() / r_max
        if t > horizon:
            return None
        r = rate_fn(t)
        if r > r_max * (1.0 + 1e-9):
            raise ThinningBoundError(f"rate {r} exceeds bound {r_max} at t={t}")
        if rng.random() * r_max < r:
            return t


def first_crossing_time(cumulative: np.ndarray, dt: float, threshold: float) -> Optional[float]:
    """First time the piecewise-linear cumulative exposure reaches threshold.

    `cumulative[k]` is the integral up to time k*dt.  Used by the inversion
    coupling: with threshold a standard exponential, the crossing time has
    exactly the first-contact law, and is monotone in any rate scaling.
    """
    if cumulative[-1] < threshold:
        return None
    k = int(np.searchsorted(cumulative, threshold))
    if k == 0:
        return 0.0
    c0, c1 = cumulative[k - 1], cumulative[k]
    if c1 == c0:
        return k * dt
    frac = (threshold - c0) / (c1 - c0)
    return (k - 1 + frac) * dt
