"""Epidemic engines over a Poisson particle cloud.

Three engines share one randomness layout (so runs can be coupled):

* run_delayed_percolation: reveals each infected particle's potential
  infection set lazily and computes the infected set as directed reachability
  from the origin, with infection times as shortest paths in the
  contact-time-labelled graph.
* run_delayed_chronological: a true event-driven simulation, processing
  candidate infections in time order.  On shared streams it must produce
  exactly the same infected set and parent map as the percolation engine.
* run_diffusion: synchronous time stepping where every particle moves from
  time zero.

Stationary-until-infected particles are the delayed model; everyone-moves is
the diffusion model.  Epidemics touching the truncation box are censored, not
silently truncated.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .config import ScenarioConfig, kernel_eval_radial, validated
from .randomness import (DiscretizedPath, Purpose, first_crossing_time,
                         make_path, sample_first_contact_thinned,
                         sample_poisson_cloud, stream)

EXTINCT = "extinct"
SURVIVED = "survived_proxy"
CENSORED = "boundary_censored"


@dataclass(frozen=True)
class Thresholds:
    """Finite-box survival proxy: stop as soon as either cap is reached."""

    n_max: Optional[int] = None
    g_max: Optional[int] = None


@dataclass
class EpidemicOutcome:
    infected: list                      # indices in order of infection
    infection_times: dict               # index -> time
    parents: dict                       # index -> parent index (-1 for origin)
    generations: dict                   # index -> generation number
    lifetimes: dict                     # index -> lifetime actually sampled
    verdict: str
    reason: str
    censored: bool
    n_particles: int
    events: list = field(default_factory=list)   # (kind, time, source, target, position)

    @property
    def size(self) -> int:
        return len(self.infected)

    def generation_sizes(self) -> list:
        if not self.generations:
            return []
        g_max = max(self.generations.values())
        sizes = [0] * (g_max + 1)
        for g in self.generations.values():
            sizes[g] += 1
        return sizes

    def generation_sets(self) -> list:
        sets: list = [[] for _ in range(len(self.generation_sizes()))]
        for i, g in self.generations.items():
            sets[g].append(i)
        return [sorted(s) for s in sets]


@dataclass
class InfectionGraph:
    """Revealed potential-infection sets with contact-time edge labels."""

    edges: dict                         # i -> list of (j, tau) with tau < T_i
    lifetimes: dict                     # i -> T_i
    n_particles: int


def survival_proxy(outcome: EpidemicOutcome, n_max: int, g_max: int) -> str:
    """Re-classify a completed run against explicit proxy thresholds."""
    if outcome.censored:
        return CENSORED
    if outcome.size >= n_max:
        return SURVIVED
    if outcome.generations and max(outcome.generations.values()) >= g_max:
        return SURVIVED
    return EXTINCT


# --------------------------------------------------------------------------
# shared delayed-model machinery


class _DelayedRun:
    """Cloud, streams, lazily revealed paths/lifetimes for one replicate."""

    def __init__(self, cfg: ScenarioConfig, replicate: int, coupling: bool = False,
                 positions: Optional[np.ndarray] = None):
        self.cfg = validated(cfg)
        self.replicate = replicate
        self.coupling = coupling
        if positions is None:
            rng = stream(cfg.seed, replicate, 0, Purpose.POINT_PROCESS)
            positions = sample_poisson_cloud(cfg.lam, cfg.box_half_width,
                                             cfg.dimension, rng)
        self.positions = positions
        self.n = len(positions)
        self.r_int = cfg.kernel.support_radius()
        self.mu_max = cfg.kernel.max_value()
        self.paths: dict = {}
        self.lifetimes: dict = {}

    def lifetime(self, i: int) -> float:
        if i not in self.lifetimes:
            e = stream(self.cfg.seed, self.replicate, i, Purpose.LIFETIME
                       ).standard_exponential()
            self.lifetimes[i] = math.inf if self.cfg.alpha == 0 else e / self.cfg.alpha
        return self.lifetimes[i]

    def path(self, i: int) -> DiscretizedPath:
        if i not in self.paths:
            rng = stream(self.cfg.seed, self.replicate, i, Purpose.PATH)
            self.paths[i] = make_path(self.cfg.diffusion, self.cfg.dimension,
                                      self.cfg.numerics, rng)
        return self.paths[i]

    def scan_horizon(self, i: int) -> float:
        cap = self.cfg.numerics.max_path_steps * self.cfg.numerics.dt
        return min(self.lifetime(i), cap)

    def path_touches_boundary(self, i: int, horizon: float) -> bool:
        pos = self.path(i).positions_until(horizon) + self.positions[i]
        return bool(np.abs(pos).max() >= self.cfg.box_half_width - self.r_int)

    def point_touches_boundary(self, i: int) -> bool:
        return bool(np.abs(self.positions[i]).max()
                    >= self.cfg.box_half_width - self.r_int)

    def candidate_targets(self, i: int, horizon: float) -> np.ndarray:
        """Box pre-filter: targets reachable given the path tube + support."""
        pos = self.path(i).positions_until(horizon)
        lo = self.positions[i] + pos.min(axis=0) - self.r_int
        hi = self.positions[i] + pos.max(axis=0) + self.r_int
        x = self.positions
        mask = np.all((x >= lo) & (x <= hi), axis=1)
        mask[i] = False
        return np.nonzero(mask)[0]

    def contact_time(self, i: int, j: int, horizon: float) -> Optional[float]:
        """First contact time of particle i's infection process with target j,
        as if i were never removed, scanned up to `horizon`."""
        cfg = self.cfg
        rel_target = self.positions[j] - self.positions[i]
        path = self.path(i)
        pos = path.positions_until(horizon)
        dt = cfg.numerics.dt
        if math.isinf(cfg.rho):
            t = kernels.first_hit(pos, rel_target, self.r_int, dt)
            return None if t < 0 else float(t)
        if self.coupling:
            # inversion: contact when the cumulative contact rate first
            # exceeds a pair-specific standard exponential; monotone in rho
            # and in the horizon by construction
            dists = np.sqrt(((rel_target[None, :] - pos) ** 2).sum(axis=1))
            mu = kernel_eval_radial(cfg.kernel, dists)
            rate = cfg.rho * mu
            cum = np.concatenate([[0.0], np.cumsum(0.5 * (rate[:-1] + rate[1:]) * dt)])
            e = stream(cfg.seed, self.replicate, i, Purpose.THINNING, sub=j
                       ).standard_exponential()
            return first_crossing_time(cum, dt, e)
        rng = stream(cfg.seed, self.replicate, i, Purpose.THINNING, sub=j)

        def rate_fn(s: float) -> float:
            k = s / dt
            k0 = min(int(k), pos.shape[0] - 2)
            frac = k - k0
            p = pos[k0] * (1.0 - frac) + pos[k0 + 1] * frac
            dist = math.sqrt(float(((rel_target - p) ** 2).sum()))
            return cfg.rho * float(kernel_eval_radial(cfg.kernel, dist))

        if pos.shape[0] < 2:
            return None
        return sample_first_contact_thinned(rate_fn, cfg.rho * self.mu_max,
                                            min(horizon, (pos.shape[0] - 1) * dt),
                                            rng)

    def reveal(self, i: int) -> list:
        """Potential infection set of i: all (j, tau) with tau < T_i."""
        horizon = self.scan_horizon(i)
        out = []
        T = self.lifetime(i)
        for j in self.candidate_targets(i, horizon):
            tau = self.contact_time(i, int(j), horizon)
            if tau is not None and tau < T:
                out.append((int(j), tau))
        return out


def infection_set_for(i: int, positions: np.ndarray, cfg: ScenarioConfig,
                      replicate: int = 0, coupling: bool = False) -> list:
    """Standalone reveal of particle i's potential infection set.

    Targets are taken from `positions` (row i is the source); the path and
    lifetime come from the particle's own streams.
    """
    run = _DelayedRun(cfg, replicate, coupling=coupling, positions=positions)
    return run.reveal(i)


# --------------------------------------------------------------------------
# delayed-model engines


def _finalize(outcome_args, verdict, reason):
    infected, times, parents, gens, lifetimes, n, events = outcome_args
    return EpidemicOutcome(infected=infected, infection_times=times,
                           parents=parents, generations=gens,
                           lifetimes=lifetimes, verdict=verdict, reason=reason,
                           censored=(verdict == CENSORED), n_particles=n,
                           events=events)


def run_delayed_percolation(cfg: ScenarioConfig, replicate: int,
                            thresholds: Optional[Thresholds] = None,
                            coupling: bool = False,
                            collect_graph: bool = False,
                            positions: Optional[np.ndarray] = None):
    """Delayed model via directed reachability from the origin.

    Infection sets are revealed only when a particle is first reached; the
    infected set is the reachability set and infection times are shortest
    paths over contact-time edge labels, with ties broken by
    (time, source, target).  Returns (outcome, graph-or-None).
    """
    run = _DelayedRun(cfg, replicate, coupling=coupling, positions=positions)
    th = thresholds or Thresholds()
    infected: list = []
    times: dict = {}
    parents: dict = {}
    gens: dict = {}
    events: list = []
    graph_edges: dict = {}
    # heap keys are (time, chain depth, source, target): at equal times the
    # shallower event wins, so zero-delay chains expand layer by layer from
    # their trigger rather than in index order
    heap: list = [(0.0, 0, -1, 0)]
    finalized = set()
    args = (infected, times, parents, gens, run.lifetimes, run.n, events)

    while heap:
        b, depth, src, j = heapq.heappop(heap)
        if j in finalized:
            continue
        finalized.add(j)
        infected.append(j)
        times[j] = b
        parents[j] = src
        gens[j] = depth
        events.append(("infect", b, src, j, tuple(run.positions[j])))
        if run.point_touches_boundary(j):
            events.append(("censor", b, -1, j, tuple(run.positions[j])))
            out = _finalize(args, CENSORED, "infected point near box edge")
            break
        if th.n_max is not None and len(infected) >= th.n_max:
            out = _finalize(args, SURVIVED, "n_max")
            break
        if th.g_max is not None and gens[j] >= th.g_max:
            out = _finalize(args, SURVIVED, "g_max")
            break
        horizon = run.scan_horizon(j)
        if run.path_touches_boundary(j, horizon):
            events.append(("censor", b, -1, j, tuple(run.positions[j])))
            out = _finalize(args, CENSORED, "revealed path near box edge")
            break
        contacts = run.reveal(j)
        end = run.positions[j] + run.path(j).positions_until(horizon)[-1]
        events.append(("remove", b + run.lifetimes[j], j, -1, tuple(end)))
        if collect_graph:
            graph_edges[j] = contacts
        for k, tau in contacts:
            if k not in finalized:
                heapq.heappush(heap, (b + tau, depth + 1, j, k))
    else:
        out = _finalize(args, EXTINCT, f"size {len(infected)}")

    graph = InfectionGraph(graph_edges, dict(run.lifetimes), run.n) if collect_graph else None
    return out, graph


def run_delayed_chronological(cfg: ScenarioConfig, replicate: int,
                              thresholds: Optional[Thresholds] = None,
                              coupling: bool = False,
                              positions: Optional[np.ndarray] = None) -> EpidemicOutcome:
    """Delayed model simulated in true time order.

    Candidate infection events are queued as (time, source, target) and fire
    only if the target is still susceptible; contact times past the source's
    removal are never queued.  Shares every randomness stream with
    run_delayed_percolation for the same replicate.
    """
    run = _DelayedRun(cfg, replicate, coupling=coupling, positions=positions)
    th = thresholds or Thresholds()
    infected: list = []
    times: dict = {}
    parents: dict = {}
    gens: dict = {}
    events: list = []
    susceptible = np.ones(run.n, dtype=bool)
    heap: list = [(0.0, 0, -1, 0)]
    args = (infected, times, parents, gens, run.lifetimes, run.n, events)

    while heap:
        t, depth, src, j = heapq.heappop(heap)
        if not susceptible[j]:
            continue
        susceptible[j] = False
        infected.append(j)
        times[j] = t
        parents[j] = src
        gens[j] = depth
        events.append(("infect", t, src, j, tuple(run.positions[j])))
        if run.point_touches_boundary(j):
            events.append(("censor", t, -1, j, tuple(run.positions[j])))
            return _finalize(args, CENSORED, "infected point near box edge")
        if th.n_max is not None and len(infected) >= th.n_max:
            return _finalize(args, SURVIVED, "n_max")
        if th.g_max is not None and gens[j] >= th.g_max:
            return _finalize(args, SURVIVED, "g_max")
        horizon = run.scan_horizon(j)
        if run.path_touches_boundary(j, horizon):
            events.append(("censor", t, -1, j, tuple(run.positions[j])))
            return _finalize(args, CENSORED, "revealed path near box edge")
        T = run.lifetimes[j]
        end = run.positions[j] + run.path(j).positions_until(horizon)[-1]
        events.append(("remove", t + T, j, -1, tuple(end)))
        for k in run.candidate_targets(j, horizon):
            k = int(k)
            if not susceptible[k]:
                continue
            tau = run.contact_time(j, k, horizon)
            if tau is not None and tau < T:
                heapq.heappush(heap, (t + tau, depth + 1, j, k))
    return _finalize(args, EXTINCT, f"size {len(infected)}")


# --------------------------------------------------------------------------
# diffusion-model engine


def run_diffusion(cfg: ScenarioConfig, replicate: int,
                  thresholds: Optional[Thresholds] = None,
                  max_time: float = math.inf,
                  positions: Optional[np.ndarray] = None) -> EpidemicOutcome:
    """Everyone-moves model by synchronous time stepping.

    Per step: advance all live particles, remove expired infecteds, then
    infect susceptibles in contact with an infected particle (displacement
    taken at the step start; per-pair success 1 - exp(-dt * rho * mu) for
    finite rho, certain for infinite rho).  Ties go to the smallest source
    index.  Movement draws come from one replicate-level stream; the
    diffusion model has no cross-parameter coupling invariants to honour.
    """
    cfg = validated(cfg)
    th = thresholds or Thresholds()
    if positions is None:
        rng_cloud = stream(cfg.seed, replicate, 0, Purpose.POINT_PROCESS)
        positions = sample_poisson_cloud(cfg.lam, cfg.box_half_width,
                                         cfg.dimension, rng_cloud)
    x0 = positions
    n = len(x0)
    rng_move = stream(cfg.seed, replicate, 0, Purpose.PATH, sub=1)
    rng_pair = stream(cfg.seed, replicate, 0, Purpose.THINNING, sub=1)
    dt = cfg.numerics.dt
    r_int = cfg.kernel.support_radius()
    d = cfg.dimension
    diffusion = cfg.diffusion

    pos = x0.copy()
    susceptible = np.ones(n, dtype=bool)
    infected_mask = np.zeros(n, dtype=bool)
    removal_time = np.full(n, math.inf)
    infected: list = []
    times: dict = {}
    parents: dict = {}
    gens: dict = {}
    lifetimes: dict = {}
    events: list = []
    args = (infected, times, parents, gens, lifetimes, n, events)

    def infect(j: int, t: float, src: int) -> Optional[tuple]:
        susceptible[j] = False
        infected_mask[j] = True
        infected.append(j)
        times[j] = t
        parents[j] = src
        gens[j] = 0 if src < 0 else gens[src] + 1
        e = stream(cfg.seed, replicate, j, Purpose.LIFETIME).standard_exponential()
        T = math.inf if cfg.alpha == 0 else e / cfg.alpha
        lifetimes[j] = T
        removal_time[j] = t + T
        events.append(("infect", t, src, j, tuple(pos[j])))
        if abs(pos[j]).max() >= cfg.box_half_width - r_int:
            events.append(("censor", t, -1, j, tuple(pos[j])))
            return CENSORED, "infected point near box edge"
        if th.n_max is not None and len(infected) >= th.n_max:
            return SURVIVED, "n_max"
        if th.g_max is not None and gens[j] >= th.g_max:
            return SURVIVED, "g_max"
        return None

    stop = infect(0, 0.0, -1)
    if stop is not None:
        return _finalize(args, stop[0], stop[1])

    t = 0.0
    A = np.asarray(diffusion.matrix, dtype=float) if diffusion.variant == "ou" else None
    max_steps = cfg.numerics.max_path_steps
    for _ in range(max_steps):
        if t >= max_time:
            return _finalize(args, EXTINCT, "time horizon reached")
        # contacts are evaluated at the step start (left-endpoint rule)
        inf_idx = np.nonzero(infected_mask)[0]
        sus_idx = np.nonzero(susceptible)[0]
        new_infections: dict = {}
        if inf_idx.size and sus_idx.size:
            diffs = pos[sus_idx][None, :, :] - pos[inf_idx][:, None, :]
            dist = np.sqrt((diffs ** 2).sum(axis=2))
            in_range = dist <= r_int
            for a in range(inf_idx.size):
                hits = np.nonzero(in_range[a])[0]
                for b in hits:
                    j = int(sus_idx[b])
                    if j in new_infections:
                        continue
                    if math.isinf(cfg.rho):
                        new_infections[j] = int(inf_idx[a])
                    else:
                        mu = float(kernel_eval_radial(cfg.kernel, dist[a, b]))
                        p = 1.0 - math.exp(-dt * cfg.rho * mu)
                        if rng_pair.random() < p:
                            new_infections[j] = int(inf_idx[a])

        # advance all live particles
        live = ~(removal_time <= t)  # removed particles stop mattering
        z = rng_move.standard_normal((n, d)) * math.sqrt(dt)
        if diffusion.variant in ("brownian", "brownian_drift"):
            step = z
            if diffusion.variant == "brownian_drift":
                step = step + np.asarray(diffusion.drift) * dt
        elif diffusion.variant == "static":
            step = np.zeros((n, d))
        elif diffusion.variant == "ou":
            step = ((pos - x0) @ A.T) * dt + z
        else:
            step = np.empty((n, d))
            for i in range(n):
                sig = np.asarray(diffusion.dispersion_fn(pos[i] - x0[i]), dtype=float)
                noise = float(sig) * z[i] if sig.ndim == 0 else sig @ z[i]
                step[i] = np.asarray(diffusion.drift_fn(pos[i] - x0[i]), dtype=float) * dt + noise
        pos[live] += step[live]
        t += dt

        # removals effective at the step end
        expired = infected_mask & (removal_time <= t)
        for j in np.nonzero(expired)[0]:
            infected_mask[j] = False
            events.append(("remove", float(removal_time[j]), int(j), -1,
                           tuple(pos[j])))

        # register the infections found at the step start
        for j in sorted(new_infections):
            stop = infect(j, t, new_infections[j])
            if stop is not None:
                return _finalize(args, stop[0], stop[1])

        if not infected_mask.any():
            return _finalize(args, EXTINCT, f"size {len(infected)}")
    raise RuntimeError("diffusion engine exceeded max_path_steps")
