"""Phase-diagram sweeps over (lambda, alpha) with critical-alpha bisection.

A sweep runs replicated epidemics per grid cell, reports survival-proxy
frequencies with censoring rates, and optionally refines, per lambda, the
removal rate at which the proxy frequency crosses a target level.  Results
are deterministic for a fixed (plan, master seed, thread count): cell seeds
are derived by hashing the cell key, replicate results are reduced
order-insensitively, and rows are emitted in sorted cell order.
"""
from __future__ import annotations

import csv
import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

from .config import ScenarioConfig
from .engines import (CENSORED, SURVIVED, Thresholds, run_delayed_percolation,
                      run_diffusion)

SWEEP_COLUMNS = ["model", "lambda", "alpha", "rho", "survived_freq", "stderr",
                 "mean_I", "censored_frac", "replicates", "seed"]
ALPHA_C_COLUMNS = ["model", "lambda", "rho", "q", "alpha_lo", "alpha_hi", "alpha_c"]


@dataclass(frozen=True)
class SweepPlan:
    base: ScenarioConfig                 # template; lambda/alpha overridden per cell
    lams: tuple
    alphas: tuple
    replicates: int = 200
    n_max: int = 500
    g_max: int = 12
    threads: int = 1
    master_seed: int = 0
    bisect_alpha_c: bool = False
    q: float = 0.05
    bisect_iters: int = 6

    def __post_init__(self):
        if not self.lams or not self.alphas:
            raise ValueError("sweep grids must be nonempty")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")


def cell_seed(master_seed: int, model: str, lam: float, alpha: float, rho: float) -> int:
    """Stable 63-bit seed from the cell key; independent of scheduling."""
    key = f"{master_seed}|{model}|{lam!r}|{alpha!r}|{rho!r}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big") >> 1


@dataclass
class CellResult:
    lam: float
    alpha: float
    survived: int
    censored: int
    total_infected: int
    replicates: int
    seed: int

    @property
    def survived_freq(self) -> float:
        return self.survived / self.replicates

    @property
    def stderr(self) -> float:
        p = self.survived_freq
        return math.sqrt(p * (1 - p) / self.replicates)

    @property
    def censored_frac(self) -> float:
        return self.censored / self.replicates

    @property
    def mean_size(self) -> float:
        return self.total_infected / self.replicates


def _run_replicate_range(cfg: ScenarioConfig, model: str, thresholds: Thresholds,
                         rep_lo: int, rep_hi: int) -> tuple:
    survived = censored = total = 0
    for rep in range(rep_lo, rep_hi):
        if model == "diffusion":
            out = run_diffusion(cfg, rep, thresholds)
        else:
            out, _ = run_delayed_percolation(cfg, rep, thresholds)
        survived += out.verdict == SURVIVED
        censored += out.verdict == CENSORED
        total += out.size
    return survived, censored, total


def run_cell(plan: SweepPlan, lam: float, alpha: float,
             pool: Optional[ProcessPoolExecutor] = None) -> CellResult:
    cfg = replace(plan.base, lam=lam, alpha=alpha,
                  seed=cell_seed(plan.master_seed, plan.base.model, lam, alpha,
                                 plan.base.rho))
    thresholds = Thresholds(n_max=plan.n_max, g_max=plan.g_max)
    n = plan.replicates
    if pool is None or plan.threads <= 1:
        s, c, t = _run_replicate_range(cfg, plan.base.model, thresholds, 0, n)
    else:
        chunk = max(1, n // (plan.threads * 4))
        futures = [pool.submit(_run_replicate_range, cfg, plan.base.model,
                               thresholds, lo, min(lo + chunk, n))
                   for lo in range(0, n, chunk)]
        s = c = t = 0
        for f in futures:
            ds, dc, dt_ = f.result()
            s, c, t = s + ds, c + dc, t + dt_
    return CellResult(lam=lam, alpha=alpha, survived=s, censored=c,
                      total_infected=t, replicates=n, seed=cfg.seed)


def bisect_alpha_c(plan: SweepPlan, lam: float, alpha_lo: float, alpha_hi: float,
                   pool: Optional[ProcessPoolExecutor] = None) -> dict:
    """Refine the alpha where the survival-proxy frequency crosses plan.q.

    Requires freq(alpha_lo) > q >= freq(alpha_hi); survival frequency is
    non-increasing in alpha for the delayed model.
    """
    lo, hi = alpha_lo, alpha_hi
    for _ in range(plan.bisect_iters):
        mid = 0.5 * (lo + hi)
        res = run_cell(plan, lam, mid, pool)
        if res.survived_freq > plan.q:
            lo = mid
        else:
            hi = mid
    return {"model": plan.base.model, "lambda": lam, "rho": plan.base.rho,
            "q": plan.q, "alpha_lo": lo, "alpha_hi": hi,
            "alpha_c": 0.5 * (lo + hi)}


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)        # CellResult per grid cell
    alpha_c_rows: list = field(default_factory=list)
    unreliable: list = field(default_factory=list)  # (lam, alpha) with heavy censoring


def run_sweep(plan: SweepPlan) -> SweepResult:
    result = SweepResult()
    pool = None
    try:
        if plan.threads > 1:
            pool = ProcessPoolExecutor(max_workers=plan.threads)
        for lam in plan.lams:
            for alpha in plan.alphas:
                res = run_cell(plan, lam, alpha, pool)
                result.rows.append(res)
                if res.censored_frac > 0.20:
                    result.unreliable.append((lam, alpha))
        if plan.bisect_alpha_c:
            for lam in plan.lams:
                cells = sorted((r for r in result.rows if r.lam == lam),
                               key=lambda r: r.alpha)
                bracket = None
                for lo_cell, hi_cell in zip(cells, cells[1:]):
                    if lo_cell.survived_freq > plan.q >= hi_cell.survived_freq:
                        bracket = (lo_cell.alpha, hi_cell.alpha)
                        break
                if bracket:
                    result.alpha_c_rows.append(
                        bisect_alpha_c(plan, lam, bracket[0], bracket[1], pool))
    finally:
        if pool is not None:
            pool.shutdown()
    result.rows.sort(key=lambda r: (r.lam, r.alpha))
    return result


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        return format(x, ".10g")
    return str(x)


def write_sweep_csv(plan: SweepPlan, result: SweepResult, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for r in result.rows:
            w.writerow([plan.base.model, _fmt(r.lam), _fmt(r.alpha),
                        _fmt(plan.base.rho), _fmt(r.survived_freq),
                        _fmt(r.stderr), _fmt(r.mean_size),
                        _fmt(r.censored_frac), r.replicates, r.seed])


def write_alpha_c_csv(result: SweepResult, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ALPHA_C_COLUMNS)
        for row in result.alpha_c_rows:
            w.writerow([row["model"], _fmt(row["lambda"]), _fmt(row["rho"]),
                        _fmt(row["q"]), _fmt(row["alpha_lo"]),
                        _fmt(row["alpha_hi"]), _fmt(row["alpha_c"])])
