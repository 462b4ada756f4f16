"""Named validation suites behind the `validate` CLI subcommand.

Each suite runs fixed-seed property checks and returns a machine-readable
report: {"suite": ..., "passed": bool, "checks": [{name, passed, observed,
expected, tolerance}, ...]}.
"""
from __future__ import annotations

import math

import numpy as np

from . import bounds as bounds_mod
from . import engines, percolation, sausage
from .config import (DiffusionSpec, KernelSpec, NumericsConfig, ScenarioConfig,
                     INFINITE)

SUITES = ("coupling", "bounds", "sausage", "percolation", "all")


def _check(name, observed, expected, tolerance) -> dict:
    passed = bool(abs(observed - expected) <= tolerance)
    return {"name": name, "passed": passed, "observed": observed,
            "expected": expected, "tolerance": tolerance}


def _flag(name, passed, note="") -> dict:
    return {"name": name, "passed": bool(passed), "observed": note,
            "expected": "", "tolerance": ""}


def suite_coupling(replicates: int = 200, seed: int = 2026) -> list:
    cfg = ScenarioConfig(dimension=2, lam=0.5, rho=INFINITE, alpha=1.0,
                         kernel=KernelSpec.unit_ball(),
                         diffusion=DiffusionSpec.brownian(),
                         box_half_width=12.0, numerics=NumericsConfig(dt=1e-3),
                         seed=seed)
    mismatches = 0
    for rep in range(replicates):
        a, _ = engines.run_delayed_percolation(cfg, rep)
        b = engines.run_delayed_chronological(cfg, rep)
        if (a.infected != b.infected or a.parents != b.parents
                or a.generations != b.generations):
            mismatches += 1
    return [_flag(f"reachability vs chronological identical ({replicates} reps)",
                  mismatches == 0, f"{mismatches} mismatches")]


def suite_bounds(seed: int = 2026) -> list:
    checks = []
    for lam, alpha in ((0.2, 1.0), (0.2, 4.0)):
        cf = bounds_mod.r_infinity_closed_form_2d(lam, alpha)
        mc = bounds_mod.r_infinity_mc("delayed", DiffusionSpec.brownian(), 2,
                                      lam, alpha, 600, seed, dt=5e-4)
        checks.append(_check(f"closed form vs MC (lam={lam}, alpha={alpha})",
                             mc.value, cf.value, 3.0 * mc.stderr))
    crude = bounds_mod.crude_bound_delayed(1.0, 1.0, KernelSpec.unit_ball(), 4.0, 2)
    checks.append(_check("crude kernel bound value", crude.value, math.pi / 4, 1e-12))
    checks.append(_flag("crude bound certifies", crude.certified))
    return checks


def suite_sausage(seed: int = 2026) -> list:
    checks = []
    est, se = sausage.sausage_volume_estimate(DiffusionSpec.brownian(), 2, 0.0,
                                              200, seed)
    checks.append(_check("degenerate sausage volume", est, math.pi, 4 * se + 1e-9))
    t = 1.0
    d_est, d_se = sausage.difference_sausage_volume_estimate(
        DiffusionSpec.brownian(), 2, t, 800, seed, dt=1e-3)
    s_est, s_se = sausage.sausage_volume_estimate(
        DiffusionSpec.brownian(), 2, 2 * t, 800, seed + 1, dt=2e-3)
    checks.append(_check("difference sausage equals doubled-time sausage",
                         d_est, s_est, 3 * math.hypot(d_se, s_se)))
    checks.append(_check("K0(1)", sausage.bessel_k(0, 1.0), 0.42102443824070834, 1e-10))
    checks.append(_check("K1(1)", sausage.bessel_k(1, 1.0), 0.6019072301972346, 1e-10))
    return checks


def suite_percolation(seed: int = 2026) -> list:
    checks = []
    rng = np.random.default_rng(seed)
    ok = True
    for _ in range(50):
        pts = rng.uniform(-5, 5, size=(rng.integers(2, 120), 2))
        pts[0] = 0.0
        a = set(percolation.origin_cluster(pts, 1.0).tolist())
        b = set(percolation.origin_cluster_bfs(pts, 1.0).tolist())
        ok &= a == b
    checks.append(_flag("union-find equals BFS on random instances", ok))
    p, se = percolation.crossing_probability(2.0, 2, 20.0, 100, seed)
    checks.append(_flag("supercritical crossing frequency > 0.5", p > 0.5, f"p={p}"))
    return checks


def run_suite(name: str, quick: bool = False) -> dict:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
    checks = []
    if name in ("coupling", "all"):
        checks += suite_coupling(replicates=50 if quick else 1000)
    if name in ("bounds", "all"):
        checks += suite_bounds()
    if name in ("sausage", "all"):
        checks += suite_sausage()
    if name in ("percolation", "all"):
        checks += suite_percolation()
    return {"suite": name, "passed": all(c["passed"] for c in checks),
            "checks": checks}
