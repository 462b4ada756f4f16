"""Command-line interface.

Subcommands: simulate, sweep, bounds, sausage, percolation, validate.
Summaries are deterministic for a fixed seed (timing goes to stderr), every
CSV row echoes its full parameter tuple, and heavy subcommands honour
--threads / SIRDIFF_THREADS.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

from . import bounds as bounds_mod
from . import engines, percolation, sausage, sweeps, validate
from .config import (DiffusionSpec, INFINITE, ScenarioConfig, load_scenario,
                     scenario_from_dict, validate_config)


def _default_threads() -> int:
    return int(os.environ.get("SIRDIFF_THREADS", "1"))


def _parse_rho(text: str) -> float:
    return INFINITE if text.lower() in ("inf", "infinite", "infinity") else float(text)


def _apply_overrides(cfg: ScenarioConfig, overrides: list) -> ScenarioConfig:
    from .config import scenario_to_dict

    data = scenario_to_dict(cfg)
    for item in overrides:
        key, _, value = item.partition("=")
        if not value:
            raise SystemExit(f"override {item!r} is not of the form key=value")
        node = data
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        leaf = parts[-1]
        try:
            node[leaf] = json.loads(value)
        except json.JSONDecodeError:
            node[leaf] = value
    return scenario_from_dict(data)


def _fmt(x) -> str:
    if isinstance(x, float):
        return "inf" if math.isinf(x) else format(x, ".10g")
    return str(x)


def cmd_simulate(args) -> int:
    cfg = load_scenario(args.config)
    if args.set:
        cfg = _apply_overrides(cfg, args.set)
    if args.seed is not None:
        cfg = cfg.with_overrides(seed=args.seed)
    if args.model:
        cfg = cfg.with_overrides(model=args.model)
    errors = validate_config(cfg)
    if errors:
        for e in errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    thresholds = engines.Thresholds(n_max=args.n_max, g_max=args.g_max)
    t0 = time.perf_counter()
    if cfg.model == "diffusion":
        out = engines.run_diffusion(cfg, args.replicate, thresholds)
    elif args.engine == "chronological":
        out = engines.run_delayed_chronological(cfg, args.replicate, thresholds)
    else:
        out, _ = engines.run_delayed_percolation(cfg, args.replicate, thresholds)
    elapsed = time.perf_counter() - t0

    print(f"verdict={out.verdict} reason={out.reason!r} size={out.size}")
    print(f"generations={out.generation_sizes()}")
    print(f"censored={str(out.censored).lower()} particles={out.n_particles}")
    print(f"timing: {elapsed:.3f}s", file=sys.stderr)
    if args.log:
        with open(args.log, "w") as fh:
            for kind, t, src, tgt, pos in out.events:
                fh.write(json.dumps({"event": kind, "t": t, "source": src,
                                     "target": tgt,
                                     "position": list(pos)}) + "\n")
    return 0


def cmd_sweep(args) -> int:
    base = load_scenario(args.config)
    if args.set:
        base = _apply_overrides(base, args.set)
    if args.model:
        base = base.with_overrides(model=args.model)
    plan = sweeps.SweepPlan(
        base=base,
        lams=tuple(float(v) for v in args.lam),
        alphas=tuple(float(v) for v in args.alpha),
        replicates=args.replicates,
        n_max=args.n_max, g_max=args.g_max,
        threads=args.threads, master_seed=args.seed or 0,
        bisect_alpha_c=args.alpha_c_out is not None, q=args.q,
    )
    result = sweeps.run_sweep(plan)
    sweeps.write_sweep_csv(plan, result, args.out)
    if args.alpha_c_out:
        sweeps.write_alpha_c_csv(result, args.alpha_c_out)
    for lam, alpha in result.unreliable:
        print(f"UNRELIABLE cell lambda={lam} alpha={alpha}: censoring > 20%",
              file=sys.stderr)
    return 0


def cmd_bounds(args) -> int:
    kernel_spec = None
    diffusion = DiffusionSpec.brownian()
    reports = []
    for alpha in args.alpha:
        if args.method == "closed_form":
            reports.append(bounds_mod.r_infinity_closed_form_2d(args.lam, alpha))
        elif args.method == "crude":
            from .config import KernelSpec
            reports.append(bounds_mod.crude_bound_delayed(
                args.lam, args.rho, KernelSpec.unit_ball(), alpha, args.dimension))
        elif args.method == "mc_infinite":
            reports.append(bounds_mod.r_infinity_mc(
                args.model, diffusion, args.dimension, args.lam, alpha,
                args.replicates, args.seed or 0, dt=args.dt))
        else:  # mc_finite
            from .config import KernelSpec
            reports.append(bounds_mod.r_rho_mc(
                args.lam, args.rho, KernelSpec.unit_ball(), alpha, diffusion,
                args.model, args.replicates, args.seed or 0, args.dimension,
                dt=args.dt))
    if args.format == "json":
        payload = [json.loads(r.to_json()) for r in reports]
        text = json.dumps(payload, indent=2, sort_keys=True)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
        else:
            print(text)
    else:
        rows = [["model", "method", "lambda", "alpha", "rho", "value", "stderr",
                 "certified"]]
        for r, alpha in zip(reports, args.alpha):
            rows.append([r.model, r.method, _fmt(args.lam), _fmt(alpha),
                         _fmt(args.rho), _fmt(r.value), _fmt(r.stderr),
                         str(r.certified).lower()])
        out_fh = open(args.out, "w", newline="") if args.out else sys.stdout
        try:
            csv.writer(out_fh).writerows(rows)
        finally:
            if args.out:
                out_fh.close()
    return 0


def cmd_sausage(args) -> int:
    diffusion = DiffusionSpec.brownian()
    rows = [["t", "estimate", "stderr", "replicates", "diffusion", "d"]]
    for t in args.time:
        est, se = sausage.sausage_volume_estimate(
            diffusion, args.dimension, t, args.replicates, args.seed or 0,
            dt=args.dt, difference=args.difference)
        rows.append([_fmt(t), _fmt(est), _fmt(se), args.replicates,
                     "brownian", args.dimension])
    out_fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        csv.writer(out_fh).writerows(rows)
    finally:
        if args.out:
            out_fh.close()
    return 0


def cmd_percolation(args) -> int:
    rows = [["lambda", "L", "crossing", "stderr", "replicates", "seed"]]
    for lam in args.lam:
        p, se = percolation.crossing_probability(lam, args.dimension, args.half_width,
                                                 args.replicates, args.seed or 0)
        rows.append([_fmt(lam), _fmt(args.half_width), _fmt(p), _fmt(se),
                     args.replicates, args.seed or 0])
    out_fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        csv.writer(out_fh).writerows(rows)
    finally:
        if args.out:
            out_fh.close()
    return 0


def cmd_validate(args) -> int:
    try:
        report = validate.run_suite(args.suite, quick=args.quick)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    text = json.dumps(report, indent=2, default=str)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    for c in report["checks"]:
        status = "pass" if c["passed"] else "FAIL"
        print(f"[{status}] {c['name']}", file=sys.stderr)
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sirdiff",
                                 description="spatial SIR epidemics on particle clouds")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario")
    sim.add_argument("--config", required=True)
    sim.add_argument("--set", action="append", default=[],
                     metavar="KEY=VALUE", help="override scenario fields")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--replicate", type=int, default=0)
    sim.add_argument("--model", choices=["delayed", "diffusion"])
    sim.add_argument("--engine", choices=["percolation", "chronological"],
                     default="percolation")
    sim.add_argument("--n-max", type=int, default=500)
    sim.add_argument("--g-max", type=int, default=12)
    sim.add_argument("--log", help="write JSON-lines event log here")
    sim.set_defaults(fn=cmd_simulate)

    sw = sub.add_parser("sweep", help="grid sweep over lambda and alpha")
    sw.add_argument("--config", required=True)
    sw.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    sw.add_argument("--model", choices=["delayed", "diffusion"])
    sw.add_argument("--lam", nargs="+", required=True)
    sw.add_argument("--alpha", nargs="+", required=True)
    sw.add_argument("--replicates", type=int, default=200)
    sw.add_argument("--n-max", type=int, default=500)
    sw.add_argument("--g-max", type=int, default=12)
    sw.add_argument("--threads", type=int, default=_default_threads())
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--q", type=float, default=0.05)
    sw.add_argument("--out", required=True)
    sw.add_argument("--alpha-c-out", help="also bisect and write alpha_c CSV")
    sw.set_defaults(fn=cmd_sweep)

    bd = sub.add_parser("bounds", help="reproduction bounds and certificates")
    bd.add_argument("--method", choices=["closed_form", "crude", "mc_infinite",
                                         "mc_finite"], required=True)
    bd.add_argument("--model", choices=["delayed", "diffusion"], default="delayed")
    bd.add_argument("--lam", type=float, required=True)
    bd.add_argument("--alpha", type=float, nargs="+", required=True)
    bd.add_argument("--rho", type=_parse_rho, default=1.0)
    bd.add_argument("--dimension", type=int, default=2)
    bd.add_argument("--replicates", type=int, default=1000)
    bd.add_argument("--dt", type=float, default=5e-4)
    bd.add_argument("--seed", type=int, default=0)
    bd.add_argument("--format", choices=["json", "csv"], default="json")
    bd.add_argument("--out")
    bd.set_defaults(fn=cmd_bounds)

    sa = sub.add_parser("sausage", help="mean swept-volume estimates")
    sa.add_argument("--time", type=float, nargs="+", required=True)
    sa.add_argument("--dimension", type=int, default=2)
    sa.add_argument("--replicates", type=int, default=500)
    sa.add_argument("--dt", type=float, default=1e-3)
    sa.add_argument("--difference", action="store_true",
                    help="difference of two independent copies")
    sa.add_argument("--seed", type=int, default=0)
    sa.add_argument("--out")
    sa.set_defaults(fn=cmd_sausage)

    pc = sub.add_parser("percolation", help="origin-cluster crossing probability")
    pc.add_argument("--lam", type=float, nargs="+", required=True)
    pc.add_argument("--dimension", type=int, default=2)
    pc.add_argument("--half-width", type=float, default=20.0)
    pc.add_argument("--replicates", type=int, default=200)
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--out")
    pc.set_defaults(fn=cmd_percolation)

    va = sub.add_parser("validate", help="run a named property suite")
    va.add_argument("suite", choices=list(validate.SUITES))
    va.add_argument("--quick", action="store_true")
    va.add_argument("--out")
    va.set_defaults(fn=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
