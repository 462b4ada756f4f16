"""Figure rendering: deterministic batch artifacts, never interactive.

Every render writes the image plus a sidecar `<image>.data.json` holding the
exact numbers placed in the figure's data layer, so round-trip checks against
the input CSV are mechanical.  Censored sweep cells are hatched and listed in
a sidecar text report.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import KIND_SCHEMA, SchemaError, Table, load_table

PLOT_KINDS = tuple(KIND_SCHEMA)


@dataclass
class PlotJob:
    kind: str
    input_path: str
    output_path: str
    alpha_c_path: Optional[str] = None
    title: Optional[str] = None
    style: dict = field(default_factory=dict)


def _sidecar(job: PlotJob, payload: dict) -> None:
    with open(job.output_path + ".data.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)


def _finish(fig, job: PlotJob) -> None:
    fig.savefig(job.output_path, dpi=job.style.get("dpi", 120))
    plt.close(fig)


def render_phase_heatmap(job: PlotJob, table: Table) -> dict:
    lams = sorted({row["lambda"] for row in table.rows})
    alphas = sorted({row["alpha"] for row in table.rows})
    grid = np.full((len(alphas), len(lams)), np.nan)
    censored = []
    for row in table.rows:
        i = alphas.index(row["alpha"])
        j = lams.index(row["lambda"])
        grid[i, j] = row["survived_freq"]
        if row["censored_frac"] > 0:
            censored.append((row["lambda"], row["alpha"],
                             row["censored_frac"]))

    fig, ax = plt.subplots(figsize=(6, 4.5))
    mesh = ax.pcolormesh(np.arange(len(lams) + 1), np.arange(len(alphas) + 1),
                         grid, cmap="viridis", vmin=0.0, vmax=1.0)
    fig.colorbar(mesh, ax=ax, label="survival-proxy frequency")
    for lam, alpha, _ in censored:
        j, i = lams.index(lam), alphas.index(alpha)
        ax.add_patch(plt.Rectangle((j, i), 1, 1, fill=False, hatch="//",
                                   edgecolor="red", linewidth=0.0))
    ax.set_xticks(np.arange(len(lams)) + 0.5, [f"{v:g}" for v in lams])
    ax.set_yticks(np.arange(len(alphas)) + 0.5, [f"{v:g}" for v in alphas])
    ax.set_xlabel("lambda")
    ax.set_ylabel("alpha")
    ax.set_title(job.title or "survival-proxy phase diagram")

    overlay = None
    if job.alpha_c_path:
        ac = load_table(job.alpha_c_path, "alpha_c")
        pairs = sorted(zip(ac.column("lambda"), ac.column("alpha_c")))
        xs = [lams.index(l) + 0.5 for l, _ in pairs if l in lams]
        ys = [np.interp(a, alphas, np.arange(len(alphas)) + 0.5)
              for l, a in pairs if l in lams]
        ax.plot(xs, ys, "w--o", label="alpha_c estimate")
        ax.legend(loc="upper right")
        overlay = {"lambda": [l for l, _ in pairs],
                   "alpha_c": [a for _, a in pairs]}

    if censored:
        with open(job.output_path + ".censored.txt", "w") as fh:
            fh.write("censored cells (lambda, alpha, censored_frac):\n")
            for lam, alpha, frac in sorted(censored):
                fh.write(f"{lam:g},{alpha:g},{frac:g}\n")

    _finish(fig, job)
    payload = {
        "kind": job.kind,
        "lambda": [row["lambda"] for row in table.rows],
        "alpha": [row["alpha"] for row in table.rows],
        "survived_freq": [row["survived_freq"] for row in table.rows],
        "censored_frac": [row["censored_frac"] for row in table.rows],
    }
    if overlay:
        payload["alpha_c_overlay"] = overlay
    return payload


def render_alpha_curve(job: PlotJob, table: Table) -> dict:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    lams = sorted({row["lambda"] for row in table.rows})
    for lam in lams:
        rows = sorted((r for r in table.rows if r["lambda"] == lam),
                      key=lambda r: r["alpha"])
        ax.errorbar([r["alpha"] for r in rows],
                    [r["survived_freq"] for r in rows],
                    yerr=[r["stderr"] for r in rows],
                    marker="o", capsize=3, label=f"lambda={lam:g}")
    ax.set_xlabel("alpha")
    ax.set_ylabel("survival-proxy frequency")
    ax.set_title(job.title or "survival frequency vs removal rate")
    ax.legend()
    _finish(fig, job)
    return {
        "kind": job.kind,
        "lambda": [row["lambda"] for row in table.rows],
        "alpha": [row["alpha"] for row in table.rows],
        "survived_freq": [row["survived_freq"] for row in table.rows],
        "stderr": [row["stderr"] for row in table.rows],
    }


def render_bound_comparison(job: PlotJob, table: Table) -> dict:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    methods = sorted({row["method"] for row in table.rows})
    for method in methods:
        rows = sorted((r for r in table.rows if r["method"] == method),
                      key=lambda r: r["alpha"])
        xs = np.array([r["alpha"] for r in rows])
        ys = np.array([r["value"] for r in rows])
        es = np.array([r["stderr"] for r in rows])
        line, = ax.plot(xs, ys, marker="o", label=method)
        if es.any():
            ax.fill_between(xs, ys - 3 * es, ys + 3 * es, alpha=0.25,
                            color=line.get_color())
    ax.axhline(1.0, color="grey", linestyle=":", linewidth=1)
    ax.set_xlabel("alpha")
    ax.set_ylabel("reproduction bound")
    ax.set_title(job.title or "closed form vs Monte Carlo bound")
    ax.legend()
    _finish(fig, job)
    return {
        "kind": job.kind,
        "method": [row["method"] for row in table.rows],
        "alpha": [row["alpha"] for row in table.rows],
        "value": [row["value"] for row in table.rows],
        "stderr": [row["stderr"] for row in table.rows],
    }


def render_sausage_growth(job: PlotJob, table: Table) -> dict:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    rows = sorted(table.rows, key=lambda r: r["t"])
    xs = np.array([r["t"] for r in rows])
    ys = np.array([r["estimate"] for r in rows])
    es = np.array([r["stderr"] for r in rows])
    ax.errorbar(xs, ys, yerr=2 * es, marker="o", capsize=3)
    ax.set_xlabel("t")
    ax.set_ylabel("mean swept volume")
    ax.set_yscale("log")
    ax.set_title(job.title or "swept volume growth")
    _finish(fig, job)
    return {
        "kind": job.kind,
        "t": [row["t"] for row in table.rows],
        "estimate": [row["estimate"] for row in table.rows],
        "stderr": [row["stderr"] for row in table.rows],
    }


_RENDERERS = {
    "phase_heatmap": render_phase_heatmap,
    "alpha_curve": render_alpha_curve,
    "bound_comparison": render_bound_comparison,
    "sausage_growth": render_sausage_growth,
}


def render(job: PlotJob) -> dict:
    """Render the job and write the image plus its data sidecar.

    Returns the sidecar payload; raises SchemaError on malformed input.
    """
    if job.kind not in _RENDERERS:
        raise SchemaError(f"unknown plot kind {job.kind!r}; "
                          f"choose from {sorted(_RENDERERS)}")
    table = load_table(job.input_path, KIND_SCHEMA[job.kind])
    payload = _RENDERERS[job.kind](job, table)
    _sidecar(job, payload)
    return payload
