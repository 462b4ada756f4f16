import csv
import io
import math

import numpy as np
import pytest

from sirdiff.config import (DiffusionSpec, INFINITE, KernelSpec, NumericsConfig,
                            ScenarioConfig)
from sirdiff.randomness import DiscretizedPath, stream
from sirdiff.randomness import dump_path_csv
from sirdiff.sweeps import (SweepPlan, cell_seed, run_sweep, write_alpha_c_csv,
                            write_sweep_csv)


def base_cfg(**kw):
    d = dict(dimension=2, lam=0.5, rho=INFINITE, alpha=1.0,
             kernel=KernelSpec.unit_ball(), diffusion=DiffusionSpec.brownian(),
             box_half_width=16.0, numerics=NumericsConfig(dt=1e-3), seed=0)
    d.update(kw)
    return ScenarioConfig(**d)


class TestSweep:
    def test_rejects_empty_grid(self):
        with pytest.raises(ValueError):
            SweepPlan(base=base_cfg(), lams=(), alphas=(1.0,))

    def test_cell_seed_stability(self):
        a = cell_seed(1, "delayed", 0.5, 1.0, math.inf)
        b = cell_seed(1, "delayed", 0.5, 1.0, math.inf)
        c = cell_seed(1, "delayed", 0.5, 2.0, math.inf)
        assert a == b != c

    def test_survival_monotone_in_alpha(self):
        # survival frequency is non-increasing in the removal rate (2 SE slack)
        plan = SweepPlan(base=base_cfg(), lams=(0.5,), alphas=(0.8, 1.6, 3.2),
                         replicates=150, n_max=100, g_max=None, master_seed=5)
        rows = run_sweep(plan).rows
        freqs = [r.survived_freq for r in rows]
        ses = [r.stderr for r in rows]
        for i in range(len(freqs) - 1):
            slack = 2 * math.hypot(ses[i], ses[i + 1])
            assert freqs[i + 1] <= freqs[i] + slack

    def test_alpha_c_bisection(self):
        plan = SweepPlan(base=base_cfg(), lams=(0.5,), alphas=(0.5, 4.0),
                         replicates=80, n_max=100, g_max=None, master_seed=6,
                         bisect_alpha_c=True, q=0.05, bisect_iters=4)
        result = run_sweep(plan)
        assert len(result.alpha_c_rows) == 1
        row = result.alpha_c_rows[0]
        assert 0.5 <= row["alpha_lo"] <= row["alpha_c"] <= row["alpha_hi"] <= 4.0

    def test_unreliable_cells_flagged(self):
        # small box with slow removal: censoring dominates
        plan = SweepPlan(base=base_cfg(box_half_width=5.0), lams=(0.5,),
                         alphas=(0.2,), replicates=40, n_max=500, g_max=None,
                         master_seed=7)
        result = run_sweep(plan)
        assert (0.5, 0.2) in result.unreliable

    def test_csv_writers(self, tmp_path):
        plan = SweepPlan(base=base_cfg(), lams=(0.5,), alphas=(1.0,),
                         replicates=10, master_seed=8)
        result = run_sweep(plan)
        out = tmp_path / "s.csv"
        write_sweep_csv(plan, result, str(out))
        rows = list(csv.reader(out.open()))
        assert len(rows) == 2 and rows[1][3] == "inf"
        result.alpha_c_rows = [{"model": "delayed", "lambda": 0.5,
                                "rho": math.inf, "q": 0.05, "alpha_lo": 1.0,
                                "alpha_hi": 2.0, "alpha_c": 1.5}]
        ac = tmp_path / "ac.csv"
        write_alpha_c_csv(result, str(ac))
        rows = list(csv.reader(ac.open()))
        assert rows[1][-1] == "1.5"


class TestPathDump:
    def test_csv_columns(self):
        p = DiscretizedPath(DiffusionSpec.brownian(), 2, 0.1, stream(0, 0))
        p.extend_to(0.5)
        buf = io.StringIO()
        dump_path_csv(p, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "t,x_1,x_2"
        assert len(lines) == p.n_steps + 2
        assert lines[1].startswith("0,")


class TestCriticalAlpha:
    def test_alpha_c_non_decreasing_in_lambda(self):
        # denser clouds survive easier, so the bisected critical removal rate
        # can only move up; generous slack for bisection noise
        estimates = []
        for lam in (0.4, 0.8):
            plan = SweepPlan(base=base_cfg(), lams=(lam,), alphas=(0.8, 40.0),
                             replicates=120, n_max=100, g_max=None,
                             master_seed=11, bisect_alpha_c=True, q=0.05,
                             bisect_iters=6)
            result = run_sweep(plan)
            assert len(result.alpha_c_rows) == 1
            estimates.append(result.alpha_c_rows[0]["alpha_c"])
        assert estimates[0] <= estimates[1] + 1.0
