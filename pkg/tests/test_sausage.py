import math

import numpy as np
import pytest
import scipy.special as sp

from sirdiff.config import DiffusionSpec, ball_volume
from sirdiff.randomness import DiscretizedPath, Purpose, stream
from sirdiff import sausage
from sirdiff.sausage import (SausageQuery, bessel_k, difference_sausage_volume_estimate,
                             envelope_dominates, first_hitting_time,
                             fit_growth_envelope, occupation_time,
                             sausage_volume_estimate, spitzer_hit_probability,
                             z_alpha)


def drift_path(v, d=2, dt=1e-3, horizon=10.0):
    spec = DiffusionSpec.general(lambda x: np.asarray(v, dtype=float),
                                 lambda x: 0.0)
    p = DiscretizedPath(spec, d, dt, stream(0, 0))
    p.extend_to(horizon)
    return p


def circular_orbit_spec(radius, omega=1.0):
    # deterministic bounded motion: solution circles through the origin with
    # maximal displacement 2 * radius
    A = np.array([[0.0, -omega], [omega, 0.0]])
    b = np.array([omega * radius, 0.0])
    return DiffusionSpec.general(lambda x: A @ x + b, lambda x: 0.0)


class TestFirstHitting:
    def test_target_inside_at_start(self):
        p = drift_path([1.0, 0.0], horizon=1.0)
        q = SausageQuery(path=p, radius=1.0, target=np.array([0.5, 0.0]),
                         horizon=1.0)
        assert first_hitting_time(q) == 0.0

    def test_kinematic_oracle(self):
        # speed 2 toward a target 5 away with radius 1: tau = (5-1)/2 = 2
        dt = 1e-3
        p = drift_path([2.0, 0.0], dt=dt, horizon=5.0)
        q = SausageQuery(path=p, radius=1.0, target=np.array([5.0, 0.0]),
                         horizon=5.0)
        assert first_hitting_time(q) == pytest.approx(2.0, abs=2 * dt)

    def test_never_hits(self):
        p = drift_path([1.0, 0.0], horizon=2.0)
        q = SausageQuery(path=p, radius=1.0, target=np.array([0.0, 5.0]),
                         horizon=2.0)
        assert first_hitting_time(q) is None

    def test_spitzer_oracle_small(self):
        # P(hit of a point at distance 2 before Exp(1)) for the planar
        # Brownian unit sausage; modest scale here, acceptance runs it big
        alpha, dist, dt, n = 1.0, 2.0, 1e-3, 3000
        hits = 0
        for r in range(n):
            T = stream(21, r, 0, Purpose.LIFETIME).standard_exponential() / alpha
            path = DiscretizedPath(DiffusionSpec.brownian(), 2, dt, stream(21, r))
            q = SausageQuery(path=path, radius=1.0,
                             target=np.array([dist, 0.0]), horizon=T)
            tau = first_hitting_time(q, bridge_rng=stream(21, r, 0, Purpose.THINNING))
            hits += tau is not None and tau < T
        p_hat = hits / n
        p_exact = spitzer_hit_probability(dist, alpha)
        se = math.sqrt(p_exact * (1 - p_exact) / n)
        assert abs(p_hat - p_exact) < 3 * se

    def test_radius_monotonicity(self):
        p = drift_path([1.0, 0.3], horizon=6.0)
        target = np.array([3.0, 1.0])
        taus, occs = [], []
        for r in (0.6, 0.9, 1.2):
            q = SausageQuery(path=p, radius=r, target=target, horizon=6.0)
            tau = first_hitting_time(q)
            taus.append(math.inf if tau is None else tau)
            occs.append(occupation_time(q, 6.0))
        assert taus[0] >= taus[1] >= taus[2]
        assert occs[0] <= occs[1] <= occs[2]


class TestOccupation:
    def test_static_inside(self):
        p = DiscretizedPath(DiffusionSpec.static(), 2, 0.01, stream(1, 0))
        q = SausageQuery(path=p, radius=1.0, target=np.array([0.3, 0.0]),
                         horizon=2.0)
        assert occupation_time(q, 2.0) == pytest.approx(2.0)

    def test_static_outside(self):
        p = DiscretizedPath(DiffusionSpec.static(), 2, 0.01, stream(1, 0))
        q = SausageQuery(path=p, radius=1.0, target=np.array([3.0, 0.0]),
                         horizon=2.0)
        assert occupation_time(q, 2.0) == 0.0

    def test_transversal_chord_oracle(self):
        # path crosses the ball off-centre: occupation = chord length / speed
        dt = 5e-4
        speed, offset, radius = 2.0, 0.6, 1.0
        p = drift_path([speed, 0.0], dt=dt, horizon=6.0)
        target = np.array([5.0, offset])
        q = SausageQuery(path=p, radius=radius, target=target, horizon=6.0)
        chord = 2 * math.sqrt(radius ** 2 - offset ** 2)
        assert occupation_time(q, 6.0) == pytest.approx(chord / speed, abs=2 * dt)


class TestBessel:
    def test_frozen_values(self):
        assert bessel_k(0, 1.0) == pytest.approx(0.42102443824, abs=1e-10)
        assert bessel_k(1, 1.0) == pytest.approx(0.60190723019, abs=1e-10)

    def test_against_scipy_sweep(self):
        for x in np.geomspace(1e-3, 50, 60):
            assert bessel_k(0, float(x)) == pytest.approx(float(sp.k0(x)), rel=1e-10)
            assert bessel_k(1, float(x)) == pytest.approx(float(sp.k1(x)), rel=1e-10)

    def test_leading_asymptotic(self):
        lead = math.sqrt(math.pi / 80.0) * math.exp(-40.0)
        assert bessel_k(0, 40.0) / lead == pytest.approx(1.0, abs=1e-2)

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            bessel_k(0, -1.0)
        with pytest.raises(ValueError):
            bessel_k(2, 1.0)


class TestZAlpha:
    def test_large_alpha_asymptotic(self):
        # Z - pi -> pi*sqrt(2/alpha); the cruder pi + 2pi/sqrt(alpha) surrogate
        # stays within 0.02 at alpha = 1e4
        a = 1e4
        assert abs(z_alpha(a) - math.pi - 2 * math.pi / math.sqrt(a)) < 0.02
        assert z_alpha(a) - math.pi == pytest.approx(math.pi * math.sqrt(2 / a),
                                                     rel=1e-2)

    def test_strictly_decreasing(self):
        grid = np.geomspace(0.1, 100, 25)
        vals = [z_alpha(float(a)) for a in grid]
        assert all(x > y for x, y in zip(vals, vals[1:]))

    def test_critical_alpha_bisection(self):
        # lam < 1/pi: lam * Z_alpha = 1 has a root (Z decreases to pi)
        lam = 0.2
        assert lam < 1 / math.pi
        lo, hi = 1e-3, 1e5
        assert lam * z_alpha(lo) > 1 > lam * z_alpha(hi)
        for _ in range(80):
            mid = math.sqrt(lo * hi)
            if lam * z_alpha(mid) > 1:
                lo = mid
            else:
                hi = mid
        root = math.sqrt(lo * hi)
        assert lam * z_alpha(root) == pytest.approx(1.0, abs=1e-6)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            z_alpha(0.0)


class TestVolumes:
    def test_degenerate_is_ball(self):
        est, se = sausage_volume_estimate(DiffusionSpec.brownian(), 2, 0.0,
                                          150, 11)
        assert est == pytest.approx(math.pi, abs=4 * se + 1e-9)

    def test_monotone_in_time(self):
        # same replicate indices/paths, growing horizons
        vals = []
        for t in (0.25, 0.5, 1.0):
            est, _ = sausage_volume_estimate(DiffusionSpec.brownian(), 2, t,
                                             150, 12)
            vals.append(est)
        assert vals[0] < vals[1] < vals[2]

    def test_bounded_motion_cap(self):
        # deterministic orbit with max displacement 2*0.75 = 1.5:
        # swept volume never exceeds |S(cap + 1)|
        cap = 1.5
        spec = circular_orbit_spec(0.75)
        for t in (0.5, 2.0, 6.0):
            est, se = sausage_volume_estimate(spec, 2, t, 60, 13, dt=5e-3)
            assert est <= ball_volume(2, cap + 1.0) + 3 * se

    def test_zero_motion_difference(self):
        spec = DiffusionSpec.static()
        est, se = difference_sausage_volume_estimate(spec, 2, 3.0, 50, 14)
        assert est == pytest.approx(math.pi, abs=4 * se)

    def test_doubled_time_identity_small(self):
        d_est, d_se = difference_sausage_volume_estimate(
            DiffusionSpec.brownian(), 2, 1.0, 600, 15, dt=1e-3)
        s_est, s_se = sausage_volume_estimate(
            DiffusionSpec.brownian(), 2, 2.0, 600, 16, dt=2e-3)
        assert abs(d_est - s_est) < 3 * math.hypot(d_se, s_se)

    def test_1d_range_oracle(self):
        # E|sausage_t|_1 = 2 + E[range of BM] = 2 + sqrt(8 t / pi)
        t = 1.0
        est, se = sausage_volume_estimate(DiffusionSpec.brownian(), 1, t, 800, 17)
        exact = 2 + math.sqrt(8 * t / math.pi)
        assert est == pytest.approx(exact, abs=3.5 * se)


class TestGrowthEnvelope:
    def test_brownian_subhalf_rate(self):
        fit = fit_growth_envelope(DiffusionSpec.brownian(), 2,
                                  [1, 2, 4, 8, 14, 20], 80, 18, dt=2e-2,
                                  n_points=1024)
        assert fit.sigma_growth < 0.5
        assert envelope_dominates(fit)

    def test_zero_motion_flat(self):
        fit = fit_growth_envelope(DiffusionSpec.static(), 2, [1, 2, 4], 30, 19,
                                  dt=1e-2, n_points=2048)
        # swept volume is constant; only hit-or-miss noise enters the fit
        assert 0.0 <= fit.sigma_growth < 0.01
        assert fit.gamma_growth == pytest.approx(math.pi, rel=0.05)
        assert envelope_dominates(fit)

    def test_ou_envelope_exists(self):
        spec = DiffusionSpec.ornstein_uhlenbeck([[-1.0, 0.0], [0.0, -1.0]])
        fit = fit_growth_envelope(spec, 2, [1, 2, 5, 10, 20], 60, 20, dt=2e-2,
                                  n_points=1024)
        assert math.isfinite(fit.gamma_growth) and math.isfinite(fit.sigma_growth)
        assert envelope_dominates(fit)
        # confined process: envelope stays modest
        assert fit.gamma_growth < 40.0
