import math

import numpy as np
import pytest

from sirdiff.percolation import (DiskGraph, cluster_touches_boundary,
                                 coupled_clouds, crossing_probability,
                                 estimate_lambda_c, instant_closure,
                                 origin_cluster, origin_cluster_bfs)
from sirdiff.randomness import stream


class TestOriginCluster:
    def test_isolated_origin(self):
        pts = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]])
        assert origin_cluster(pts, 1.0).tolist() == [0]

    def test_chain_connectivity(self):
        pts = np.array([[0.0, 0.0], [0.9, 0.0], [1.8, 0.0], [5.0, 5.0]])
        assert origin_cluster(pts, 1.0).tolist() == [0, 1, 2]

    def test_boundary_distance_is_closed(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0]])
        assert origin_cluster(pts, 1.0).tolist() == [0, 1]

    def test_matches_bfs_reference(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(1, 300))
            pts = rng.uniform(-6, 6, size=(n, 2))
            pts[0] = 0.0
            fast = set(origin_cluster(pts, 1.0).tolist())
            ref = set(origin_cluster_bfs(pts, 1.0).tolist())
            assert fast == ref

    def test_component_partition(self):
        rng = np.random.default_rng(1)
        pts = rng.uniform(-4, 4, size=(120, 2))
        g = DiskGraph(pts, 1.0)
        comp = g.component_of(0)
        # component membership is symmetric and closed
        for i in comp:
            assert set(g.component_of(int(i)).tolist()) == set(comp.tolist())


class TestCrossing:
    def test_supercritical_crossing(self):
        p, se = crossing_probability(2.0, 2, 20.0, 150, 7)
        assert p > 0.5

    def test_subcritical_rarely_crosses(self):
        p, se = crossing_probability(0.3, 2, 15.0, 150, 8)
        assert p < 0.1

    def test_monotone_under_superposition(self):
        # adding points can only grow the origin cluster (exact coupling)
        rng = stream(9, 0)
        violations = 0
        for _ in range(60):
            clouds = coupled_clouds([0.8, 1.4, 2.2], 2, 10.0, rng)
            touched = [cluster_touches_boundary(c, origin_cluster(c, 1.0), 10.0, 1.0)
                       for c in clouds]
            for a, b in zip(touched, touched[1:]):
                violations += a and not b
        assert violations == 0

    def test_lambda_c_bracket(self):
        # finite-size estimate lands in a plausible window; reference only
        est = estimate_lambda_c(d=2, half_width=15.0, replicates=60,
                                master_seed=10, iters=6)
        assert 0.8 < est < 2.5


class TestInstantClosure:
    def test_isolated_source(self):
        pts = np.array([[0.0, 0.0], [5.0, 0.0]])
        order, parents = instant_closure(0, pts, np.array([True, True]), 1.0)
        assert order == [] and parents == {}

    def test_two_chained(self):
        pts = np.array([[0.0, 0.0], [0.9, 0.0], [1.7, 0.0]])
        order, parents = instant_closure(0, pts, np.array([True] * 3), 1.0)
        assert order == [1, 2]
        assert parents == {1: 0, 2: 1}

    def test_respects_susceptibility(self):
        pts = np.array([[0.0, 0.0], [0.9, 0.0], [1.7, 0.0]])
        sus = np.array([True, False, True])
        order, parents = instant_closure(0, pts, sus, 1.0)
        # the middle particle is not susceptible, so the chain is broken
        assert order == []

    def test_equals_origin_cluster_on_random_configs(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            n = int(rng.integers(2, 120))
            pts = rng.uniform(-5, 5, size=(n, 2))
            pts[0] = 0.0
            order, _ = instant_closure(0, pts, np.ones(n, dtype=bool), 1.0)
            expect = set(origin_cluster(pts, 1.0).tolist()) - {0}
            assert set(order) == expect
