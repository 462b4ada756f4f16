"""Static Boolean (disk) model utilities: origin clusters via union-find,
crossing-probability estimation, and instant-infection closures.

Two points are adjacent when their distance is at most the connection radius;
clusters are the connected components of that graph.  Pair enumeration uses a
KD-tree, merging uses an array union-find.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .randomness import Purpose, sample_poisson_cloud, stream


class UnionFind:
    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)

    def find(self, i: int) -> int:
        p = self.parent
        while p[i] != i:
            p[i] = p[p[i]]  # path halving
            i = p[i]
        return int(i)

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def pairs_within(points: np.ndarray, r_c: float) -> np.ndarray:
    """All index pairs at distance <= r_c (inclusive, closed-ball convention)."""
    tree = cKDTree(points)
    # query_pairs uses strict/nonstrict boundary depending on version; pad an
    # epsilon and filter back to the closed condition
    pairs = tree.query_pairs(r_c * (1 + 1e-12), output_type="ndarray")
    if pairs.size:
        d2 = ((points[pairs[:, 0]] - points[pairs[:, 1]]) ** 2).sum(axis=1)
        pairs = pairs[d2 <= r_c * r_c * (1 + 1e-12)]
    return pairs


@dataclass
class DiskGraph:
    """Adjacency-at-distance-r_c graph over a point set, with components."""

    points: np.ndarray
    r_c: float

    def __post_init__(self):
        self._uf = UnionFind(len(self.points))
        for a, b in pairs_within(self.points, self.r_c):
            self._uf.union(int(a), int(b))

    def component_of(self, i: int) -> np.ndarray:
        root = self._uf.find(i)
        roots = np.fromiter((self._uf.find(j) for j in range(len(self.points))),
                            dtype=np.int64, count=len(self.points))
        return np.nonzero(roots == root)[0]


def origin_cluster(points: np.ndarray, r_c: float) -> np.ndarray:
    """Indices of the connected component containing index 0."""
    return DiskGraph(points, r_c).component_of(0)


def origin_cluster_bfs(points: np.ndarray, r_c: float) -> np.ndarray:
    """Brute-force BFS reference implementation (tests compare against it)."""
    n = len(points)
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    frontier = [0]
    r2 = r_c * r_c
    while frontier:
        i = frontier.pop()
        d2 = ((points - points[i]) ** 2).sum(axis=1)
        for j in np.nonzero((d2 <= r2) & ~seen)[0]:
            seen[j] = True
            frontier.append(int(j))
    return np.nonzero(seen)[0]


def cluster_touches_boundary(points: np.ndarray, cluster: np.ndarray,
                             half_width: float, r_c: float) -> bool:
    if cluster.size == 0:
        return False
    return bool((np.abs(points[cluster]).max(axis=1) >= half_width - r_c).any())


def crossing_probability(lam: float, d: int, half_width: float, replicates: int,
                         master_seed: int, r_c: float = 1.0) -> tuple:
    """MC frequency (and stderr) of the origin cluster reaching the box edge."""
    hits = 0
    for r in range(replicates):
        rng = stream(master_seed, r, 0, Purpose.POINT_PROCESS)
        pts = sample_poisson_cloud(lam, half_width, d, rng)
        cl = origin_cluster(pts, r_c)
        hits += cluster_touches_boundary(pts, cl, half_width, r_c)
    p = hits / replicates
    return p, math.sqrt(p * (1 - p) / replicates)


def estimate_lambda_c(d: int = 2, half_width: float = 40.0, replicates: int = 150,
                      master_seed: int = 0, r_c: float = 1.0,
                      bracket: tuple = (0.5, 3.5), iters: int = 8,
                      target: float = 0.5) -> float:
    """Finite-size bisection estimate of the percolation threshold.

    Reference value for sweep design only; carries finite-size bias and is
    never asserted as ground truth.
    """
    lo, hi = bracket
    for it in range(iters):
        mid = 0.5 * (lo + hi)
        p, _ = crossing_probability(mid, d, half_width, replicates,
                                    master_seed + 7919 * it, r_c)
        if p < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def coupled_clouds(lams, d: int, half_width: float, rng: np.random.Generator) -> list:
    """Superposed clouds for increasing intensities (exact monotone coupling).

    The lam_2 cloud is the lam_1 cloud plus an independent rate-(lam_2-lam_1)
    layer, so origin clusters are nested by construction.
    """
    lams = sorted(lams)
    clouds = []
    pts = sample_poisson_cloud(lams[0], half_width, d, rng)
    clouds.append(pts)
    for prev, cur in zip(lams, lams[1:]):
        extra = cur - prev
        n = rng.poisson(extra * (2.0 * half_width) ** d)
        new_pts = rng.uniform(-half_width, half_width, size=(n, d))
        pts = np.vstack([pts, new_pts])
        clouds.append(pts)
    return clouds


def instant_closure(source: int, points: np.ndarray, susceptible: np.ndarray,
                    r_c: float) -> tuple:
    """Chain infection at one instant: all susceptibles reachable from the
    source through overlapping-ball steps among susceptibles.

    Returns (infected order, parents dict).  Deterministic: the frontier is
    processed in insertion order and each member's new neighbours are taken
    in increasing index order.
    """
    sus = np.asarray(susceptible, dtype=bool).copy()
    sus[source] = False
    order: list = []
    parents: dict = {}
    frontier = [source]
    r2 = r_c * r_c
    while frontier:
        m = frontier.pop(0)
        d2 = ((points - points[m]) ** 2).sum(axis=1)
        for j in np.nonzero((d2 <= r2) & sus)[0]:
            sus[j] = False
            order.append(int(j))
            parents[int(j)] = int(m)
            frontier.append(int(j))
    return order, parents
