"""Sequential ground truth for testing: Dijkstra, Bellman-Ford, hop-bounded distances.

Distances are int64 arrays with ``INF`` for unreachable nodes. Everything
here works on plain edge lists so it shares no code with the protocols.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .congest_sim.topology import INF
from .graph_model import WeightedInstance


@dataclass
class OracleResult:
    dist: np.ndarray
    hops: np.ndarray     # fewest hops among minimum-weight paths (-1 if unreachable)
    parent: np.ndarray   # predecessor on that canonical path (-1 for source/unreachable)

    def path_to(self, t: int) -> list[int]:
        if self.dist[t] >= INF:
            return []
        path = [t]
        while self.parent[path[-1]] >= 0:
            path.append(int(self.parent[path[-1]]))
        return path[::-1]


def _edges(inst: WeightedInstance):
    topo = inst.topology
    return topo.n, topo.tails, topo.indices, inst.weights


def dijkstra_edges(n: int, tails, heads, weights, s: int) -> OracleResult:
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for u, v, w in zip(np.asarray(tails).tolist(), np.asarray(heads).tolist(),
                       np.asarray(weights).tolist()):
        if w < 0:
            raise ValueError("negative weight")
        adj[u].append((v, w))
    dist = [None] * n
    hops = [-1] * n
    parent = [-1] * n
    best = {s: (0, 0, -1)}
    heap = [(0, 0, s, -1)]
    while heap:
        d, h, u, p = heapq.heappop(heap)
        if dist[u] is not None:
            continue
        dist[u], hops[u], parent[u] = d, h, p
        for v, w in adj[u]:
            if dist[v] is not None:
                continue
            key = (d + w, h + 1)
            old = best.get(v)
            if old is None or key < old[:2]:
                best[v] = (*key, u)
                heapq.heappush(heap, (d + w, h + 1, v, u))
    out = np.array([INF if x is None else x for x in dist], np.int64)
    return OracleResult(out, np.array(hops, np.int64), np.array(parent, np.int64))


def dijkstra(inst: WeightedInstance, s: int) -> OracleResult:
    """Exact distances from ``s`` with lexicographic (weight, hops) tie-breaking."""
    return dijkstra_edges(*_edges(inst), s)


def bellman_ford_edges(n: int, tails, heads, weights, s: int, rounds: int | None = None) -> np.ndarray:
    """Synchronous relaxation for ``rounds`` rounds (default: until stable)."""
    tails = np.asarray(tails, np.int64)
    heads = np.asarray(heads, np.int64)
    weights = np.asarray(weights, np.int64)
    dist = np.full(n, INF, np.int64)
    dist[s] = 0
    limit = n - 1 if rounds is None else rounds
    for _ in range(limit):
        src = dist[tails]
        ok = src < INF
        cand = np.full(n, INF, np.int64)
        np.minimum.at(cand, heads[ok], src[ok] + weights[ok])
        new = np.minimum(dist, cand)
        if np.array_equal(new, dist):
            break
        dist = new
    return dist


def bellman_ford(inst: WeightedInstance, s: int) -> np.ndarray:
    return bellman_ford_edges(*_edges(inst), s)


def hop_bounded_distances(inst: WeightedInstance, s: int, h: int) -> np.ndarray:
    """d^h(s, .): minimum weight over paths with at most h edges."""
    if h < 0:
        raise ValueError("h must be non-negative")
    return bellman_ford_edges(*_edges(inst), s, rounds=h)


def bfs_hops(inst_or_topology, s: int) -> np.ndarray:
    topo = getattr(inst_or_topology, "topology", inst_or_topology)
    return topo.hop_distances(s)
