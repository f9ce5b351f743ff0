"""Virtual graphs: a sampled node subset with derived weighted edges.

Nodes are addressed by local index 0..n_V'-1; ``hosts[i]`` is the network
node simulating virtual node i. An edge is stored once and, in the protocols,
only its head ever looks at it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .congest_sim.trees import VirtualNet
from .oracle import OracleResult, dijkstra_edges


@dataclass(eq=False)
class VirtualGraph:
    hosts: np.ndarray
    source: int
    tails: np.ndarray
    heads: np.ndarray
    weights: np.ndarray
    net: VirtualNet
    radius: int | None = None
    _csr: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        self.hosts = np.asarray(self.hosts, np.int64)
        t = np.asarray(self.tails, np.int64)
        h = np.asarray(self.heads, np.int64)
        w = np.asarray(self.weights, np.int64)
        if w.size and w.min() < 0:
            raise ValueError("virtual edge weights must be non-negative")
        keep = t != h
        t, h, w = t[keep], h[keep], w[keep]
        # parallel edges: keep the lightest
        order = np.lexsort((w, h, t))
        t, h, w = t[order], h[order], w[order]
        first = np.r_[True, (t[1:] != t[:-1]) | (h[1:] != h[:-1])] if t.size else np.zeros(0, bool)
        self.tails, self.heads, self.weights = t[first], h[first], w[first]

    @property
    def n_nodes(self) -> int:
        return int(self.hosts.size)

    @property
    def num_edges(self) -> int:
        return int(self.tails.size)

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Out-edge CSR (indptr, heads, weights); edges are already sorted by tail."""
        if self._csr is None:
            indptr = np.zeros(self.n_nodes + 1, np.int64)
            np.cumsum(np.bincount(self.tails, minlength=self.n_nodes), out=indptr[1:])
            self._csr = (indptr, self.heads.copy(), self.weights.copy())
        return self._csr

    def with_weights(self, weights: np.ndarray, radius: int | None = None) -> "VirtualGraph":
        return VirtualGraph(self.hosts, self.source, self.tails, self.heads, weights,
                            self.net, radius)

    def oracle(self) -> OracleResult:
        return dijkstra_edges(self.n_nodes, self.tails, self.heads, self.weights, self.source)

    def induced(self, local_nodes: np.ndarray, source: int) -> tuple["VirtualGraph", np.ndarray]:
        """Subgraph on ``local_nodes`` (must contain ``source``); returns it and the index map."""
        local_nodes = np.asarray(local_nodes, np.int64)
        pos = np.full(self.n_nodes, -1, np.int64)
        pos[local_nodes] = np.arange(local_nodes.size)
        keep = (pos[self.tails] >= 0) & (pos[self.heads] >= 0)
        sub = VirtualGraph(self.hosts[local_nodes], int(pos[source]), pos[self.tails[keep]],
                           pos[self.heads[keep]], self.weights[keep], self.net)
        return sub, local_nodes


def random_virtual_graph(net: VirtualNet, n_nodes: int, rng: np.random.Generator,
                         density: float = 0.2, max_weight: int = 10,
                         zero_fraction: float = 0.2) -> VirtualGraph:
    """Random virtual graph on distinct hosts; a spanning out-tree from the source
    guarantees every node is reachable."""
    hosts = np.sort(rng.choice(net.topology.n, size=n_nodes, replace=False))
    tails, heads = [], []
    for v in range(1, n_nodes):
        tails.append(int(rng.integers(0, v)))
        heads.append(v)
    extra = rng.random((n_nodes, n_nodes)) < density
    np.fill_diagonal(extra, False)
    et, eh = np.nonzero(extra)
    tails = np.r_[np.array(tails, np.int64), et]
    heads = np.r_[np.array(heads, np.int64), eh]
    w = rng.integers(1, max_weight + 1, size=tails.size)
    w[rng.random(tails.size) < zero_fraction] = 0
    return VirtualGraph(hosts, 0, tails, heads, w, net)
