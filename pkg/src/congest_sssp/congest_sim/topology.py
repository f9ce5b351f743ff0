from __future__ import annotations

from collections import deque
from typing import Iterable

import numpy as np

from ..errors import InvalidTopology

# internal "unreachable" marker for int64 distance arrays; large enough that
# d + w never matters, small enough that INF + INF does not overflow
INF = np.int64(1) << np.int64(62)


class Topology:
    """Undirected connected communication graph stored as CSR.

    Directed channel ``c`` is position ``c`` of ``indices``: it goes from
    ``tails[c]`` to ``indices[c]``. ``rev[c]`` is the opposite channel.
    """

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 1:
            raise InvalidTopology("need at least one node")
        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
            raise InvalidTopology("edge endpoint out of range")
        if np.any(pairs[:, 0] == pairs[:, 1]):
            raise InvalidTopology("self-loop")
        lo = np.minimum(pairs[:, 0], pairs[:, 1])
        hi = np.maximum(pairs[:, 0], pairs[:, 1])
        keys = lo * n + hi
        if np.unique(keys).size != keys.size:
            raise InvalidTopology("parallel edge")
        tails = np.concatenate([lo, hi])
        heads = np.concatenate([hi, lo])
        order = np.lexsort((heads, tails))
        self.n = int(n)
        self.m = int(pairs.shape[0])
        self.tails = tails[order]
        self.indices = heads[order]
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.tails, minlength=n), out=self.indptr[1:])
        self.rev = self._reverse_channels()
        for a in (self.tails, self.indices, self.indptr, self.rev):
            a.setflags(write=False)
        if not self._connected():
            raise InvalidTopology("graph is not connected")

    @classmethod
    def from_adjacency(cls, adj: dict[int, Iterable[int]] | list[Iterable[int]]) -> "Topology":
        items = adj.items() if isinstance(adj, dict) else enumerate(adj)
        directed = {(int(u), int(v)) for u, nbrs in items for v in nbrs}
        for u, v in directed:
            if (v, u) not in directed:
                raise InvalidTopology(f"adjacency not symmetric at {u}-{v}")
        return cls(len(adj), sorted((u, v) for u, v in directed if u < v))

    def _reverse_channels(self) -> np.ndarray:
        keys = self.tails * self.n + self.indices
        return np.searchsorted(keys, self.indices * self.n + self.tails).astype(np.int64)

    def _connected(self) -> bool:
        seen = np.zeros(self.n, dtype=bool)
        seen[0] = True
        todo = deque([0])
        while todo:
            u = todo.popleft()
            for v in self.neighbors(u):
                if not seen[v]:
                    seen[v] = True
                    todo.append(int(v))
        return bool(seen.all())

    @property
    def num_channels(self) -> int:
        return 2 * self.m

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def degree(self, u: int) -> int:
        return int(self.indptr[u + 1] - self.indptr[u])

    def channel(self, u: int, v: int) -> int:
        lo, hi = self.indptr[u], self.indptr[u + 1]
        pos = lo + int(np.searchsorted(self.indices[lo:hi], v))
        if pos >= hi or self.indices[pos] != v:
            raise KeyError(f"{u}-{v} is not an edge")
        return int(pos)

    def has_edge(self, u: int, v: int) -> bool:
        try:
            self.channel(u, v)
        except KeyError:
            return False
        return True

    def edge_list(self) -> list[tuple[int, int]]:
        """Undirected edges as (u, v) with u < v, sorted."""
        mask = self.tails < self.indices
        return list(zip(self.tails[mask].tolist(), self.indices[mask].tolist()))

    def hop_distances(self, root: int) -> np.ndarray:
        dist = np.full(self.n, -1, dtype=np.int64)
        dist[root] = 0
        todo = deque([root])
        while todo:
            u = todo.popleft()
            for v in self.neighbors(u):
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    todo.append(int(v))
        return dist

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Topology) and self.n == other.n
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __hash__(self) -> int:
        return hash((self.n, self.indices.tobytes()))

    def __repr__(self) -> str:
        return f"Topology(n={self.n}, m={self.m})"
