from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import kernels
from .engine import NodeContext, NodeProgram, run_protocol
from .metrics import RunMetrics, Trace
from .topology import Topology


@dataclass(frozen=True)
class BfsTree:
    root: int
    parent: np.ndarray   # parent[root] == root
    level: np.ndarray    # hop distance from root
    depth: int

    @property
    def n(self) -> int:
        return self.parent.size

    def children(self) -> list[list[int]]:
        kids: list[list[int]] = [[] for _ in range(self.n)]
        for v in range(self.n):
            if v != self.root:
                kids[int(self.parent[v])].append(v)
        return kids

    def up_channels(self, topology: Topology) -> np.ndarray:
        """Channel v -> parent(v) for every v (root maps to -1)."""
        out = np.full(self.n, -1, np.int64)
        for v in range(self.n):
            if v != self.root:
                out[v] = topology.channel(v, int(self.parent[v]))
        return out


class _BfsProgram(NodeProgram):
    # payload (distance, parent); every node announces once to every neighbor
    def init(self, ctx: NodeContext) -> dict:
        root = ctx.config["root"]
        return {"dist": 0 if ctx.node == root else None,
                "parent": ctx.node if ctx.node == root else None, "sent": False}

    def step(self, ctx, state, rnd, inbox):
        if state["dist"] is None and inbox:
            p = min(inbox)
            state = {"dist": inbox[p][0] + 1, "parent": p, "sent": False}
        if state["dist"] is not None and not state["sent"]:
            state = dict(state, sent=True)
            return state, {v: (state["dist"], state["parent"]) for v in ctx.neighbors
                           if v not in inbox}
        return state, ()

    def is_done(self, ctx, state):
        return state["sent"]


def build_bfs_tree(topology: Topology, root: int = 0, seed: int = 0) -> tuple[BfsTree, RunMetrics]:
    """Distributed BFS: each node adopts the smallest-id neighbor that reached it first."""
    if not 0 <= root < topology.n:
        raise ValueError("root not in topology")
    out, metrics = run_protocol(topology, _BfsProgram(), seed, 4 * topology.n + 4,
                                word_cap=topology.n, config={"root": root})
    parent = np.array([o["parent"] for o in out], np.int64)
    level = np.array([o["dist"] for o in out], np.int64)
    return BfsTree(root, parent, level, int(level.max())), metrics


def estimate_diameter(topology: Topology, tree: BfsTree | None = None) -> int:
    """Twice the depth of the BFS tree rooted at node 0; lies in [D, 2D]."""
    if tree is None:
        tree, _ = build_bfs_tree(topology, 0)
    return max(1, 2 * tree.depth)


def exact_hop_diameter(topology: Topology) -> int:
    return int(max(topology.hop_distances(u).max() for u in range(topology.n)))


# --- pipelined broadcast -------------------------------------------------

class _PipelineProgram(NodeProgram):
    def init(self, ctx: NodeContext) -> dict:
        cfg = ctx.config
        own = [tuple(x) if isinstance(x, tuple) else (x,) for x in cfg["items"][ctx.node]]
        is_root = ctx.node == cfg["root"]
        return {"up": deque([] if is_root else own),
                "down": deque(own if is_root else []),
                "known": list(own) if is_root else [],
                "own": own}

    def step(self, ctx, state, rnd, inbox):
        cfg = ctx.config
        parent = int(cfg["parent"][ctx.node])
        kids = cfg["children"][ctx.node]
        is_root = ctx.node == cfg["root"]
        for sender in sorted(inbox):
            item = inbox[sender]
            if sender == parent and not is_root:
                state["known"].append(item)
                state["down"].append(item)
            elif is_root:
                state["known"].append(item)
                state["down"].append(item)
            else:
                state["up"].append(item)
        out = {}
        if not is_root and state["up"]:
            out[parent] = state["up"].popleft()
        if state["down"]:
            item = state["down"].popleft()
            for c in kids:
                out[c] = item
        return state, out

    def is_done(self, ctx, state):
        return (len(state["known"]) == ctx.config["m"] and not state["up"]
                and not state["down"])

    def output(self, ctx, state):
        return state["known"]


def pipelined_broadcast(topology: Topology, tree: BfsTree, items: Sequence[Sequence[Any]],
                        seed: int = 0, word_cap: int | None = None,
                        record_trace: bool = False) -> tuple[list[list], RunMetrics]:
    """Upcast every item to the root along the tree, then stream them down.

    All nodes know the total item count m, which is how they know when
    they are done. Items are ints or pairs of ints.
    """
    m = sum(len(x) for x in items)
    cfg = {"items": items, "root": tree.root, "parent": tree.parent,
           "children": tree.children(), "m": m}
    return run_protocol(topology, _PipelineProgram(), seed, 2 * tree.depth + 2 * m + 2,
                        word_cap=word_cap if word_cap is not None else topology.n,
                        config=cfg, record_trace=record_trace)


def pipeline_rounds(tree: BfsTree, counts: np.ndarray) -> int:
    """Round count of ``pipelined_broadcast`` computed without the full engine."""
    return _pipeline(tree, counts, False)[0]


def _pipeline(tree: BfsTree, counts: np.ndarray, record: bool):
    counts = np.asarray(counts, np.int64)
    b = int(counts.sum())
    if b == 0 or tree.depth == 0:
        return 0, None, None, None
    arrivals, ev_t, ev_u = kernels.upcast(tree.parent, tree.root, counts, record)
    own = int(counts[tree.root])
    # root streams its own items first, then the upcast ones in arrival order
    send = np.empty(b, np.int64)
    last = 0
    for j in range(own):
        last += 1
        send[j] = last
    for j, a in enumerate(arrivals, start=own):
        last = max(int(a) + 1, last + 1)
        send[j] = last
    return last + tree.depth - 1, send, ev_t, ev_u


class VirtualNet:
    """Static data for simulating broadcast-only virtual rounds over a BFS tree."""

    def __init__(self, topology: Topology, tree: BfsTree, d_hat: int | None = None):
        self.topology = topology
        self.tree = tree
        self.d_hat = d_hat if d_hat is not None else max(1, 2 * tree.depth)
        self.up_ch = tree.up_channels(topology)
        self.down_ch = np.full(tree.n, -1, np.int64)
        self.kids = np.flatnonzero(self.up_ch >= 0)
        self.down_ch[self.kids] = topology.rev[self.up_ch[self.kids]]
        # nodes deepest-first, for subtree sums
        self.order = np.argsort(-tree.level, kind="stable")
        lv = tree.level[self.order]
        cuts = np.flatnonzero(np.diff(lv)) + 1
        self.levels = [g for g in np.split(self.order, cuts) if g.size and tree.level[g[0]] > 0]

    @classmethod
    def for_topology(cls, topology: Topology) -> "VirtualNet":
        tree, _ = build_bfs_tree(topology, 0)
        return cls(topology, tree)

    def meter(self, record: bool = False) -> "Meter":
        return Meter(self, record)


class Meter:
    """Accumulates the network cost of a sequence of virtual rounds.

    One virtual round in which hosts broadcast b items in total costs the
    pipelined upcast/downcast time, but never less than D-hat rounds: nodes
    that hear nothing for D-hat rounds conclude the round was silent, so a
    silent round costs D-hat rounds and no messages. Up-channel counts are
    kept as per-host totals and turned into subtree sums at the end.
    """

    def __init__(self, net: VirtualNet, record: bool = False):
        self.net = net
        self.record = record
        self.rounds = 0
        self.virtual_rounds = 0
        self.items = 0
        self._hosted = np.zeros(net.topology.n, np.int64)
        self._down = 0
        self._trace = Trace() if record else None
        self._extra = RunMetrics.empty(net.topology, record)

    def round(self, hosts) -> int:
        """Charge one virtual round in which each entry of ``hosts`` broadcasts one item."""
        net = self.net
        hosts = np.asarray(hosts, np.int64)
        self.virtual_rounds += 1
        b = hosts.size
        if b == 0:
            self.rounds += net.d_hat
            return net.d_hat
        counts = np.bincount(hosts, minlength=net.topology.n)
        t_pipe, send, ev_t, ev_u = _pipeline(net.tree, counts, self.record)
        cost = max(net.d_hat, t_pipe)
        self._hosted += counts
        self._down += b
        self.items += b
        if self.record and send is not None:
            self._trace.add(ev_t, net.up_ch[ev_u], self.rounds)
            kids = net.kids
            t = (send[:, None] + net.tree.level[kids][None, :] - 1).ravel()
            ch = np.broadcast_to(net.down_ch[kids], (b, kids.size)).ravel()
            self._trace.add(t, ch, self.rounds)
        self.rounds += cost
        return cost

    def idle(self, virtual_rounds: int) -> None:
        """Silent virtual rounds."""
        self.virtual_rounds += int(virtual_rounds)
        self.rounds += int(virtual_rounds) * self.net.d_hat

    def add(self, other: "Meter") -> None:
        """Sequentially append the cost metered by ``other``."""
        self.absorb(other.metrics())
        self.virtual_rounds += other.virtual_rounds
        self.items += other.items

    def absorb(self, met: RunMetrics) -> None:
        """Sequentially append a network-level run (e.g. a local protocol)."""
        if self._trace is not None and met.trace is not None:
            self._trace.extend(met.trace, self.rounds)
        self.rounds += met.rounds
        self._extra.edge_messages += met.edge_messages
        self._extra.node_broadcasts += met.node_broadcasts
        self._extra.peak_word = max(self._extra.peak_word, met.peak_word)

    def metrics(self) -> RunMetrics:
        net = self.net
        sub = self._hosted.copy()
        parent = net.tree.parent
        for group in net.levels:
            np.add.at(sub, parent[group], sub[group])
        edge = self._extra.edge_messages.copy()
        edge[net.up_ch[net.kids]] += sub[net.kids]
        edge[net.down_ch[net.kids]] += self._down
        trace = None
        if self._trace is not None:
            trace = Trace()
            trace.extend(self._trace)
        met = RunMetrics(self.rounds, edge, self._extra.node_broadcasts + self._hosted,
                         self._extra.peak_word, trace)
        met.extra["virtual_rounds"] = self.virtual_rounds
        met.extra["virtual_items"] = self.items
        return met
