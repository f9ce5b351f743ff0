"""Exact SSSP on virtual graphs.

Every protocol here talks only through network-wide broadcasts, charged on a
``Meter`` (one pipelined broadcast over the BFS tree per virtual round).

queue         small-weight protocol: process distance levels in order, one
              broadcast per node; wrapped in weight scaling by ``virtual_sssp``.
gather        ship every edge to everybody, solve locally.
nonrecursive  sample a skeleton, virtual ShortRange from each skeleton node,
              gather the skeleton graph.
recursive     additive approximation, then buckets of width ell solved by a
              recursive call with a smaller exponent.
"""
from __future__ import annotations

import heapq
import math
from fractions import Fraction

import numpy as np

from .congest_sim.metrics import RunMetrics
from .congest_sim.topology import INF
from .congest_sim.trees import Meter
from .errors import ConsistencyError, ParamError, PromiseViolation, RecursionDepthExceeded
from .params import VariantChoice, select_virtual_variant
from .sampling import child_seed, hop_budget, sample_virtual_nodes
from .short_range import ShortRangeParams, virtualized_short_range
from .virtual_graph import VirtualGraph, random_virtual_graph

__all__ = [
    "VirtualGraph", "VariantChoice", "gather_distances", "random_virtual_graph",
    "select_virtual_variant", "small_weight_virtual_sssp", "solve_virtual", "virtual_sssp",
    "virtual_sssp_gather", "virtual_sssp_nonrecursive", "virtual_sssp_recursive",
]


def _local_dijkstra(n: int, indptr: np.ndarray, heads: np.ndarray, w: np.ndarray,
                    s: int) -> np.ndarray:
    """The computation every node does once it knows the whole graph."""
    dist = [INF] * n
    dist[s] = 0
    heap = [(0, s)]
    indptr, heads, w = indptr.tolist(), heads.tolist(), w.tolist()
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for c in range(indptr[u], indptr[u + 1]):
            nd = d + w[c]
            v = heads[c]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return np.array(dist, np.int64)


def _relax_from(vg: VirtualGraph, d: np.ndarray, senders: np.ndarray) -> None:
    """Heads of out-edges of ``senders`` take min(d(head), d(sender) + w)."""
    if senders.size == 0:
        return
    indptr, heads, w = vg.csr()
    starts, ends = indptr[senders], indptr[senders + 1]
    lens = ends - starts
    if not lens.sum():
        return
    idx = np.repeat(ends - np.cumsum(lens), lens) + np.arange(lens.sum())
    src = np.repeat(d[senders], lens)
    np.minimum.at(d, heads[idx], src + w[idx])


def _meter_for(vg: VirtualGraph, meter: Meter | None) -> tuple[Meter, int]:
    meter = meter if meter is not None else vg.net.meter()
    return meter, meter.rounds


def _result(meter: Meter, start: int, **extra) -> RunMetrics:
    met = meter.metrics()
    met.extra.update(extra)
    met.extra["rounds_here"] = meter.rounds - start
    return met


def gather_distances(vg: VirtualGraph, meter: Meter) -> np.ndarray:
    """One virtual round in which every edge is broadcast by its head, then local Dijkstra."""
    meter.round(vg.hosts[vg.heads])
    indptr, heads, w = vg.csr()
    return _local_dijkstra(vg.n_nodes, indptr, heads, w, vg.source)


def virtual_sssp_gather(vg: VirtualGraph, meter: Meter | None = None
                        ) -> tuple[np.ndarray, RunMetrics]:
    meter, start = _meter_for(vg, meter)
    d = gather_distances(vg, meter)
    return d, _result(meter, start, variant="gather")


def small_weight_virtual_sssp(vg: VirtualGraph, meter: Meter | None = None,
                              debug: bool = False) -> tuple[np.ndarray, RunMetrics]:
    """Level-by-level queue protocol for graphs of radius at most ``limit``.

    ``limit`` is the declared radius, n_V' - 1 by default. At level i, nodes
    whose value equals i and that have not broadcast yet broadcast it; if
    nobody did, everybody moves to level i+1. Since all nodes hear every
    broadcast, everyone sees the silent round. Runs of levels with nobody
    waiting are charged as silent rounds without looping over them.
    """
    meter, start = _meter_for(vg, meter)
    n = vg.n_nodes
    limit = vg.radius if vg.radius is not None else n - 1
    if debug:
        true = vg.oracle().dist
        if np.any(true > limit):
            raise PromiseViolation(f"a distance exceeds the radius bound {limit}")
    d = np.full(n, INF, np.int64)
    d[vg.source] = 0
    done = np.zeros(n, bool)
    level = 0
    broadcasts = 0
    vr0 = meter.virtual_rounds
    while level <= limit and broadcasts < n:
        ready = np.flatnonzero(~done & (d == level))
        if ready.size:
            meter.round(vg.hosts[ready])
            done[ready] = True
            broadcasts += ready.size
            _relax_from(vg, d, ready)
            continue
        meter.idle(1)
        level += 1
        waiting = d[~done]
        nxt = int(waiting.min()) if waiting.size else INF
        if nxt > level:
            jump = min(nxt, limit + 1) - level
            meter.idle(jump)
            level += jump
    return d, _result(meter, start, variant="queue", broadcasts=broadcasts,
                      queue_virtual_rounds=meter.virtual_rounds - vr0)


def _scaled(vg: VirtualGraph, meter: Meter, inner, known: bool = False) -> np.ndarray:
    """Bit-prefix scaling on a virtual graph.

    ``inner(reduced_graph)`` must solve a graph of radius at most n_V' - 1.
    Between iterations every reachable node broadcasts its distance so that
    heads can reweight their edges, unless ``known`` says the inner solver
    already left every distance with every node. Unreachable tails drop
    their edges.
    """
    n = vg.n_nodes
    T = max(1, int(vg.weights.max(initial=0)).bit_length())
    d = np.zeros(n, np.int64)
    keep = np.ones(vg.num_edges, bool)
    for i in range(1, T + 1):
        w_i = vg.weights >> (T - i)
        if i > 1:
            if not known:
                meter.round(vg.hosts[np.flatnonzero(d < INF)])
            keep = d[vg.tails] < INF
        t, h = vg.tails[keep], vg.heads[keep]
        if i == 1:
            ell = w_i.copy()
        else:
            ell = 2 * d[t] + w_i[keep] - 2 * d[h]
        if ell.size and ell.min() < 0:
            raise ConsistencyError("inexact inner solve: negative reduced weight")
        sub = VirtualGraph(vg.hosts, vg.source, t, h, ell, vg.net, radius=n - 1)
        delta = inner(sub)
        d = np.where((d < INF) & (delta < INF), 2 * d + delta, INF)
    return d


def virtual_sssp(vg: VirtualGraph, meter: Meter | None = None,
                 debug: bool = False) -> tuple[np.ndarray, RunMetrics]:
    """Exact distances for arbitrary non-negative weights: scaling around the queue protocol."""
    meter, start = _meter_for(vg, meter)
    # queue broadcasts reach everyone and silence means unreachable, so every
    # node can update all distances locally between iterations
    d = _scaled(vg, meter, lambda g: small_weight_virtual_sssp(g, meter, debug)[0], known=True)
    if debug and not np.array_equal(d, vg.oracle().dist):
        raise ConsistencyError("virtual scaling output differs from the oracle")
    return d, _result(meter, start, variant="queue")


def nonrecursive_knobs(n_nodes: int, r: int, d_hat: int) -> tuple[int, float]:
    """k = ceil(sqrt(D)), q = n_V' / sqrt(r D) (returned unrounded)."""
    k = math.ceil(math.sqrt(d_hat))
    q = n_nodes / math.sqrt(max(r, 1) * d_hat)
    return k, q


def _nonrecursive_core(vg: VirtualGraph, r: int, k: int, q: float, seed,
                       meter: Meter) -> np.ndarray:
    n = vg.n_nodes
    if k >= n or q < 1:
        return gather_distances(vg, meter)
    skel = sample_virtual_nodes(n, k, seed, vg.source)
    params = ShortRangeParams(hop_budget(n, k), max(1, r), max(1, math.ceil(q)))
    tables, _ = virtualized_short_range(vg, skel, params, meter=meter)
    sub = tables[:, skel]
    a, b = np.nonzero(sub < INF)
    sk = VirtualGraph(vg.hosts[skel], int(np.searchsorted(skel, vg.source)), a, b,
                      sub[a, b], vg.net)
    sk_d = gather_distances(sk, meter)
    reached = np.flatnonzero(sk_d < INF)
    meter.round(vg.hosts[skel[reached]])
    d = np.full(n, INF, np.int64)
    for j in reached:
        row = tables[j]
        np.minimum(d, np.where(row < INF, row + sk_d[j], INF), out=d)
    return d


def virtual_sssp_nonrecursive(vg: VirtualGraph, k: int | None = None, q: float | None = None,
                              seed=0, meter: Meter | None = None, radius: int | None = None
                              ) -> tuple[np.ndarray, RunMetrics]:
    """Skeleton + virtual ShortRange + gather. Exact w.h.p., never below the truth.

    Without a declared radius (argument or ``vg.radius``) the graph is first
    reduced by scaling to radius n_V' - 1 instances.
    """
    meter, start = _meter_for(vg, meter)
    radius = radius if radius is not None else vg.radius
    d_hat = vg.net.d_hat

    def solve(g: VirtualGraph, r: int, salt: int) -> np.ndarray:
        k0, q0 = nonrecursive_knobs(g.n_nodes, r, d_hat)
        return _nonrecursive_core(g, r, k if k is not None else k0, q if q is not None else q0,
                                  child_seed(seed, salt), meter)

    if radius is None:
        it = iter(range(1, 1 << 30))
        d = _scaled(vg, meter, lambda g: solve(g, g.n_nodes - 1, next(it)))
    else:
        d = solve(vg, radius, 0)
    return d, _result(meter, start, variant="nonrecursive")


def _recursion_params(eps: Fraction, r: int) -> tuple[Fraction, float, int]:
    """eps' from eps = eps'/(1+2eps') clamped at 1/2, delta from eps = eps'(1+delta)/(1+2eps'),
    ell = ceil(r^((1+delta)/(1+2eps')))."""
    half = Fraction(1, 2)
    eps_p = half if eps >= Fraction(1, 4) else eps / (1 - 2 * eps)
    delta = float(eps * (1 + 2 * eps_p) / eps_p) - 1.0
    delta = min(max(delta, 0.0), math.nextafter(float(2 * eps_p), 0.0))
    expo = (1 + delta) / (1 + 2 * float(eps_p))
    ell = max(1, math.ceil(max(r, 1) ** expo - 1e-9))
    return eps_p, delta, ell


def _recursive_core(vg: VirtualGraph, r: int, eps: Fraction, seed, meter: Meter,
                    level: int, max_level: int, checks: list | None) -> np.ndarray:
    from .approx_sssp import virtual_approx_sssp

    if level >= max_level:
        raise RecursionDepthExceeded(f"recursion deeper than {max_level} levels")
    n = vg.n_nodes
    r = max(1, r)
    if eps >= Fraction(1, 2):
        k, q = nonrecursive_knobs(n, r, vg.net.d_hat)
        return _nonrecursive_core(vg, r, k, q, child_seed(seed, 0), meter)
    eps_p, _, ell = _recursion_params(eps, r)
    g = vg if vg.radius == r else vg.with_weights(vg.weights, r)
    approx, _ = virtual_approx_sssp(g, 1, child_seed(seed, 0), additive=ell, meter=meter)
    d = np.full(n, INF, np.int64)
    d[vg.source] = 0
    announced = np.full(n, INF, np.int64)
    true = vg.oracle().dist if checks is not None else None
    for i in range(r // ell + 1):
        lo, hi = i * ell, (i + 2) * ell
        members = np.flatnonzero((approx >= lo) & (approx < hi))
        if members.size == 0:
            continue
        shift = (i - 1) * ell
        sub, _ = vg.induced(members, int(members[0]))
        # prepend a fresh source hosted where the real source lives
        fin = np.flatnonzero(d[members] < INF)
        tails = np.r_[np.zeros(fin.size, np.int64), sub.tails + 1]
        heads = np.r_[fin + 1, sub.heads + 1]
        w = np.r_[np.maximum(d[members[fin]] - shift, 0), sub.weights]
        hosts = np.r_[vg.hosts[vg.source], vg.hosts[members]]
        bucket = VirtualGraph(hosts, 0, tails, heads, w, vg.net, radius=2 * ell)
        if checks is not None:
            bd = bucket.oracle().dist[1:]
            inb = (true[members] >= i * ell) & (true[members] < (i + 1) * ell)
            ok = bool(np.all(bd[inb] + shift == true[members][inb]))
            checks.append({"level": level, "bucket": i, "ok": ok})
        bd = _recursive_core(bucket, 2 * ell, eps_p, child_seed(seed, 1 + i), meter,
                             level + 1, max_level, checks)[1:]
        fin_b = bd < INF
        cand = np.where(fin_b, bd + shift, INF)
        d[members] = np.minimum(d[members], cand)
        # tell everybody the values that changed; heads relax their in-edges
        changed = members[d[members] < announced[members]]
        meter.round(vg.hosts[changed])
        announced[changed] = d[changed]
        _relax_from(vg, d, changed)
    return d


def virtual_sssp_recursive(vg: VirtualGraph, eps, seed=0, meter: Meter | None = None,
                           radius: int | None = None, debug: bool = False
                           ) -> tuple[np.ndarray, RunMetrics]:
    """Bucketed recursion with exponent ``eps`` in (0, 1/2].

    With ``debug`` set, every bucket graph is checked against the oracle
    (the shifted bucket distance must equal the true distance for nodes of
    the bucket) and the outcomes are returned in ``extra['bucket_checks']``.
    """
    eps = Fraction(eps).limit_denominator(10**6)
    if not 0 < eps <= Fraction(1, 2):
        raise ParamError("eps must lie in (0, 1/2]")
    meter, start = _meter_for(vg, meter)
    radius = radius if radius is not None else vg.radius
    max_level = math.ceil(1 / (2 * eps))
    checks = [] if debug else None
    if radius is None:
        it = iter(range(1, 1 << 30))
        d = _scaled(vg, meter, lambda g: _recursive_core(
            g, g.n_nodes - 1, eps, child_seed(seed, next(it)), meter, 0, max_level, checks))
    else:
        d = _recursive_core(vg, radius, eps, child_seed(seed, 0), meter, 0, max_level, checks)
    extra = {"variant": "recursive", "eps": str(eps)}
    if checks is not None:
        extra["bucket_checks"] = checks
    return d, _result(meter, start, **extra)


def solve_virtual(vg: VirtualGraph, choice: VariantChoice | str, seed=0,
                  meter: Meter | None = None, radius: int | None = None
                  ) -> tuple[np.ndarray, RunMetrics]:
    """Run the named variant; queue and gather ignore ``radius``."""
    if isinstance(choice, str):
        choice = VariantChoice(choice)
    if choice.name == "queue":
        return virtual_sssp(vg, meter)
    if choice.name == "gather":
        return virtual_sssp_gather(vg, meter)
    if choice.name == "nonrecursive":
        return virtual_sssp_nonrecursive(vg, seed=seed, meter=meter, radius=radius)
    if choice.name == "recursive":
        return virtual_sssp_recursive(vg, choice.eps or Fraction(1, 4), seed, meter, radius)
    raise ParamError(f"unknown virtual variant {choice.name!r}")
