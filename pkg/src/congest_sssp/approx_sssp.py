"""Approximate SSSP used to place nodes into distance buckets.

bounded_distance_sssp
    exact distances up to a cap K, one broadcast per node.
bounded_hop_sssp
    (1+eps)-approximate h-hop distances from O(log n) bounded-distance
    runs on rounded weights.
additive_sssp
    alpha-additive distances: bounded-hop runs from a random skeleton, an
    exact solve on the skeleton graph, and a final local combination.
virtual_approx_sssp
    the same recipe on a virtual graph.

Approximate values are kept as exact rationals: an integer numerator per
node and a common ``unit`` (a Fraction).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .congest_sim import kernels
from .congest_sim.metrics import RunMetrics, Trace
from .congest_sim.scheduler import schedule_runs
from .congest_sim.topology import INF
from .congest_sim.trees import Meter, VirtualNet
from .errors import ParamError, PromiseViolation
from .graph_model import WeightedInstance
from .sampling import hop_budget, sample_virtual_nodes, seed_sequence
from .short_range import replay_virtual_rounds
from .virtual_graph import VirtualGraph


@dataclass
class ApproxTable:
    """Approximate distances ``num * unit``; ``num`` is INF where nothing was learned."""

    num: np.ndarray
    unit: Fraction

    def floor(self) -> np.ndarray:
        out = np.full(self.num.size, INF, np.int64)
        fin = self.num < INF
        out[fin] = (self.num[fin] * self.unit.numerator) // self.unit.denominator
        return out

    def as_float(self) -> np.ndarray:
        out = self.num.astype(float) * float(self.unit)
        out[self.num >= INF] = np.inf
        return out

    def at_least(self, d: np.ndarray) -> np.ndarray:
        """Pointwise num*unit >= d (INF-aware)."""
        fin = self.num < INF
        lhs = np.where(fin, self.num, 0) * self.unit.numerator
        rhs = np.where(d < INF, d, 0) * self.unit.denominator
        return np.where(fin, (d < INF) & (lhs >= rhs), True)

    def at_most(self, bound_num: np.ndarray, bound_den: int) -> np.ndarray:
        """Pointwise num*unit <= bound_num/bound_den."""
        fin = self.num < INF
        return ~fin | (self.num * self.unit.numerator * bound_den
                       <= bound_num * self.unit.denominator)


def _as_fraction(eps) -> Fraction:
    eps = Fraction(eps).limit_denominator(10**9) if not isinstance(eps, Fraction) else eps
    if eps <= 0:
        raise ParamError("eps must be positive")
    return min(eps, Fraction(1))


def distance_cap(h: int, eps: Fraction) -> int:
    """K = floor((1 + 2/eps) * h)."""
    return h + (2 * h * eps.denominator) // eps.numerator


def scale_count(max_distance: int) -> int:
    """Number of distance guesses 2^1 .. 2^I needed to cover [1, max_distance]."""
    return max(1, math.ceil(math.log2(max(max_distance, 2))))


def lifted_weights(w: np.ndarray, h: int, eps: Fraction, i: int) -> np.ndarray:
    """max(1, ceil(2 h w / (eps 2^i))) in exact integer arithmetic.

    Zero weights are lifted to 1 so that flooding keyed on the value stays
    causal; the extra unit per hop is the same slack rounding already costs.
    """
    a, b = eps.numerator, eps.denominator
    num_scale = 2 * h * b
    den = a << i
    w = np.asarray(w, np.int64)
    if w.size and int(w.max()) * num_scale >= (1 << 62):
        out = np.array([max(1, -(-(int(x) * num_scale) // den)) for x in w.tolist()], object)
        return out.astype(np.int64)
    return np.maximum(1, -((-w * num_scale) // den))


def bounded_distance_sssp(inst: WeightedInstance, s: int, K: int,
                          record: bool = False) -> tuple[np.ndarray, RunMetrics]:
    """Exact distances that are at most K (INF beyond); K+1 rounds, one broadcast per node."""
    if inst.weights.size and inst.weights.min() < 1:
        raise ParamError("bounded-distance flooding needs positive weights")
    topo = inst.topology
    d, rounds, msgs, bc, ev_t, ev_c = kernels.bounded_distance(
        topo.indptr, topo.indices, inst.weights, s, K, 1 if record else 0)
    met = RunMetrics(int(rounds), msgs, bc, int(K), None)
    if record:
        met.trace = Trace()
        met.trace.add(ev_t, ev_c)
    return d, met


def _hop_runs(indptr, indices, w, sources, h, eps, max_distance, mode):
    """All bounded-distance runs for the given sources; returns numerators and raw runs."""
    I = scale_count(max_distance)
    K = distance_cap(h, eps)
    best = np.full((len(sources), indptr.size - 1), INF, np.int64)
    raw = []
    for i in range(1, I + 1):
        wi = lifted_weights(w, h, eps, i)
        for j, s in enumerate(sources):
            d, rounds, msgs, bc, ev_t, ev_c = kernels.bounded_distance(indptr, indices, wi,
                                                                        int(s), K, mode)
            fin = d < INF
            cand = np.where(fin, d << (i - 1), INF)
            np.minimum(best[j], cand, out=best[j])
            raw.append((rounds, msgs, bc, ev_t, ev_c))
    unit = Fraction(eps.numerator, h * eps.denominator)
    return best, unit, raw, K


def _traced_runs(indptr, raw, K) -> list[RunMetrics]:
    runs = []
    for rounds, msgs, bc, ev_t, ev_u in raw:
        met = RunMetrics(int(rounds), msgs, bc, int(K), Trace())
        met.trace.add(*kernels.expand_broadcasts(indptr, ev_t, ev_u))
        runs.append(met)
    return runs


def bounded_hop_sssp(inst: WeightedInstance, s: int, h: int, eps, seed: int = 0,
                     max_distance: int | None = None,
                     record: bool = False) -> tuple[ApproxTable, RunMetrics]:
    """(1+eps)-approximate h-hop distances from ``s``.

    Guess i covers distances up to 2^i, for i = 1..ceil(log2 R) with R =
    ``max_distance`` (default n-1, the radius promise). Never below the
    true distance; at most (1+eps) d^h where d^h <= R.
    """
    eps = _as_fraction(eps)
    if h < 1:
        raise ParamError("h must be at least 1")
    topo = inst.topology
    R = inst.n - 1 if max_distance is None else max_distance
    best, unit, raw, K = _hop_runs(topo.indptr, topo.indices, inst.weights, [s], h, eps, R, 2)
    runs = _traced_runs(topo.indptr, raw, K)
    composite, _ = schedule_runs(topo, runs, seed, keep_trace=record)
    composite.extra["K"] = K
    return ApproxTable(best[0], unit), composite


@dataclass
class AdditiveInfo:
    skeleton: np.ndarray
    h: int
    eps: Fraction
    K: int
    unreachable: int


def additive_sssp(inst: WeightedInstance, s: int, alpha: int, k: float, seed, *,
                  net: VirtualNet | None = None, h: int | None = None, strict: bool = False,
                  record: bool = False) -> tuple[np.ndarray, RunMetrics, AdditiveInfo]:
    """Distances d~ with d <= d~ <= d + alpha, assuming every d(s, .) <= n-1.

    1. sample a skeleton V' (rate k/n, s included);
    2. bounded-hop runs with hop budget h from every skeleton node, all
       multiplexed by the scheduler;
    3. skeleton graph with those (integer-scaled) values as edge weights,
       solved exactly by the virtual scaling algorithm;
    4. the skeleton distances are broadcast and every node takes
       min over u' of dist(u') + approx(u', v).
    """
    from .virtual_sssp import virtual_sssp

    n = inst.n
    topo = inst.topology
    if alpha < 1:
        raise ParamError("alpha must be at least 1")
    if net is None:
        net = VirtualNet.for_topology(topo)
    if n == 1:
        return (np.zeros(1, np.int64), RunMetrics.empty(topo, record),
                AdditiveInfo(np.array([s]), 1, Fraction(1), 0, 0))
    k = min(max(k, 1), n)
    s_sample, s_sched = seed_sequence(seed).spawn(2)
    skel = sample_virtual_nodes(topo, k, s_sample, s)
    h = h if h is not None else hop_budget(n, k)
    # slack per segment is eps*d plus eps*hops/h from rounding, so shave eps
    # a little below alpha/n to keep the total strictly under alpha
    eps = min(Fraction(1), Fraction(alpha, n + math.ceil(n / h)))
    best, unit, raw, K = _hop_runs(topo.indptr, topo.indices, inst.weights, skel, h, eps,
                                   n - 1, 2)
    runs = _traced_runs(topo.indptr, raw, K)
    metrics, _ = schedule_runs(topo, runs, int(s_sched.generate_state(1)[0]), keep_trace=record)
    raw.clear()
    runs.clear()

    src_local = int(np.searchsorted(skel, s))
    sub = best[:, skel]
    tails, heads = np.nonzero(sub < INF)
    keep = tails != heads
    tails, heads = tails[keep], heads[keep]
    sk_graph = VirtualGraph(skel, src_local, tails, heads, sub[tails, heads], net)
    meter = net.meter(record)
    sk_dist, _ = virtual_sssp(sk_graph, meter=meter)
    reached = np.flatnonzero(sk_dist < INF)
    meter.round(skel[reached])
    total = np.full(n, INF, np.int64)
    for j in reached:
        row = best[j]
        fin = row < INF
        np.minimum(total, np.where(fin, row + sk_dist[j], INF), out=total)
    approx = ApproxTable(total, unit).floor()
    metrics.absorb(meter.metrics())
    unreachable = int(np.count_nonzero(approx >= INF))
    if unreachable and strict:
        raise PromiseViolation(f"{unreachable} nodes got no estimate; radius promise broken?")
    metrics.extra.update(skeleton_size=int(skel.size), h=h, K=K)
    return approx, metrics, AdditiveInfo(skel, h, eps, K, unreachable)


def virtual_approx_sssp(vg: VirtualGraph, eps, seed, *, additive: int | None = None,
                        meter: Meter | None = None) -> tuple[np.ndarray, RunMetrics]:
    """Approximate distances on a virtual graph, floored to integers.

    With positive weights, d <= d~ <= (1+eps) d. With ``additive`` set, eps
    is derived so that d <= d~ < d + additive for every node within the
    declared radius, zero weights included.
    """
    from .virtual_sssp import gather_distances, virtual_sssp_gather

    own = meter is None
    meter = vg.net.meter() if own else meter
    n = vg.n_nodes
    eps = _as_fraction(eps if additive is None else 1)
    if n == 1:
        return np.zeros(1, np.int64), meter.metrics()
    d_hat = vg.net.d_hat
    k = math.ceil(math.sqrt(d_hat / float(eps)))
    if k >= n:
        d, _ = virtual_sssp_gather(vg, meter=meter)
        return d, meter.metrics()
    skel = sample_virtual_nodes(n, k, seed_sequence(seed), vg.source)
    h = hop_budget(n, k)
    R = vg.radius if vg.radius is not None else max(1, (n - 1) * int(vg.weights.max(initial=1)))
    if additive is not None:
        eps = min(Fraction(1), Fraction(additive, R + math.ceil(n / h)))
    indptr, heads, w = vg.csr()
    best, unit, raw, K = _hop_runs(indptr, heads, w, skel, h, eps, max(R, 1), 2)
    replay_virtual_rounds(meter, [r[3] for r in raw], [vg.hosts[r[4]] for r in raw], K + 1)
    raw.clear()
    src_local = int(np.searchsorted(skel, vg.source))
    sub = best[:, skel]
    t, hd = np.nonzero(sub < INF)
    keep = t != hd
    t, hd = t[keep], hd[keep]
    sk_graph = VirtualGraph(vg.hosts[skel], src_local, t, hd, sub[t, hd], vg.net)
    sk_dist = gather_distances(sk_graph, meter)
    reached = np.flatnonzero(sk_dist < INF)
    meter.round(vg.hosts[skel[reached]])
    total = np.full(n, INF, np.int64)
    for j in reached:
        row = best[j]
        np.minimum(total, np.where(row < INF, row + sk_dist[j], INF), out=total)
    return ApproxTable(total, unit).floor(), meter.metrics()
