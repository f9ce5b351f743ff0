"""Top-level exact SSSP: scaling, additive estimates, bucketed small-weight solve.

Per scaling iteration (weights reduced so every distance is at most n-1):

1. ``additive_sssp`` gives every node d~ with d <= d~ < d + ell;
2. ``small_weight_sssp`` samples virtual nodes, runs ShortRange from each
   of them to get the virtual graph, and then sweeps buckets of width ell:
   Extend, solve the bucket's virtual graph, merge, Extend again.

``multi_source_sssp`` runs the same pipeline for several sources in
lockstep and multiplexes the per-source runs with the random-delay scheduler.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .approx_sssp import additive_sssp
from .congest_sim import kernels
from .congest_sim.metrics import RunMetrics, Trace
from .congest_sim.scheduler import schedule_runs
from .congest_sim.topology import INF
from .congest_sim.trees import VirtualNet, build_bfs_tree, estimate_diameter
from .errors import ConsistencyError, ParamError
from .graph_model import WeightedInstance
from .params import MainParams, VariantChoice, choose_parameters, select_virtual_variant
from .sampling import child_seed, sample_virtual_nodes
from .scaling import check_reduction, num_iterations, prefix_weights, reweight_arrays
from .short_range import ShortRangeParams, short_range_many
from .virtual_graph import VirtualGraph
from .virtual_sssp import solve_virtual

__all__ = ["MainParams", "bellman_ford_baseline", "choose_parameters", "extend",
           "main_sssp", "multi_source_sssp", "sample_virtual_nodes", "small_weight_sssp"]

VIRTUAL_VARIANTS = ("queue", "gather", "nonrecursive", "recursive")


def _kernel_metrics(rounds, msgs, bc, ev_t, ev_c, record: bool, peak: int = 0) -> RunMetrics:
    met = RunMetrics(int(rounds), msgs, bc, peak, None)
    if record:
        met.trace = Trace()
        met.trace.add(ev_t, ev_c)
    return met


def extend(inst: WeightedInstance, d: np.ndarray, h: int, ell: int, i: int,
           record: bool = False) -> tuple[np.ndarray, RunMetrics]:
    """h rounds of Bellman-Ford restricted to sums in [i*ell, (i+1)*ell)."""
    topo = inst.topology
    lo, hi = i * ell, (i + 1) * ell
    out, rounds, msgs, bc, ev_t, ev_c = kernels.extend(
        topo.indptr, topo.indices, inst.weights, np.asarray(d, np.int64), h, lo, hi,
        1 if record else 0)
    return out, _kernel_metrics(rounds, msgs, bc, ev_t, ev_c, record, hi)


def _hop_bf(inst: WeightedInstance, d: np.ndarray, h: int, record: bool):
    """Unrestricted depth-h Bellman-Ford from the current estimates (test-only swap-in)."""
    topo = inst.topology
    out, rounds, msgs, bc, ev_t, ev_c = kernels.extend(
        topo.indptr, topo.indices, inst.weights, np.asarray(d, np.int64), h, 0, INF,
        1 if record else 0)
    return out, _kernel_metrics(rounds, msgs, bc, ev_t, ev_c, record)


@dataclass
class BucketLog:
    """Per-bucket bookkeeping of one small-weight solve."""
    sizes: list = field(default_factory=list)
    variants: list = field(default_factory=list)
    failures: list = field(default_factory=list)


def small_weight_sssp(inst: WeightedInstance, s: int, d_tilde: np.ndarray, params: MainParams,
                      seed, *, net: VirtualNet | None = None,
                      variant: VariantChoice | str | None = None, kappa: int = 1,
                      debug: bool = False, plain_bf: bool = False,
                      record: bool = False) -> tuple[np.ndarray, RunMetrics]:
    """Exact distances (w.h.p.) for an instance of radius at most n-1.

    ``d_tilde`` must satisfy d <= d~ < d + ell. With ``debug`` set the bucket
    invariant (all nodes closer than (i+1)*ell are exact after bucket i) is
    checked against the oracle; a violation raises ConsistencyError.
    ``plain_bf`` replaces Extend with unrestricted depth-h Bellman-Ford.
    """
    topo = inst.topology
    n = inst.n
    net = net if net is not None else VirtualNet.for_topology(topo)
    ell, h = params.ell, params.h
    d_tilde = np.asarray(d_tilde, np.int64)
    s_sample, s_sr, s_virt = (child_seed(seed, j) for j in range(3))
    vnodes = sample_virtual_nodes(topo, min(params.k, n), s_sample, s)
    src = int(np.searchsorted(vnodes, s))
    sr = ShortRangeParams(h, ell, params.q)
    tables, metrics = short_range_many(inst, vnodes, sr, int(s_sr.generate_state(1)[0]),
                                       record=record)
    sub = tables[:, vnodes]
    a, b = np.nonzero(sub < INF)
    g_virtual = VirtualGraph(vnodes, src, a, b, sub[a, b], net)
    del tables, sub

    true = None
    if debug:
        from .oracle import dijkstra
        true = dijkstra(inst, s).dist
    log = BucketLog()
    step = _hop_bf if plain_bf else None
    d = np.full(n, INF, np.int64)
    d[s] = 0
    approx_v = d_tilde[vnodes]
    for i in range(n // ell + 1):
        d, met = step(inst, d, h, record) if step else extend(inst, d, h, ell, i, record)
        metrics.absorb(met)
        members = np.flatnonzero((approx_v >= i * ell) & (approx_v < (i + 2) * ell))
        members = members[members != src]
        if members.size:
            nodes = np.r_[src, members]
            bucket, _ = g_virtual.induced(nodes, src)
            fin = np.flatnonzero(d[vnodes[members]] < INF)
            bucket = VirtualGraph(bucket.hosts, 0, np.r_[bucket.tails, np.zeros(fin.size, np.int64)],
                                  np.r_[bucket.heads, fin + 1],
                                  np.r_[bucket.weights, d[vnodes[members[fin]]]],
                                  net, radius=min(n - 1, (i + 1) * ell))
            choice = variant
            if choice is None:
                choice = select_virtual_variant(bucket.n_nodes, bucket.radius, net.d_hat, kappa, n)
            meter = net.meter(record)
            bd, _ = solve_virtual(bucket, choice, child_seed(s_virt, i), meter,
                                  radius=bucket.radius)
            metrics.absorb(meter.metrics())
            hosts = vnodes[members]
            d[hosts] = np.minimum(d[hosts], bd[1:])
            log.sizes.append(int(members.size))
            log.variants.append(choice if isinstance(choice, str) else choice.name)
        d, met = step(inst, d, h, record) if step else extend(inst, d, h, ell, i, record)
        metrics.absorb(met)
        if true is not None:
            near = true < (i + 1) * ell
            if not np.array_equal(d[near], true[near]):
                log.failures.append(i)
                raise ConsistencyError(f"bucket invariant broken after bucket {i}")
    metrics.extra.update(virtual_nodes=int(vnodes.size), buckets=log.sizes,
                         bucket_variants=log.variants)
    return d, metrics


def _auto_variant(n: int, d_hat: int, kappa: int) -> tuple[MainParams, str | None]:
    """Parameter set and (optional) fixed virtual variant for the regime."""
    base = choose_parameters(n, d_hat, "base" if kappa == 1 else "multi_source", kappa)
    choice = select_virtual_variant(base.k, n - 1, d_hat, kappa, n)
    if choice.name == "queue":
        return base, None
    if choice.name == "gather":
        return choose_parameters(n, d_hat, "gather", kappa), None
    return choose_parameters(n, d_hat, "virtualizing", kappa), None


def _params_for(n: int, d_hat: int, variant: str | None, kappa: int) -> MainParams:
    if variant is None:
        return _auto_variant(n, d_hat, kappa)[0]
    if variant not in VIRTUAL_VARIANTS:
        raise ParamError(f"unknown variant {variant!r}; pick one of {VIRTUAL_VARIANTS}")
    table = {"queue": "base" if kappa == 1 else "multi_source", "gather": "gather",
             "nonrecursive": "virtualizing", "recursive": "virtualizing"}
    return choose_parameters(n, d_hat, table[variant], kappa)


def _lockstep(inst: WeightedInstance, sources: Sequence[int], variant: str | None, seed,
              debug: bool, plain_bf: bool, record: bool) -> tuple[np.ndarray, RunMetrics]:
    topo = inst.topology
    n = inst.n
    kappa = len(sources)
    tree, metrics = build_bfs_tree(topo, 0)
    if record:
        metrics.trace = metrics.trace or Trace()
    else:
        metrics.trace = None
    d_hat = estimate_diameter(topo, tree)
    net = VirtualNet(topo, tree, d_hat)
    if n == 1:
        metrics.extra.update(d_hat=d_hat, iterations=0)
        return np.zeros((kappa, 1), np.int64), metrics
    params = _params_for(n, d_hat, variant, kappa)
    fixed = None
    if variant is not None:
        fixed = VariantChoice(variant, None)
        if variant == "recursive":
            from .params import recursion_eps
            from fractions import Fraction
            e = recursion_eps(max(params.k, 2), d_hat, kappa)
            e = min(max(e, 1 / 6), 0.5)
            fixed = VariantChoice("recursive", Fraction(e).limit_denominator(24))
    T = num_iterations(inst.lam)
    d = np.zeros((kappa, n), np.int64)
    w_prev = None
    suspect = False
    checks, per_iter = [], []
    for i in range(1, T + 1):
        w_i = prefix_weights(inst.weights, i, T)
        runs = []
        ells = []
        for j, s in enumerate(sources):
            if i == 1:
                ell = w_i.copy()
            else:
                ell, clamped = reweight_arrays(topo.tails, topo.indices, w_i, d[j], clamp=not debug)
                suspect |= clamped
            ells.append(ell)
            if debug:
                chk = check_reduction(inst, int(s), w_prev, w_i, ell)
                chk.update(iteration=i, source=int(s))
                checks.append(chk)
                if not all(chk[k] for k in ("nonnegative", "radius", "recurrence")):
                    raise ConsistencyError(f"reduction properties fail at iteration {i}: {chk}")
        if i > 1:
            # every node sends its kappa previous distances to each neighbor
            met = RunMetrics(kappa, np.full(topo.num_channels, kappa, np.int64),
                             np.full(n, kappa, np.int64), int(d.max()),
                             _flat(topo, kappa) if record else None)
            metrics.absorb(met)
        sched = record or kappa > 1
        for j, s in enumerate(sources):
            sub_inst = inst.with_weights(ells[j])
            base_seed = child_seed(seed, i, j)
            approx, met_a, _ = additive_sssp(sub_inst, int(s), params.ell, params.k,
                                             child_seed(base_seed, 0), net=net, h=params.h,
                                             record=sched)
            delta, met_b = small_weight_sssp(sub_inst, int(s), approx, params,
                                             child_seed(base_seed, 1), net=net, variant=fixed,
                                             kappa=kappa, debug=debug, plain_bf=plain_bf,
                                             record=sched)
            met_a.absorb(met_b)
            met_a.extra.update(buckets=met_b.extra.get("buckets"),
                               bucket_variants=met_b.extra.get("bucket_variants"))
            if np.any(delta >= INF):
                raise ConsistencyError(f"iteration {i} left a node without a distance")
            d[j] = 2 * d[j] + delta
            runs.append(met_a)
        if kappa == 1:
            it = runs[0]
        else:
            it, _ = schedule_runs(topo, runs, int(child_seed(seed, i, kappa).generate_state(1)[0]),
                                  keep_trace=record)
        per_iter.append({"iteration": i, "rounds": int(it.rounds),
                         "max_edge_congestion": it.max_edge_congestion,
                         "bucket_variants": runs[0].extra.get("bucket_variants")})
        if not record:
            it.trace = None
        metrics.absorb(it)
        w_prev = w_i
    if debug:
        from .oracle import dijkstra
        for j, s in enumerate(sources):
            if not np.array_equal(d[j], dijkstra(inst, int(s)).dist):
                raise ConsistencyError("output differs from the oracle")
    metrics.extra.update(d_hat=d_hat, iterations=T, k=params.k, h=params.h, ell=params.ell,
                         q=params.q, param_set=params.variant, suspect=suspect,
                         per_iteration=per_iter, checks=checks)
    return d, metrics


def _flat(topo, times: int) -> Trace:
    tr = Trace()
    t = np.repeat(np.arange(1, times + 1), topo.num_channels)
    tr.add(t, np.tile(np.arange(topo.num_channels), times))
    return tr


def main_sssp(inst: WeightedInstance, s: int = 0, variant: str | None = None, seed=0, *,
              debug: bool = False, plain_bf: bool = False,
              record: bool = False) -> tuple[np.ndarray, RunMetrics]:
    """Exact single-source distances (w.h.p.; never below the true distance).

    ``variant`` forces the virtual-graph algorithm used inside the buckets
    (queue, gather, nonrecursive or recursive); by default it is picked per
    bucket from n_V', D-hat and the radius. ``debug`` checks every scaling
    iteration and bucket against the oracle and raises on any deviation.
    """
    d, met = _lockstep(inst, [s], variant, seed, debug, plain_bf, record)
    return d[0], met


def multi_source_sssp(inst: WeightedInstance, sources: Sequence[int], seed=0, *,
                      variant: str | None = None, debug: bool = False,
                      record: bool = False) -> tuple[np.ndarray, RunMetrics]:
    """One exact table per source; the per-source runs share the network.

    Scaling iterations advance in lockstep. Each iteration's kappa runs are
    multiplexed by the random-delay scheduler; with a single source no
    scheduling is needed and the result equals ``main_sssp``.
    """
    sources = [int(x) for x in sources]
    if not 1 <= len(sources) <= inst.n:
        raise ParamError("need between 1 and n sources")
    if len(set(sources)) != len(sources):
        raise ParamError("sources must be distinct")
    return _lockstep(inst, sources, variant, seed, debug, False, record)


def bellman_ford_baseline(inst: WeightedInstance, s: int = 0,
                          record: bool = False) -> tuple[np.ndarray, RunMetrics]:
    """Synchronous Bellman-Ford for n-1 rounds (nodes cannot tell earlier that it is over)."""
    topo = inst.topology
    rounds = max(inst.n - 1, 0)
    d, r, msgs, bc, ev_t, ev_c = kernels.bellman_ford(topo.indptr, topo.indices, inst.weights,
                                                      s, rounds, 1 if record else 0)
    fin = d[d < INF]
    return d, _kernel_metrics(r, msgs, bc, ev_t, ev_c, record, int(fin.max()) if fin.size else 0)
