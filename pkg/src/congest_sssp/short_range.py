"""Restricted-range SSSP: granular BFS followed by a capped Bellman-Ford phase.

``short_range`` gives every node t a value that never undercuts d(s, t) and
is exact whenever some shortest s-t path has at most h hops and length at
most ell, using ell*q + 2h + 1 rounds and at most 1 + floor(h/q) messages
per channel direction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .congest_sim import kernels
from .congest_sim.metrics import RunMetrics, Trace
from .congest_sim.scheduler import schedule_runs
from .errors import ParamError
from .graph_model import WeightedInstance
from .virtual_graph import VirtualGraph


@dataclass(frozen=True)
class ShortRangeParams:
    h: int
    ell: int
    q: int

    def __post_init__(self):
        if self.q < 1:
            raise ParamError(f"q must be at least 1, got {self.q}")
        if self.h < 1 or self.ell < 1:
            raise ParamError("h and ell must be at least 1")

    @property
    def rounds(self) -> int:
        return self.ell * self.q + 2 * self.h + 1

    @property
    def per_channel(self) -> int:
        return 1 + self.h // self.q


def short_range(inst: WeightedInstance, s: int, params: ShortRangeParams,
                record: bool = False) -> tuple[np.ndarray, RunMetrics]:
    topo = inst.topology
    d, rounds, msgs, bc, ev_t, ev_u = kernels.short_range(
        topo.indptr, topo.indices, inst.weights, s, params.h, params.ell, params.q,
        2 if record else 0)
    met = RunMetrics(int(rounds), msgs, bc, _peak(d, params), None)
    if record:
        met.trace = Trace()
        met.trace.add(*kernels.expand_broadcasts(topo.indptr, ev_t, ev_u))
    return d, met


def _peak(d: np.ndarray, params: ShortRangeParams) -> int:
    # BFS messages carry the scaled value, at most ell*q + h
    fin = d[d < kernels.INF]
    return max(params.ell * params.q + params.h, int(fin.max()) if fin.size else 0)


def short_range_many(inst: WeightedInstance, sources: Sequence[int], params: ShortRangeParams,
                     seed: int, record: bool = False) -> tuple[np.ndarray, RunMetrics]:
    """One ShortRange per source, multiplexed by the random-delay scheduler.

    Returns a (len(sources), n) table and the composite metrics.
    """
    if len(sources) == 0:
        raise ParamError("need at least one source")
    tables = np.empty((len(sources), inst.n), np.int64)
    runs = []
    for j, s in enumerate(sources):
        tables[j], met = short_range(inst, int(s), params, record=True)
        runs.append(met)
    if len(runs) == 1:
        met = runs[0]
        if not record:
            met.trace = None
        met.extra.update(dilation=met.rounds, congestion=met.max_edge_congestion, delays=[0])
        return tables, met
    composite, _ = schedule_runs(inst.topology, runs, seed, keep_trace=record)
    return tables, composite


def virtualized_short_range(vg: VirtualGraph, sources: Sequence[int], params: ShortRangeParams,
                            seed: int = 0, record: bool = False,
                            meter=None) -> tuple[np.ndarray, RunMetrics]:
    """ShortRange from several virtual sources at once on a virtual graph.

    Every step of the protocol is a broadcast, so virtual round t of all runs
    together is one network-wide pipelined broadcast of the broadcasts made
    in round t by any run. Rounds nobody uses cost D-hat network rounds.
    With ``meter`` given the cost is appended to it and the returned metrics
    cover only this call.
    """
    indptr, heads, w = vg.csr()
    tables = np.empty((len(sources), vg.n_nodes), np.int64)
    ev_rounds, ev_hosts = [], []
    for j, s in enumerate(sources):
        d, _, _, _, ev_t, ev_u = kernels.short_range(indptr, heads, w, int(s), params.h,
                                                     params.ell, params.q, 2)
        tables[j] = d
        ev_rounds.append(ev_t)
        ev_hosts.append(vg.hosts[ev_u])
    own = vg.net.meter(record or (meter is not None and meter.record))
    replay_virtual_rounds(own, ev_rounds, ev_hosts, params.rounds)
    if meter is not None:
        meter.add(own)
    met = own.metrics()
    met.extra["broadcasts"] = int(sum(len(e) for e in ev_rounds))
    return tables, met


def replay_virtual_rounds(meter, ev_rounds: list[np.ndarray], ev_hosts: list[np.ndarray],
                          total_rounds: int) -> None:
    """Charge ``total_rounds`` virtual rounds given logged (round, host) broadcasts."""
    t = np.concatenate(ev_rounds) if ev_rounds else np.zeros(0, np.int64)
    hosts = np.concatenate(ev_hosts) if ev_hosts else np.zeros(0, np.int64)
    order = np.argsort(t, kind="stable")
    t, hosts = t[order], hosts[order]
    busy, starts = np.unique(t, return_index=True)
    ends = np.r_[starts[1:], t.size]
    prev = 0
    for r, a, b in zip(busy.tolist(), starts.tolist(), ends.tolist()):
        meter.idle(r - prev - 1)
        meter.round(hosts[a:b])
        prev = r
    meter.idle(max(0, total_rounds - prev))
