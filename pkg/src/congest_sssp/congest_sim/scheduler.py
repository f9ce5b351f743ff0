from __future__ import annotations

import math
import os
from typing import Any, Sequence

import numpy as np

from ..errors import RoundCapExceeded
from .engine import NodeProgram, run_protocol
from . import kernels
from .metrics import RunMetrics, Trace
from .topology import Topology

DEFAULT_ROUND_CAP_MULTIPLIER = 64


def round_cap_multiplier() -> int:
    return int(os.environ.get("ROUND_CAP_MULTIPLIER", DEFAULT_ROUND_CAP_MULTIPLIER))


def scheduler_cap(n: int, dilation: int, congestion: int, multiplier: int | None = None) -> int:
    mult = round_cap_multiplier() if multiplier is None else multiplier
    return mult * (dilation + congestion) * max(1, math.ceil(math.log2(max(n, 2))))


def schedule_runs(topology: Topology, runs: Sequence[RunMetrics], seed: int,
                  congestion: int | None = None, multiplier: int | None = None,
                  keep_trace: bool = False) -> tuple[RunMetrics, np.ndarray]:
    """Multiplex already-traced solo runs with random start delays.

    Instance j starts at phase delay_j, drawn uniformly from [0, C). Phase p
    carries round p - delay_j of every instance j and lasts as many rounds
    as the most loaded channel needs (at least one); inside a phase each
    channel delivers its messages FIFO, one per round. Each instance sees
    the same inboxes as in its solo run, just spread out in time, so its
    output is unchanged. Returns composite metrics and the delays.
    """
    if any(r.trace is None for r in runs):
        raise ValueError("every run needs a trace to be scheduled")
    n_ch = topology.num_channels
    total = np.zeros(n_ch, np.int64)
    bcast = np.zeros(topology.n, np.int64)
    peak = 0
    for r in runs:
        total += r.edge_messages
        bcast += r.node_broadcasts
        peak = max(peak, r.peak_word)
    measured = int(total.max()) if n_ch else 0
    c = measured if congestion is None else max(int(congestion), 1)
    dilation = max((r.rounds for r in runs), default=0)
    rng = np.random.default_rng(seed)
    delays = rng.integers(0, c, size=len(runs)) if c > 1 else np.zeros(len(runs), np.int64)

    horizon = int(max((d + r.rounds for d, r in zip(delays, runs)), default=0))
    ts, chs = [], []
    for d, r in zip(delays, runs):
        t, ch = r.trace.arrays()
        ts.append(t + d)
        chs.append(ch)
    phase = np.concatenate(ts) if ts else np.zeros(0, np.int64)
    chan = np.concatenate(chs) if chs else np.zeros(0, np.int64)
    length = np.ones(horizon + 1, np.int64)
    length[0] = 0
    new_t = np.zeros(0, np.int64)
    if phase.size:
        load, pos = kernels.phase_loads(phase, chan, horizon, n_ch)
        np.maximum(length, load, out=length)
        length[0] = 0
        if keep_trace:
            start = np.concatenate([[0], np.cumsum(length)])   # start[p] = rounds before phase p
            new_t = start[phase] + pos + 1
    makespan = int(length.sum())
    cap = scheduler_cap(topology.n, dilation, measured, multiplier)
    if makespan > cap:
        raise RoundCapExceeded(f"makespan {makespan} above cap {cap}")
    out = RunMetrics(makespan, total, bcast, peak, Trace() if keep_trace else None)
    if keep_trace:
        out.trace.add(new_t, chan)
    out.extra.update(dilation=dilation, congestion=measured, delays=delays.tolist())
    return out, delays


def schedule_parallel(topology: Topology, instances: Sequence[NodeProgram], seed: int, *,
                      round_cap: int = 10**6, lam: int = 1, configs: Sequence[dict] | None = None,
                      congestion: int | None = None) -> tuple[list[list[Any]], RunMetrics]:
    """Run independent protocol instances concurrently on one network."""
    results, runs = [], []
    for j, prog in enumerate(instances):
        cfg = configs[j] if configs is not None else None
        out, met = run_protocol(topology, prog, seed + j, round_cap, lam=lam, config=cfg,
                                record_trace=True)
        results.append(out)
        runs.append(met)
    composite, _ = schedule_runs(topology, runs, seed, congestion)
    return results, composite
