"""Bit-prefix weight scaling: reduce exact SSSP to a sequence of small-radius instances.

Iteration i works with w_i, the i most significant bits of every weight,
and hands the inner solver the reduced weights

    l_i(u, v) = 2 d_{i-1}(u) + w_i(u, v) - 2 d_{i-1}(v)

which are non-negative and give every node a distance of at most n-1.
The distances under w_i are then 2 d_{i-1} + d_{l_i}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .congest_sim.metrics import RunMetrics
from .congest_sim.topology import INF
from .errors import ConsistencyError, NegativeWeight, RangeError
from .graph_model import WeightedInstance

InnerSolver = Callable[[WeightedInstance, int, int], tuple[np.ndarray, RunMetrics]]


def num_iterations(lam: int) -> int:
    """floor(log2 lam) + 1."""
    if lam < 1:
        raise RangeError("lam must be positive")
    return int(lam).bit_length()


def weight_prefix(w: int, i: int, T: int) -> int:
    if not 0 <= w < (1 << T):
        raise RangeError(f"weight {w} does not fit in {T} bits")
    if not 1 <= i <= T:
        raise RangeError(f"prefix length {i} outside [1, {T}]")
    return w >> (T - i)


def prefix_weights(weights: np.ndarray, i: int, T: int) -> np.ndarray:
    weights = np.asarray(weights, np.int64)
    if weights.size and (weights.min() < 0 or weights.max() >= (1 << T)):
        raise RangeError(f"weights do not fit in {T} bits")
    if not 1 <= i <= T:
        raise RangeError(f"prefix length {i} outside [1, {T}]")
    return weights >> (T - i)


def reweight_arrays(tails: np.ndarray, heads: np.ndarray, w_i: np.ndarray,
                    d_prev: np.ndarray, clamp: bool = False) -> tuple[np.ndarray, bool]:
    """Reduced weights per edge; returns (weights, clamped_any)."""
    ell = 2 * d_prev[tails] + w_i - 2 * d_prev[heads]
    neg = ell < 0
    if neg.any():
        if not clamp:
            k = int(np.flatnonzero(neg)[0])
            raise NegativeWeight(f"edge {int(tails[k])}->{int(heads[k])} reweighted to {int(ell[k])}")
        ell = np.maximum(ell, 0)
    return ell, bool(neg.any())


def reweight(inst: WeightedInstance, d_prev: np.ndarray, w_i: np.ndarray,
             clamp: bool = False) -> tuple[np.ndarray, RunMetrics, bool]:
    """Distributed form: every node sends its previous distance to all neighbors (one round)."""
    topo = inst.topology
    if np.any(d_prev >= INF):
        raise ValueError("previous distances must be finite")
    ell, clamped = reweight_arrays(topo.tails, topo.indices, w_i, d_prev, clamp)
    met = RunMetrics(1, np.ones(topo.num_channels, np.int64), np.ones(topo.n, np.int64),
                     int(d_prev.max()) if d_prev.size else 0)
    return ell, met, clamped


@dataclass
class ScalingResult:
    dist: np.ndarray
    metrics: RunMetrics
    iterations: int
    suspect: bool = False
    checks: list[dict] = field(default_factory=list)


def check_reduction(inst: WeightedInstance, s: int, w_prev: np.ndarray | None,
                    w_i: np.ndarray, ell: np.ndarray) -> dict:
    """Oracle check of the three reduction properties for one iteration."""
    from .oracle import dijkstra
    n = inst.n
    d_ell = dijkstra(inst.with_weights(ell), s).dist
    d_wi = dijkstra(inst.with_weights(w_i), s).dist
    d_prev = (dijkstra(inst.with_weights(w_prev), s).dist if w_prev is not None
              else np.zeros(n, np.int64))
    return {"nonnegative": bool(np.all(ell >= 0)),
            "radius": bool(d_ell.max() <= n - 1),
            "recurrence": bool(np.array_equal(d_wi, 2 * d_prev + d_ell))}


def run_scaling(inst: WeightedInstance, s: int, inner: InnerSolver, *, debug: bool = False,
                clamp: bool = False, record: bool = False) -> ScalingResult:
    """Outer scaling loop: exactly T calls of ``inner(reduced_instance, s, i)``.

    With ``clamp`` set, a negative reduced weight (only possible after an
    inexact inner solve) is raised to zero and the run marked suspect
    instead of failing. ``debug`` checks every iteration against the oracle.
    """
    topo = inst.topology
    T = num_iterations(inst.lam)
    d = np.zeros(inst.n, np.int64)
    metrics = RunMetrics.empty(topo, record)
    suspect = False
    checks = []
    w_prev = None
    for i in range(1, T + 1):
        w_i = prefix_weights(inst.weights, i, T)
        if i == 1:
            ell = w_i.copy()       # d_0 = 0 is known to everyone, nothing to send
        else:
            ell, met, clamped = reweight(inst, d, w_i, clamp)
            suspect |= clamped
            if record:
                met.trace = _flat_trace(topo)
            metrics.absorb(met)
        if debug:
            chk = check_reduction(inst, s, w_prev, w_i, ell)
            chk["iteration"] = i
            checks.append(chk)
            if not all(chk[k] for k in ("nonnegative", "radius", "recurrence")):
                raise ConsistencyError(f"reduction properties fail at iteration {i}: {chk}")
        delta, met = inner(inst.with_weights(ell), s, i)
        metrics.absorb(met)
        if np.any(delta >= INF):
            raise ConsistencyError(f"inner solver left a node unreachable at iteration {i}")
        d = 2 * d + delta
        w_prev = w_i
    if debug:
        from .oracle import dijkstra
        if not np.array_equal(d, dijkstra(inst, s).dist):
            raise ConsistencyError("scaling output differs from the oracle")
    return ScalingResult(d, metrics, T, suspect, checks)


def _flat_trace(topo):
    from .congest_sim.metrics import Trace
    tr = Trace()
    tr.add(np.ones(topo.num_channels, np.int64), np.arange(topo.num_channels))
    return tr
