from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

import numpy as np

from ..errors import CapacityViolation, PayloadViolation, RoundCapExceeded
from .metrics import RunMetrics, Trace
from .topology import Topology

MAX_WORDS = 2


@dataclass(frozen=True)
class NodeContext:
    """What a node may look at besides its own state and inbox."""

    node: int
    neighbors: tuple[int, ...]
    n: int
    word_cap: int
    rng: np.random.Generator
    config: Mapping[str, Any] = field(default_factory=dict)

    @property
    def infinity(self) -> int:
        """Wire encoding of an unreachable distance."""
        return self.word_cap + 1


class NodeProgram:
    """Per-node handlers of a synchronous protocol.

    ``init`` builds the local state. ``step`` is called once per round with
    the messages sent to this node in the previous round (keyed by sender)
    and returns the new state plus an outbox, which is either a mapping
    neighbor -> payload or an iterable of (neighbor, payload) pairs.
    A payload is an int or a tuple of at most two ints.
    """

    def init(self, ctx: NodeContext) -> Any:
        return None

    def step(self, ctx: NodeContext, state: Any, rnd: int,
             inbox: Mapping[int, tuple[int, ...]]) -> tuple[Any, Any]:
        return state, ()

    def is_done(self, ctx: NodeContext, state: Any) -> bool:
        return True

    def output(self, ctx: NodeContext, state: Any) -> Any:
        return state


def node_contexts(topology: Topology, seed: int, word_cap: int,
                  config: Mapping[str, Any] | None = None) -> list[NodeContext]:
    cfg = dict(config or {})
    return [NodeContext(u, tuple(int(v) for v in topology.neighbors(u)), topology.n, word_cap,
                        np.random.default_rng([seed, u]), cfg)
            for u in range(topology.n)]


def _normalize(payload: Any, cap: int) -> tuple[int, ...]:
    words = (payload,) if isinstance(payload, (int, np.integer)) else tuple(payload)
    if not 1 <= len(words) <= MAX_WORDS:
        raise PayloadViolation(f"payload has {len(words)} words")
    out = []
    for w in words:
        if not isinstance(w, (int, np.integer)) or isinstance(w, bool):
            raise PayloadViolation(f"non-integer word {w!r}")
        if not 0 <= w <= cap + 1:
            raise PayloadViolation(f"word {w} outside [0, {cap + 1}]")
        out.append(int(w))
    return tuple(out)


def _pairs(outbox: Any) -> Iterable[tuple[int, Any]]:
    if outbox is None:
        return ()
    if isinstance(outbox, Mapping):
        return outbox.items()
    return outbox


def run_protocol(topology: Topology, program: NodeProgram, seed: int, round_cap: int, *,
                 lam: int = 1, word_cap: int | None = None,
                 config: Mapping[str, Any] | None = None,
                 record_trace: bool = False) -> tuple[list[Any], RunMetrics]:
    """Execute ``program`` on every node in lockstep rounds.

    A message sent in round t shows up in the receiver's inbox at round t+1.
    The run ends once every node reports done and nothing is in flight; the
    final receive-only step belongs to the last sending round, so a single
    exchange costs one round. Returns per-node outputs and the metrics.
    """
    if round_cap <= 0:
        raise ValueError("round_cap must be positive")
    n = topology.n
    cap = word_cap if word_cap is not None else n * lam
    ctxs = node_contexts(topology, seed, cap, config)
    states = [program.init(ctx) for ctx in ctxs]
    metrics = RunMetrics.empty(topology, record_trace)
    inboxes: list[dict[int, tuple[int, ...]]] = [{} for _ in range(n)]
    in_flight = False
    rnd = 0
    ev_t: list[int] = []
    ev_ch: list[int] = []
    while in_flight or not all(program.is_done(c, s) for c, s in zip(ctxs, states)):
        rnd += 1
        if rnd > round_cap + 1:
            raise RoundCapExceeded(f"no termination within {round_cap} rounds")
        nxt: list[dict[int, tuple[int, ...]]] = [{} for _ in range(n)]
        in_flight = False
        for u in range(n):
            inbox = dict(sorted(inboxes[u].items()))
            states[u], outbox = program.step(ctxs[u], states[u], rnd, inbox)
            sent = False
            for v, payload in _pairs(outbox):
                v = int(v)
                try:
                    ch = topology.channel(u, v)
                except KeyError:
                    raise CapacityViolation(f"node {u} has no channel to {v}") from None
                if u in nxt[v]:
                    raise CapacityViolation(f"second message on {u}->{v} in round {rnd}")
                words = _normalize(payload, cap)
                nxt[v][u] = words
                metrics.edge_messages[ch] += 1
                metrics.peak_word = max(metrics.peak_word, max(words))
                if record_trace:
                    ev_t.append(rnd)
                    ev_ch.append(ch)
                sent = True
            if sent:
                metrics.node_broadcasts[u] += 1
                in_flight = True
        if in_flight and rnd > round_cap:
            raise RoundCapExceeded(f"no termination within {round_cap} rounds")
        inboxes = nxt
    # the last step only consumed messages from the round before it
    metrics.rounds = max(rnd - 1, 0)
    if record_trace:
        metrics.trace = Trace()
        metrics.trace.add(np.array(ev_t, np.int64), np.array(ev_ch, np.int64))
    return [program.output(c, s) for c, s in zip(ctxs, states)], metrics
