from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .topology import Topology

RECORD_COLUMNS = ("rounds", "max_edge_congestion", "total_messages",
                  "per_node_broadcast_max", "seed")


class Trace:
    """Send log: one (round, channel) pair per message, rounds 1-based.

    Stored as a list of chunks so that sequential composition stays cheap.
    """

    def __init__(self):
        self._t: list[np.ndarray] = []
        self._ch: list[np.ndarray] = []

    def add(self, t: np.ndarray, ch: np.ndarray, offset: int = 0) -> None:
        if len(t):
            self._t.append(np.asarray(t, dtype=np.int64) + offset)
            self._ch.append(np.asarray(ch, dtype=np.int64))

    def extend(self, other: "Trace", offset: int = 0) -> None:
        for t, ch in zip(other._t, other._ch):
            self._t.append(t + offset)
            self._ch.append(ch)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self._t:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        if len(self._t) > 1:
            self._t = [np.concatenate(self._t)]
            self._ch = [np.concatenate(self._ch)]
        return self._t[0], self._ch[0]

    def __len__(self) -> int:
        return sum(len(t) for t in self._t)


@dataclass
class RunMetrics:
    """Cost of one run: rounds, per-channel and per-node counters."""

    rounds: int
    edge_messages: np.ndarray
    node_broadcasts: np.ndarray
    peak_word: int = 0
    trace: Trace | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, topology: Topology, record: bool = False) -> "RunMetrics":
        return cls(0, np.zeros(topology.num_channels, np.int64),
                   np.zeros(topology.n, np.int64), 0, Trace() if record else None)

    @property
    def max_edge_congestion(self) -> int:
        return int(self.edge_messages.max()) if self.edge_messages.size else 0

    @property
    def total_messages(self) -> int:
        return int(self.edge_messages.sum())

    @property
    def per_node_broadcast_max(self) -> int:
        return int(self.node_broadcasts.max()) if self.node_broadcasts.size else 0

    def absorb(self, other: "RunMetrics") -> "RunMetrics":
        """Append ``other`` as if it ran right after ``self`` (in place)."""
        if self.trace is not None:
            if other.trace is None:
                raise ValueError("cannot compose a traced run with an untraced one")
            self.trace.extend(other.trace, self.rounds)
        self.rounds += other.rounds
        self.edge_messages = self.edge_messages + other.edge_messages
        self.node_broadcasts = self.node_broadcasts + other.node_broadcasts
        self.peak_word = max(self.peak_word, other.peak_word)
        return self

    def then(self, other: "RunMetrics") -> "RunMetrics":
        out = RunMetrics(self.rounds, self.edge_messages.copy(), self.node_broadcasts.copy(),
                         self.peak_word, None)
        if self.trace is not None:
            out.trace = Trace()
            out.trace.extend(self.trace)
        return out.absorb(other)

    def add_kernel(self, rounds: int, edge_msgs: np.ndarray, bcasts: np.ndarray,
                   ev_t: np.ndarray | None = None, ev_ch: np.ndarray | None = None,
                   peak: int = 0) -> None:
        """Append a run given as raw counters (as the compiled kernels return them)."""
        if self.trace is not None and ev_t is not None:
            self.trace.add(ev_t, ev_ch, self.rounds)
        self.rounds += int(rounds)
        self.edge_messages += edge_msgs
        self.node_broadcasts += bcasts
        self.peak_word = max(self.peak_word, int(peak))

    def record(self, seed: int | None = None) -> dict:
        return {"rounds": int(self.rounds),
                "max_edge_congestion": self.max_edge_congestion,
                "total_messages": self.total_messages,
                "per_node_broadcast_max": self.per_node_broadcast_max,
                "seed": seed}

    def to_json(self, seed: int | None = None) -> str:
        return json.dumps(self.record(seed))

    def to_csv(self, seed: int | None = None, header: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=RECORD_COLUMNS, lineterminator="\n")
        if header:
            writer.writeheader()
        writer.writerow(self.record(seed))
        return buf.getvalue()

    def identical(self, other: "RunMetrics") -> bool:
        return (self.rounds == other.rounds and self.peak_word == other.peak_word
                and np.array_equal(self.edge_messages, other.edge_messages)
                and np.array_equal(self.node_broadcasts, other.node_broadcasts))
