"""Weighted instances over a topology: generators and a text file format.

File format (one record per line)::

    n m Λ
    # sources s1 s2 ...        (optional)
    u v w_uv w_vu              (m lines, u < v)

Paths ending in ``.gz`` are gzip-compressed.
"""
from __future__ import annotations

import gzip
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .congest_sim.topology import Topology
from .errors import InfeasibleSpec, InvalidTopology, ParseError

FAMILIES = ("path", "cycle", "star_of_paths", "erdos_renyi_connected",
            "low_diameter_expander", "grid")


@dataclass(eq=False)
class WeightedInstance:
    """A topology with one integer weight per directed channel."""

    topology: Topology
    weights: np.ndarray          # aligned with topology channels
    lam: int
    sources: tuple[int, ...] = (0,)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.int64)
        if self.weights.shape != (self.topology.num_channels,):
            raise ValueError("need exactly one weight per directed channel")
        if self.weights.size and self.weights.min() < 0:
            raise ValueError("negative weight")
        self.sources = tuple(int(s) for s in self.sources)

    @property
    def n(self) -> int:
        return self.topology.n

    def weight(self, u: int, v: int) -> int:
        return int(self.weights[self.topology.channel(u, v)])

    def with_weights(self, weights: np.ndarray) -> "WeightedInstance":
        lam = max(self.lam, int(weights.max()) if len(weights) else 1, 1)
        return WeightedInstance(self.topology, weights, lam, self.sources)

    def is_input_instance(self) -> bool:
        """Weights all in [1, Λ] and Λ polynomially bounded."""
        w = self.weights
        return (bool(np.all((w >= 1) & (w <= self.lam)))
                and self.lam <= max(self.n, 2) ** 4)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, WeightedInstance) and self.topology == other.topology
                and self.lam == other.lam and self.sources == other.sources
                and np.array_equal(self.weights, other.weights))

    def __repr__(self) -> str:
        return f"WeightedInstance(n={self.n}, m={self.topology.m}, lam={self.lam})"


def instance_from_edges(n: int, weighted_edges, lam: int | None = None,
                        sources=(0,)) -> WeightedInstance:
    """Build from ``(u, v, w_uv, w_vu)`` tuples."""
    weighted_edges = list(weighted_edges)
    topo = Topology(n, [(u, v) for u, v, _, _ in weighted_edges])
    w = np.zeros(topo.num_channels, np.int64)
    for u, v, a, b in weighted_edges:
        w[topo.channel(u, v)] = a
        w[topo.channel(v, u)] = b
    if lam is None:
        lam = max(1, int(w.max()) if w.size else 1)
    return WeightedInstance(topo, w, lam, sources)


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    n: int
    lam: int
    seed: int = 0
    symmetric: bool = False
    sources: tuple[int, ...] = field(default=(0,))


def _path_edges(n, rng):
    return [(i, i + 1) for i in range(n - 1)]


def _cycle_edges(n, rng):
    if n < 3:
        raise InfeasibleSpec("cycle needs n >= 3")
    return [(i, (i + 1) % n) for i in range(n)]


def _grid_edges(n, rng):
    side = math.isqrt(n)
    if side * side != n:
        raise InfeasibleSpec(f"grid needs a square n, got {n}")
    edges = []
    for r in range(side):
        for c in range(side):
            u = r * side + c
            if c + 1 < side:
                edges.append((u, u + 1))
            if r + 1 < side:
                edges.append((u, u + side))
    return edges


def _star_of_paths(n):
    """Hub 0 plus floor(sqrt(n)) paths sharing the remaining nodes evenly.

    Returns the edge list and the set of outward (towards the leaf) channels.
    """
    rest = n - 1
    arms = max(1, math.isqrt(n)) if rest else 0
    edges, outward = [], []
    nxt = 1
    for a in range(arms):
        length = rest // arms + (1 if a < rest % arms else 0)
        prev = 0
        for _ in range(length):
            edges.append((prev, nxt))
            outward.append((prev, nxt))
            prev = nxt
            nxt += 1
    return edges, outward


def _er_edges(n, rng):
    # a random recursive tree keeps it connected, ER edges add shortcuts
    edges = {(int(rng.integers(0, i)), i) for i in range(1, n)}
    if n > 2:
        p = min(1.0, 2.0 * math.log(n) / n)
        iu, ju = np.triu_indices(n, 1)
        pick = rng.random(iu.size) < p
        edges |= set(zip(iu[pick].tolist(), ju[pick].tolist()))
    return sorted((min(u, v), max(u, v)) for u, v in edges)


def _expander_edges(n, rng):
    # union of three random Hamiltonian cycles (paths when n < 3)
    edges = set()
    for _ in range(3):
        perm = rng.permutation(n)
        ring = n if n >= 3 else n - 1
        for i in range(ring):
            u, v = int(perm[i]), int(perm[(i + 1) % n])
            if u != v:
                edges.add((min(u, v), max(u, v)))
    return sorted(edges)


def generate(spec: GeneratorSpec) -> WeightedInstance:
    """Random instance of the given family, fully determined by ``spec.seed``."""
    n, lam = spec.n, spec.lam
    if n < 1 or lam < 1:
        raise InfeasibleSpec("need n >= 1 and lam >= 1")
    if lam > max(n, 2) ** 4:
        raise InfeasibleSpec("lam must be at most n^4")
    if spec.family not in FAMILIES:
        raise InfeasibleSpec(f"unknown family {spec.family!r}")
    if any(not 0 <= s < n for s in spec.sources):
        raise InfeasibleSpec("source outside the node range")
    rng = np.random.default_rng(spec.seed)
    unit_out = []
    if spec.family == "star_of_paths":
        edges, unit_out = _star_of_paths(n)
    else:
        maker = {"path": _path_edges, "cycle": _cycle_edges, "grid": _grid_edges,
                 "erdos_renyi_connected": _er_edges,
                 "low_diameter_expander": _expander_edges}[spec.family]
        edges = maker(n, rng)
    try:
        topo = Topology(n, edges)
    except InvalidTopology as exc:
        raise InfeasibleSpec(str(exc)) from exc
    w = rng.integers(1, lam + 1, size=topo.num_channels, dtype=np.int64)
    if spec.symmetric:
        w = np.minimum(w, w[topo.rev])
    # the arms of the star are cheap walking outward, so shortest paths are
    # long and hop-heavy; after scaling most of those edges become zero
    for u, v in unit_out:
        w[topo.channel(u, v)] = 1
        if spec.symmetric:
            w[topo.channel(v, u)] = 1
    return WeightedInstance(topo, w, lam, spec.sources)


# --- serialization -------------------------------------------------------

def serialize(inst: WeightedInstance) -> bytes:
    topo = inst.topology
    lines = [f"{inst.n} {topo.m} {inst.lam}"]
    if inst.sources != (0,):
        lines.append("# sources " + " ".join(map(str, inst.sources)))
    for u, v in topo.edge_list():
        lines.append(f"{u} {v} {inst.weight(u, v)} {inst.weight(v, u)}")
    return ("\n".join(lines) + "\n").encode()


def parse(data: bytes | str) -> WeightedInstance:
    text = data.decode() if isinstance(data, bytes) else data
    header = None
    sources: tuple[int, ...] = (0,)
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "sources":
                try:
                    sources = tuple(int(x) for x in parts[1:])
                except ValueError:
                    raise ParseError("bad source list", lineno) from None
            continue
        try:
            nums = [int(x) for x in line.split()]
        except ValueError:
            raise ParseError(f"non-integer token in {line!r}", lineno) from None
        if header is None:
            if len(nums) != 3:
                raise ParseError("header must be 'n m lam'", lineno)
            header = (nums, lineno)
            continue
        if len(nums) != 4:
            raise ParseError("edge line must be 'u v w_uv w_vu'", lineno)
        if min(nums) < 0:
            raise ParseError("negative field", lineno)
        edges.append((nums, lineno))
    if header is None:
        raise ParseError("missing header", 1)
    (n, m, lam), hline = header
    if len(edges) != m:
        raise ParseError(f"header promises {m} edges, found {len(edges)}", hline)
    for (u, v, _, _), lineno in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError("endpoint out of range", lineno)
    try:
        return instance_from_edges(n, [tuple(e) for e, _ in edges], lam, sources)
    except (InvalidTopology, ValueError) as exc:
        raise ParseError(str(exc), edges[-1][1] if edges else hline) from exc


def save(inst: WeightedInstance, path: str | Path) -> None:
    path = Path(path)
    data = serialize(inst)
    if path.suffix == ".gz":
        data = gzip.compress(data, mtime=0)
    path.write_bytes(data)


def load(path: str | Path) -> WeightedInstance:
    path = Path(path)
    data = path.read_bytes()
    if path.suffix == ".gz":
        data = gzip.decompress(data)
    return parse(data)
