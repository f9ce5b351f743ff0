"""Batch experiments: run algorithm x instance x seed matrices and fit round-count trends."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .congest_sim.trees import build_bfs_tree, estimate_diameter
from .errors import InsufficientData, ParamError
from .graph_model import GeneratorSpec, WeightedInstance, generate, load, save

ALGORITHMS = ("bellman_ford_baseline", "main", "multi_source")
VARIANTS = ("auto", "queue", "gather", "nonrecursive", "recursive")


@dataclass
class ExperimentConfig:
    """What to run. ``instances`` holds generator specs (dicts) or instance file paths."""

    instances: list
    algorithms: list = field(default_factory=lambda: ["main"])
    seeds: list = field(default_factory=lambda: [0])
    out: str = "report"
    oracle_check: bool = True
    variant: str = "auto"
    kappa: int = 1
    source: int = 0
    workers: int = 1

    def __post_init__(self):
        if not self.seeds:
            raise ParamError("at least one seed is required")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ParamError(f"unknown algorithm {a!r}; choose from {ALGORITHMS}")
        if self.variant not in VARIANTS:
            raise ParamError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if self.kappa < 1:
            raise ParamError("kappa must be at least 1")

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text())
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


@dataclass
class ReportRecord:
    n: int
    d_hat: int
    lam: int
    kappa: int
    variant: str
    seed: int
    rounds: int
    max_edge_congestion: int
    exact_match: bool | None
    wall_time: float
    family: str = ""
    algorithm: str = ""
    error: str = ""

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def _load_instance(entry) -> tuple[WeightedInstance, str]:
    if isinstance(entry, (str, Path)):
        return load(entry), Path(entry).name
    spec = GeneratorSpec(**{k: (tuple(v) if k == "sources" else v) for k, v in entry.items()})
    return generate(spec), spec.family


def pick_sources(n: int, kappa: int, seed: int, first: int = 0) -> list[int]:
    """``first`` plus kappa-1 further distinct nodes drawn with the seed."""
    rng = np.random.default_rng([seed, kappa, 7])
    rest = [int(x) for x in rng.permutation(n) if x != first][: kappa - 1]
    return [first] + rest


def run_algorithm(inst: WeightedInstance, algorithm: str, seed: int, *, variant: str = "auto",
                  kappa: int = 1, source: int = 0):
    """Returns (tables[kappa, n], metrics, sources)."""
    from .sssp_main import bellman_ford_baseline, main_sssp, multi_source_sssp

    v = None if variant == "auto" else variant
    if algorithm == "bellman_ford_baseline":
        d, met = bellman_ford_baseline(inst, source)
        return d[None, :], met, [source]
    if algorithm == "main":
        d, met = main_sssp(inst, source, v, seed)
        return d[None, :], met, [source]
    if algorithm == "multi_source":
        sources = pick_sources(inst.n, min(kappa, inst.n), seed, source)
        d, met = multi_source_sssp(inst, sources, seed, variant=v)
        return d, met, sources
    raise ParamError(f"unknown algorithm {algorithm!r}")


def digest(tables: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(tables, np.int64).tobytes()).hexdigest()


def _oracle_tables(inst: WeightedInstance, sources: Sequence[int]) -> np.ndarray:
    from .oracle import dijkstra
    return np.stack([dijkstra(inst, int(s)).dist for s in sources])


def store_artifact(path: str | Path, inst: WeightedInstance, algorithm: str, seed: int,
                   tables: np.ndarray, met, sources: Sequence[int], *, variant: str = "auto",
                   kappa: int = 1, source: int = 0) -> Path:
    """Write instance + run description + output digest so that ``replay`` can repeat it."""
    below = bool(np.any(tables < _oracle_tables(inst, sources)))
    return _write_artifact(Path(path), inst, {
        "algorithm": algorithm, "seed": int(seed), "variant": variant, "kappa": int(kappa),
        "source": int(source), "sources": [int(s) for s in sources], "digest": digest(tables),
        "rounds": int(met.rounds), "max_edge_congestion": met.max_edge_congestion,
        "below_oracle": below})


def _write_artifact(d: Path, inst: WeightedInstance, meta: dict) -> Path:
    d.mkdir(parents=True, exist_ok=True)
    save(inst, d / "instance.txt")
    (d / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    return d


def _run_one(job) -> ReportRecord:
    idx, entry, algorithm, seed, cfg, out_dir = job
    t0 = time.perf_counter()
    family, inst = "?", None
    try:
        inst, family = _load_instance(entry)
        kappa = cfg.kappa if algorithm == "multi_source" else 1
        tables, met, sources = run_algorithm(inst, algorithm, seed, variant=cfg.variant,
                                             kappa=kappa, source=cfg.source)
        d_hat = met.extra.get("d_hat")
        if d_hat is None:
            d_hat = estimate_diameter(inst.topology, build_bfs_tree(inst.topology, 0)[0])
        exact = None
        if cfg.oracle_check:
            exact = bool(np.array_equal(tables, _oracle_tables(inst, sources)))
            if not exact:
                store_artifact(out_dir / "failures" / f"{idx:04d}_{algorithm}_{seed}", inst,
                               algorithm, seed, tables, met, sources, variant=cfg.variant,
                               kappa=kappa, source=cfg.source)
        variant = cfg.variant if algorithm != "bellman_ford_baseline" else "-"
        return ReportRecord(inst.n, int(d_hat), inst.lam, kappa, variant, seed, int(met.rounds),
                            met.max_edge_congestion, exact, time.perf_counter() - t0,
                            family, algorithm)
    except Exception as exc:  # recorded per row, the batch goes on
        n = inst.n if inst is not None else 0
        lam = inst.lam if inst is not None else 0
        if inst is not None:
            _write_artifact(out_dir / "failures" / f"{idx:04d}_{algorithm}_{seed}_error", inst, {
                "algorithm": algorithm, "seed": seed, "variant": cfg.variant,
                "kappa": cfg.kappa, "source": cfg.source,
                "error": f"{type(exc).__name__}: {exc}",
                "traceback": traceback.format_exc()})
        return ReportRecord(n, 0, lam, cfg.kappa, cfg.variant, seed, 0, 0, None,
                            time.perf_counter() - t0, family, algorithm,
                            f"{type(exc).__name__}: {exc}")


def run_experiment(cfg: ExperimentConfig) -> list[ReportRecord]:
    """One record per (instance, algorithm, seed), written as ``<out>.csv`` and ``<out>.jsonl``.

    When ``out`` names a directory the files are ``report.csv``/``report.jsonl``
    inside it. Failure artifacts go to ``failures/`` next to the report.
    """
    out = Path(cfg.out)
    if out.is_dir() or str(cfg.out).endswith(("/", os.sep)):
        base = out / "report"
    else:
        base = out.with_suffix("") if out.suffix in (".csv", ".jsonl") else out
    out_dir = base.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(i * len(cfg.algorithms) + a_i, entry, alg, int(seed), cfg, out_dir)
            for i, entry in enumerate(cfg.instances)
            for a_i, alg in enumerate(cfg.algorithms)
            for seed in cfg.seeds]
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            records = list(ex.map(_run_one, jobs))
    else:
        records = [_run_one(j) for j in jobs]
    write_records(records, base)
    return records


def write_records(records: Sequence[ReportRecord], base: str | Path) -> None:
    base = Path(base)
    cols = ReportRecord.columns()
    with open(f"{base}.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(asdict(r))
    with open(f"{base}.jsonl", "w") as fh:
        for r in records:
            fh.write(json.dumps(asdict(r)) + "\n")


def read_records(path: str | Path) -> list[ReportRecord]:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".jsonl":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
    else:
        rows = list(csv.DictReader(io.StringIO(text)))
    ints = {"n", "d_hat", "lam", "kappa", "seed", "rounds", "max_edge_congestion"}
    out = []
    for row in rows:
        kw = {}
        for f in fields(ReportRecord):
            v = row.get(f.name, "")
            if f.name in ints:
                v = int(v)
            elif f.name == "wall_time":
                v = float(v)
            elif f.name == "exact_match":
                v = None if v in ("", None, "None") else v in (True, "True", "true")
            kw[f.name] = v
        out.append(ReportRecord(**kw))
    return out


@dataclass
class Fit:
    variant: str
    family: str
    d_class: int | None
    slope: float
    intercept: float
    r2: float
    points: int
    regression_failure: bool


def fit_exponent(ns: Sequence[float], rounds: Sequence[float]) -> tuple[float, float, float]:
    """Least squares on log(rounds) = slope * log(n) + intercept; returns (slope, intercept, R^2)."""
    x = np.log(np.asarray(ns, float))
    y = np.log(np.asarray(rounds, float))
    if np.unique(x).size < 4:
        raise InsufficientData(f"need at least 4 distinct n, got {np.unique(x).size}")
    A = np.c_[x, np.ones_like(x)]
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ np.array([slope, intercept])
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def complexity_report(records: Iterable[ReportRecord], by_diameter_class: bool = True,
                      threshold: float = 0.95, strict: bool = False) -> list[Fit]:
    """Fitted round-count exponent per (algorithm:variant, family[, floor(log2 D-hat)]).

    Errored rows are skipped. Groups with fewer than 4 distinct n are
    skipped too (``strict`` turns that into InsufficientData); if no group
    can be fitted InsufficientData is raised. A slope above ``threshold``
    means no better than linear and is flagged.
    """
    groups: dict[tuple, list[ReportRecord]] = {}
    for r in records:
        if r.error or r.rounds <= 0:
            continue
        dc = int(math.floor(math.log2(max(r.d_hat, 1)))) if by_diameter_class else None
        key = (f"{r.algorithm}:{r.variant}" if r.algorithm else r.variant, r.family, dc)
        groups.setdefault(key, []).append(r)
    fits = []
    for (variant, family, dc), rows in sorted(groups.items(), key=lambda kv: str(kv[0])):
        try:
            slope, intercept, r2 = fit_exponent([r.n for r in rows], [r.rounds for r in rows])
        except InsufficientData:
            if strict:
                raise
            continue
        fits.append(Fit(variant, family, dc, slope, intercept, r2, len(rows), slope > threshold))
    if not fits:
        raise InsufficientData("no group has 4 or more distinct n")
    return fits


def replay(artifact: str | Path) -> dict[str, Any]:
    """Re-run a stored failure artifact; reports whether output and metrics repeat bit for bit."""
    artifact = Path(artifact)
    meta = json.loads((artifact / "meta.json").read_text())
    inst = load(artifact / "instance.txt")
    tables, met, sources = run_algorithm(inst, meta["algorithm"], int(meta["seed"]),
                                         variant=meta.get("variant", "auto"),
                                         kappa=int(meta.get("kappa", 1)),
                                         source=int(meta.get("source", 0)))
    got = {"digest": digest(tables), "rounds": int(met.rounds),
           "max_edge_congestion": met.max_edge_congestion}
    same = all(meta.get(k) == v for k, v in got.items() if k in meta)
    return {"identical": same and "digest" in meta, "stored": {k: meta.get(k) for k in got},
            "replayed": got, "sources": sources}
