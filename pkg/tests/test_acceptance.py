"""Acceptance criteria 1-10.

Each test prints one ``CRITERION k: PASS|FAIL - ...`` line; the lines are
repeated in the terminal summary. Run alone with

    pytest tests/test_acceptance.py -v -s

Expect roughly half an hour on one core. Runs that fail are stored as
replay artifacts under pytest's temporary directory and replayed by
criterion 10.
"""
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from congest_sssp.approx_sssp import additive_sssp
from congest_sssp.cli import main as cli_main
from congest_sssp.congest_sim import INF, VirtualNet
from congest_sssp.congest_sim.scheduler import schedule_runs
from congest_sssp.errors import ConsistencyError, NegativeWeight
from congest_sssp.graph_model import GeneratorSpec, generate
from congest_sssp.harness import (ExperimentConfig, complexity_report, fit_exponent,
                                  run_algorithm, run_experiment, store_artifact)
from congest_sssp.oracle import dijkstra
from congest_sssp.short_range import ShortRangeParams, short_range, short_range_many
from congest_sssp.sssp_main import main_sssp
from congest_sssp.virtual_graph import random_virtual_graph
from congest_sssp.virtual_sssp import (small_weight_virtual_sssp, virtual_sssp_gather,
                                      virtual_sssp_nonrecursive, virtual_sssp_recursive)

import reference as ref
from acceptance_log import report_criterion
from strategies import scaled_instance

pytestmark = pytest.mark.acceptance

# pinned thresholds
EXACT_FRACTION = 0.95
C1_SIZES = (50, 100, 300, 500)
C1_LAMS = (1, 100, 10_000)
C1_SEEDS = 100
C8_SIZES = (256, 512, 1024, 2048, 4096)
C8_LAM = 16
C8_SEEDS = (0, 1, 2)
C8_MAX_SLOPE = 0.95
C8_MIN_R2 = 0.9
C9_N = 400
C9_LAM = 4
C9_KAPPAS = (2, 4, 8)
C9_SEEDS = 50
CONGESTION_CONST = 8
SCHED_CONST = 64

# failing runs of criteria 1-9, replayed by criterion 10
FAILED_ARTIFACTS: list = []
SAMPLE_ARTIFACTS: list = []


def log2c(n):
    return math.ceil(math.log2(n))


# --- 1 and 3: end-to-end exactness and the scaling reduction -------------------

@pytest.fixture(scope="module")
def exactness_runs(tmp_path_factory):
    """Every (n, lam, seed) of criterion 1, in debug mode.

    Debug mode checks the three reduction properties on every scaling
    iteration and compares each bucket with the oracle; it does not change
    the random choices, outputs or metrics. When it raises, the run is a
    flagged failure and is repeated in production mode to get its output.
    """
    root = tmp_path_factory.mktemp("criterion1")
    rows = []
    for n in C1_SIZES:
        for lam in C1_LAMS:
            row = {"n": n, "lam": lam, "exact": 0, "below": 0, "flagged": 0, "silent": 0,
                   "checks": 0, "bad_checks": 0, "reduction_errors": 0}
            for seed in range(C1_SEEDS):
                inst = generate(GeneratorSpec("erdos_renyi_connected", n, lam, seed))
                true = dijkstra(inst, 0).dist
                raised = False
                try:
                    d, met = main_sssp(inst, 0, seed=seed, debug=True)
                    checks = met.extra["checks"]
                except (ConsistencyError, NegativeWeight) as exc:
                    raised = True
                    if "reduction properties" in str(exc):
                        row["reduction_errors"] += 1
                    checks = []
                    d, met = main_sssp(inst, 0, seed=seed)
                row["checks"] += len(checks)
                row["bad_checks"] += sum(
                    not (c["nonnegative"] and c["radius"] and c["recurrence"]) for c in checks)
                exact = bool(np.array_equal(d, true))
                row["exact"] += exact
                row["below"] += bool(np.any(d < true))
                if not exact:
                    row["flagged"] += raised
                    row["silent"] += not raised
                    FAILED_ARTIFACTS.append(store_artifact(
                        root / f"main_n{n}_lam{lam}_seed{seed}", inst, "main", seed,
                        d[None, :], met, [0]))
                elif seed == 0:
                    SAMPLE_ARTIFACTS.append(store_artifact(
                        root / f"sample_n{n}_lam{lam}", inst, "main", seed, d[None, :], met, [0]))
            rows.append(row)
    return rows


def test_criterion_1_end_to_end_exactness(exactness_runs):
    worst = min(exactness_runs, key=lambda r: r["exact"])
    ok_exact = all(r["exact"] >= EXACT_FRACTION * C1_SEEDS for r in exactness_runs)
    below = sum(r["below"] for r in exactness_runs)
    silent = sum(r["silent"] for r in exactness_runs)
    mism = sum(C1_SEEDS - r["exact"] for r in exactness_runs)
    passed = ok_exact and below == 0 and silent == 0
    report_criterion(1, passed,
                     f"{len(exactness_runs)} configs x {C1_SEEDS} seeds; worst config "
                     f"n={worst['n']} lam={worst['lam']} exact {worst['exact']}/{C1_SEEDS} "
                     f"(need >= {EXACT_FRACTION:.0%}); mismatches {mism}, all flagged: "
                     f"{silent == 0}; runs below oracle {below}")
    for r in exactness_runs:
        print(f"  n={r['n']:4d} lam={r['lam']:6d} exact={r['exact']:3d}/{C1_SEEDS}")
    assert passed


def test_criterion_3_scaling_reduction(exactness_runs):
    checks = sum(r["checks"] for r in exactness_runs)
    bad = sum(r["bad_checks"] for r in exactness_runs)
    errors = sum(r["reduction_errors"] for r in exactness_runs)
    passed = checks > 0 and bad == 0 and errors == 0
    report_criterion(3, passed,
                     f"{checks} scaling iterations checked (non-negative, radius <= n-1, "
                     f"recurrence); violations {bad + errors}")
    assert passed


# --- 2: ShortRange contract ------------------------------------------------

def test_criterion_2_short_range_contract():
    rng = np.random.default_rng(2)
    families = ("erdos_renyi_connected", "path", "grid", "star_of_paths",
                "low_diameter_expander")
    tuples = 50
    bad = []
    for j in range(tuples):
        fam = families[j % len(families)]
        n = int(rng.integers(20, 80))
        if fam == "grid":
            n = math.isqrt(n) ** 2
        inst = generate(GeneratorSpec(fam, n, int(rng.integers(1, 12)), j))
        if j % 2:
            w = inst.weights.copy()
            w[rng.random(w.size) < 0.3] = 0
            inst = inst.with_weights(w)
        s = int(rng.integers(n))
        p = ShortRangeParams(int(rng.integers(1, 15)), int(rng.integers(1, 40)),
                             int(rng.integers(1, 6)))
        d, met = short_range(inst, s, p)
        W = ref.instance_matrix(inst)
        full = ref.to_inf(ref.floyd_warshall(W)[s], INF)
        hop = ref.to_inf(ref.hop_limited(W, s, p.h), INF)
        good = (hop == full) & (full <= p.ell)
        ok = (np.all(d >= full) and np.array_equal(d[good], full[good])
              and met.rounds <= p.ell * p.q + 2 * p.h + 2
              and met.max_edge_congestion <= 1 + p.h // p.q
              and met.per_node_broadcast_max <= 1 + p.h // p.q)
        if not ok:
            bad.append((j, fam, n, s, p))
    passed = not bad
    report_criterion(2, passed, f"{tuples} (instance, s, h, ell, q) tuples; contract broken on "
                                f"{len(bad)}: {bad[:3]}")
    assert passed


# --- 4: additive sandwich -----------------------------------------------------

def test_criterion_4_additive_sandwich():
    n, k = 100, 10
    alpha = math.isqrt(n)
    bound = CONGESTION_CONST * k * log2c(n)
    bad, worst_cong, runs = [], 0, 0
    for fam in ("erdos_renyi_connected", "grid", "star_of_paths"):
        for seed in range(30):
            inst = scaled_instance(fam, n, 1000, seed)
            true = dijkstra(inst, 0).dist
            d, met, _ = additive_sssp(inst, 0, alpha, k, seed=seed)
            runs += 1
            worst_cong = max(worst_cong, met.max_edge_congestion)
            if not (np.all(true <= d) and np.all(d <= true + alpha)
                    and met.max_edge_congestion <= bound):
                bad.append((fam, seed))
    passed = not bad
    report_criterion(4, passed, f"{runs} runs, alpha={alpha}, k={k}; sandwich/congestion "
                                f"failures {len(bad)}; max congestion {worst_cong} <= {bound}")
    assert passed


# --- 5: small-weight virtual SSSP ----------------------------------------------

def test_criterion_5_small_weight_virtual():
    net = VirtualNet.for_topology(generate(GeneratorSpec("erdos_renyi_connected", 300, 1, 5)).topology)
    rng = np.random.default_rng(5)
    graphs, bad = 0, []
    while graphs < 30:
        n_v = int(rng.integers(5, 51))
        vg = random_virtual_graph(net, n_v, rng, density=float(rng.uniform(0.02, 0.3)),
                                  max_weight=3, zero_fraction=0.3)
        true = vg.oracle().dist
        if true.max() > n_v - 1:
            continue                     # radius promise not met, draw again
        graphs += 1
        d, met = small_weight_virtual_sssp(vg)
        if not (np.array_equal(d, true) and met.extra["broadcasts"] <= n_v
                and met.extra["queue_virtual_rounds"] <= 2 * n_v):
            bad.append(graphs)
    passed = not bad
    report_criterion(5, passed, f"{graphs} virtual graphs (n_V' <= 50, radius <= n_V'-1); "
                                f"exact with <= n_V' broadcasts and <= 2 n_V' virtual rounds: "
                                f"{graphs - len(bad)}/{graphs}")
    assert passed


# --- 6: variant equivalence ------------------------------------------------------

def test_criterion_6_variant_equivalence():
    net = VirtualNet.for_topology(generate(GeneratorSpec("grid", 400, 1, 6)).topology)
    rng = np.random.default_rng(6)
    instances = []
    while len(instances) < 40:
        heavy = len(instances) % 2 == 1
        vg = random_virtual_graph(net, int(rng.integers(20, 61)), rng, density=0.08,
                                  max_weight=200 if heavy else 2, zero_fraction=0.2)
        if not heavy and vg.oracle().dist.max() > vg.n_nodes - 1:
            continue
        instances.append((vg, None if heavy else vg.n_nodes - 1))
    solvers = {
        "gather": lambda vg, r, s: virtual_sssp_gather(vg)[0],
        "nonrecursive": lambda vg, r, s: virtual_sssp_nonrecursive(vg, seed=s, radius=r)[0],
    }
    for eps in (Fraction(1, 6), Fraction(1, 4), Fraction(1, 2)):
        solvers[f"recursive({eps})"] = (
            lambda e: lambda vg, r, s: virtual_sssp_recursive(vg, e, seed=s, radius=r)[0])(eps)
    exact = {name: 0 for name in solvers}
    below = {name: 0 for name in solvers}
    for seed, (vg, r) in enumerate(instances):
        true = vg.oracle().dist
        for name, solve in solvers.items():
            d = solve(vg, r, seed)
            exact[name] += bool(np.array_equal(d, true))
            below[name] += bool(np.any(d < true))
    total = len(instances)
    passed = (exact["gather"] == total and all(v == 0 for v in below.values())
              and all(exact[k] >= EXACT_FRACTION * total for k in solvers if k != "gather"))
    summary = ", ".join(f"{k} {exact[k]}/{total}" for k in solvers)
    report_criterion(6, passed, f"{total} shared virtual graphs; exact: {summary}; "
                                f"runs below oracle {sum(below.values())}")
    assert passed


# --- 7: scheduling contract --------------------------------------------------------

def test_criterion_7_scheduling():
    bad = []
    worst = 0.0
    for seed in range(20):
        inst = generate(GeneratorSpec("erdos_renyi_connected", 200, 8, seed))
        n = inst.n
        rng = np.random.default_rng(seed)
        sources = [int(x) for x in rng.choice(n, size=10, replace=False)]
        p = ShortRangeParams(int(rng.integers(4, 12)), int(rng.integers(5, 20)),
                             int(rng.integers(1, 4)))
        solo = [short_range(inst, s, p, record=True) for s in sources]
        comp, delays = schedule_runs(inst.topology, [m for _, m in solo], seed, keep_trace=True)
        tables, _ = short_range_many(inst, sources, p, seed)
        same = all(np.array_equal(tables[j], solo[j][0]) for j in range(10))
        dil, cong = comp.extra["dilation"], comp.extra["congestion"]
        bound = SCHED_CONST * (dil + cong) * log2c(n)
        worst = max(worst, comp.rounds / bound)
        # the composite schedule itself: capacity one per channel and round, and
        # every instance's rounds delivered in their solo order
        t, ch = comp.trace.arrays()
        capacity = np.unique(t * inst.topology.num_channels + ch).size == t.size
        causal = True
        off = 0
        for _, m in solo:
            st, _ = m.trace.arrays()
            new = t[off:off + st.size]
            off += st.size
            for r in np.unique(st)[:-1]:
                nxt = st[st > r].min()
                if new[st == r].max() >= new[st == nxt].min():
                    causal = False
        if not (same and capacity and causal and comp.rounds <= bound):
            bad.append(seed)
    passed = not bad
    report_criterion(7, passed, f"20 seeds x 10 ShortRange instances; makespan <= "
                                f"{SCHED_CONST}(dilation+congestion)ceil(log2 n) (worst ratio "
                                f"{worst:.4f}); outputs equal solo; failures {bad}")
    assert passed


# --- 8: scaling-law probe ----------------------------------------------------------

def test_criterion_8_scaling_trend(tmp_path):
    instances = [{"family": "low_diameter_expander", "n": n, "lam": C8_LAM, "seed": 0}
                 for n in C8_SIZES]
    cfg = ExperimentConfig(instances=instances, algorithms=["main", "bellman_ford_baseline"],
                           seeds=list(C8_SEEDS), out=str(tmp_path / "sweep"))
    records = run_experiment(cfg)
    failures = tmp_path / "failures"
    if failures.exists():
        FAILED_ARTIFACTS.extend(a for a in sorted(failures.iterdir())
                                if not a.name.endswith("_error"))
    main_rows = [r for r in records if r.algorithm == "main" and not r.error]
    bf_rows = [r for r in records if r.algorithm == "bellman_ford_baseline" and not r.error]
    fits = complexity_report(main_rows, by_diameter_class=False)
    slope, _, r2 = fit_exponent([r.n for r in main_rows], [r.rounds for r in main_rows])
    assert len(fits) == 1 and math.isclose(fits[0].slope, slope)
    top = max(C8_SIZES)
    main_top = float(np.mean([r.rounds for r in main_rows if r.n == top]))
    bf_top = float(np.mean([r.rounds for r in bf_rows if r.n == top]))
    trend_ok = slope < C8_MAX_SLOPE and r2 >= C8_MIN_R2
    beats_bf = main_top < bf_top
    exact = all(r.exact_match for r in records if not r.error)
    passed = trend_ok and beats_bf and exact and len(main_rows) == len(C8_SIZES) * len(C8_SEEDS)
    report_criterion(8, passed,
                     f"expanders n={C8_SIZES[0]}..{top}, lam={C8_LAM}: fitted exponent "
                     f"{slope:.3f} (< {C8_MAX_SLOPE}: {slope < C8_MAX_SLOPE}), R^2 {r2:.3f} "
                     f"(>= {C8_MIN_R2}: {r2 >= C8_MIN_R2}); at n={top} main {main_top:.0f} "
                     f"rounds vs Bellman-Ford {bf_top:.0f} (beats: {beats_bf}); all exact: {exact}")
    for n in C8_SIZES:
        m = np.mean([r.rounds for r in main_rows if r.n == n])
        b = np.mean([r.rounds for r in bf_rows if r.n == n])
        print(f"  n={n:5d} main={m:10.0f} bellman_ford={b:6.0f}")
    assert passed


# --- 9: multi-source ---------------------------------------------------------------

def test_criterion_9_multi_source(tmp_path):
    n = C9_N
    results = {}
    for kappa in C9_KAPPAS:
        exact = below = over = 0
        worst = 0.0
        for seed in range(C9_SEEDS):
            inst = generate(GeneratorSpec("erdos_renyi_connected", n, C9_LAM, seed))
            tables, met, sources = run_algorithm(inst, "multi_source", seed, kappa=kappa)
            true = np.stack([dijkstra(inst, s).dist for s in sources])
            ok = bool(np.array_equal(tables, true))
            exact += ok
            below += bool(np.any(tables < true))
            k, q = met.extra["k"], met.extra["q"]
            bound = CONGESTION_CONST * kappa * (n / q + k + n / k) * log2c(n)
            peak = max(it["max_edge_congestion"] for it in met.extra["per_iteration"])
            worst = max(worst, peak / bound)
            over += peak > bound
            if not ok:
                FAILED_ARTIFACTS.append(store_artifact(
                    tmp_path / f"multi_k{kappa}_seed{seed}", inst, "multi_source", seed,
                    tables, met, sources, kappa=kappa))
            elif seed == 0:
                SAMPLE_ARTIFACTS.append(store_artifact(
                    tmp_path / f"sample_k{kappa}", inst, "multi_source", seed, tables, met,
                    sources, kappa=kappa))
        results[kappa] = (exact, below, over, worst)
    passed = all(e >= EXACT_FRACTION * C9_SEEDS and b == 0 and o == 0
                 for e, b, o, _ in results.values())
    summary = "; ".join(f"kappa={k}: exact {e}/{C9_SEEDS}, congestion/bound max {w:.3f}"
                        for k, (e, b, o, w) in results.items())
    report_criterion(9, passed, f"n={n}, lam={C9_LAM}: {summary}")
    assert passed


# --- 10: determinism ---------------------------------------------------------------

def test_criterion_10_replay(tmp_path, capsys):
    samples = list(SAMPLE_ARTIFACTS)
    if not samples and not FAILED_ARTIFACTS:
        # run on its own: make a couple of artifacts to replay
        for n, seed in ((50, 0), (100, 1)):
            inst = generate(GeneratorSpec("erdos_renyi_connected", n, 100, seed))
            tables, met, sources = run_algorithm(inst, "main", seed)
            samples.append(store_artifact(tmp_path / f"s{n}", inst, "main", seed, tables, met,
                                          sources))
    replayed, differing = 0, []
    for art in list(FAILED_ARTIFACTS) + samples:
        code = cli_main(["replay", str(art)])
        res = json.loads(capsys.readouterr().out)
        replayed += 1
        if code != 0 or not res["identical"]:
            differing.append(str(art))
    passed = replayed > 0 and not differing
    with capsys.disabled():
        report_criterion(10, passed, f"replayed {len(FAILED_ARTIFACTS)} failing runs and "
                                     f"{len(samples)} sample runs via the replay verb; "
                                     f"not bit-identical: {len(differing)}")
    assert passed
