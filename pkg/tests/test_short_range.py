import numpy as np
import pytest
from hypothesis import given, strategies as st

from congest_sssp.congest_sim import INF, VirtualNet
from congest_sssp.errors import ParamError
from congest_sssp.graph_model import GeneratorSpec, generate, instance_from_edges
from congest_sssp.short_range import (ShortRangeParams, short_range, short_range_many,
                                      virtualized_short_range)
from congest_sssp.virtual_graph import VirtualGraph, random_virtual_graph

import reference as ref
from strategies import connected_instances, zero_weight_copy


def restricted_truth(W, s, h, ell):
    """(true distance, mask of nodes whose distance is reachable within h hops and <= ell)."""
    full = ref.floyd_warshall(W)[s]
    hop = ref.hop_limited(W, s, h)
    return full, (hop == full) & (full <= ell)


def check_contract(d, W, s, p):
    full, good = restricted_truth(W, s, p.h, p.ell)
    full_inf = ref.to_inf(full, INF)
    assert np.all(d >= full_inf)
    assert np.array_equal(d[good], full_inf[good])


def test_params_validation():
    with pytest.raises(ParamError):
        ShortRangeParams(1, 1, 0)
    with pytest.raises(ParamError):
        ShortRangeParams(0, 1, 1)
    p = ShortRangeParams(7, 5, 3)
    assert p.rounds == 5 * 3 + 2 * 7 + 1
    assert p.per_channel == 1 + 7 // 3


def test_hand_run_zero_then_two():
    inst = instance_from_edges(3, [(0, 1, 0, 0), (1, 2, 2, 2)], lam=2)
    d, met = short_range(inst, 0, ShortRangeParams(3, 5, 2))
    assert d.tolist() == [0, 0, 2]
    assert met.rounds <= 5 * 2 + 2 * 3 + 2


def test_zero_path_beyond_hop_budget_only_overestimates():
    h = 3
    n = h + 2
    inst = instance_from_edges(n, [(i, i + 1, 0, 0) for i in range(n - 1)], lam=1)
    d, _ = short_range(inst, 0, ShortRangeParams(h, 1, 1))
    assert np.all(d >= 0)
    assert d[: h + 1].tolist() == [0] * (h + 1)


def test_random_80_contract():
    inst = generate(GeneratorSpec("erdos_renyi_connected", 80, 6, 13))
    inst = zero_weight_copy(inst, np.random.default_rng(1))
    p = ShortRangeParams(20, 30, 3)
    d, met = short_range(inst, 0, p)
    check_contract(d, ref.instance_matrix(inst), 0, p)
    assert met.rounds <= p.rounds + 1
    assert met.max_edge_congestion <= p.per_channel


@given(connected_instances(max_n=14, max_lam=6, zero_ok=True), st.data())
def test_contract_property(inst, data):
    s = data.draw(st.integers(0, inst.n - 1))
    p = ShortRangeParams(data.draw(st.integers(1, 8)), data.draw(st.integers(1, 15)),
                         data.draw(st.integers(1, 5)))
    d, met = short_range(inst, s, p)
    check_contract(d, ref.instance_matrix(inst), s, p)
    assert met.rounds <= p.ell * p.q + 2 * p.h + 2
    assert met.max_edge_congestion <= p.per_channel
    assert met.per_node_broadcast_max <= p.per_channel


def test_many_sources_single_equals_solo():
    inst = generate(GeneratorSpec("erdos_renyi_connected", 40, 5, 2))
    p = ShortRangeParams(6, 8, 2)
    tables, met = short_range_many(inst, [5], p, seed=0)
    solo, smet = short_range(inst, 5, p)
    assert np.array_equal(tables[0], solo)
    assert met.rounds == smet.rounds


def test_many_sources_dumbbell():
    left = [(i, i + 1) for i in range(4)]
    right = [(i, i + 1) for i in range(5, 9)]
    edges = left + right + [(4, 5)]
    inst = instance_from_edges(10, [(u, v, 1, 2) for u, v in edges], lam=2)
    p = ShortRangeParams(3, 4, 1)
    tables, _ = short_range_many(inst, [0, 9], p, seed=4)
    for j, s in enumerate([0, 9]):
        assert np.array_equal(tables[j], short_range(inst, s, p)[0])


def test_many_sources_ten_on_hundred():
    inst = generate(GeneratorSpec("erdos_renyi_connected", 100, 8, 3))
    p = ShortRangeParams(10, 12, 2)
    srcs = list(range(0, 100, 10))
    tables, met = short_range_many(inst, srcs, p, seed=7)
    for j, s in enumerate(srcs):
        assert np.array_equal(tables[j], short_range(inst, s, p)[0])
    assert met.max_edge_congestion <= len(srcs) * p.per_channel
    with pytest.raises(ParamError):
        short_range_many(inst, [], p, seed=0)


def _net(n, seed=0):
    return VirtualNet.for_topology(generate(GeneratorSpec("erdos_renyi_connected", n, 1, seed)).topology)


def test_virtual_clique_of_three():
    net = _net(10)
    t, h = zip(*[(a, b) for a in range(3) for b in range(3) if a != b])
    vg = VirtualGraph(np.array([1, 4, 7]), 0, t, h, np.ones(6, np.int64), net)
    tables, met = virtualized_short_range(vg, [0], ShortRangeParams(2, 2, 1))
    assert tables[0].tolist() == [0, 1, 1]
    assert met.rounds > 0


def test_virtual_no_edges():
    net = _net(10)
    vg = VirtualGraph(np.array([2, 3, 5]), 1, [], [], [], net)
    tables, _ = virtualized_short_range(vg, [1], ShortRangeParams(2, 2, 1))
    assert tables[0].tolist() == [INF, 0, INF]


@pytest.mark.parametrize("seed", range(3))
def test_virtual_twelve_over_hundred_twenty(seed):
    net = _net(120, seed)
    rng = np.random.default_rng(seed)
    vg = random_virtual_graph(net, 12, rng, density=0.25, max_weight=4)
    p = ShortRangeParams(4, 6, 2)
    srcs = [0, 3, 7, 11]
    tables, met = virtualized_short_range(vg, srcs, p)
    W = ref.weight_matrix(vg.n_nodes, vg.tails, vg.heads, vg.weights)
    for j, s in enumerate(srcs):
        check_contract(tables[j], W, s, p)
    # every virtual round costs at least D-hat network rounds
    assert met.rounds >= p.rounds * net.d_hat
    assert met.extra["virtual_rounds"] == p.rounds


def test_virtual_meter_accumulates():
    net = _net(30)
    vg = random_virtual_graph(net, 8, np.random.default_rng(0))
    meter = net.meter()
    meter.idle(1)
    _, met = virtualized_short_range(vg, [0], ShortRangeParams(2, 3, 1), meter=meter)
    assert meter.rounds == net.d_hat + met.rounds
