import random

import pytest

from twounicast.cuts import (
    CutQuery,
    IndegreeBudgetError,
    detect_bottlenecks,
    detect_omniscient,
    is_cut,
)
from twounicast.network import (
    LayeredNetwork,
    UnknownNodeError,
    gen_bottleneck_family,
    gen_double_bottleneck_family,
    gen_no_bottleneck_example,
)

from .oracles import (
    bottlenecks_naive,
    is_cut_naive,
    omniscient_naive,
    random_layered_net,
    random_query,
)


def q(removed, from_nodes, to_nodes):
    return CutQuery.of(removed, from_nodes, to_nodes)


def test_is_cut_on_bottleneck_family():
    net = gen_bottleneck_family(3)
    assert is_cut(net, q({"w"}, {"s1", "s2"}, {"d1"}))
    # a lone flow-2 relay leaves detours through its siblings
    assert not is_cut(net, q({"v3"}, {"s2"}, {"d1", "d2"}))
    assert is_cut(net, q({"v2", "v3", "v4"}, {"s2"}, {"d1", "d2"}))


def test_empty_cut_on_direct_edge():
    net = LayeredNetwork(
        (("s1", "s2"), ("d1", "d2")),
        (("s1", "d1"), ("s2", "d2")),
        ("s1", "s2"),
        ("d1", "d2"),
    )
    assert not is_cut(net, q(set(), {"s1"}, {"d1"}))
    assert is_cut(net, q({"s1"}, {"s1"}, {"d1"}))  # source inside the cut


def test_is_cut_unknown_node():
    net = gen_bottleneck_family(2)
    with pytest.raises(UnknownNodeError):
        is_cut(net, q({"nope"}, {"s1"}, {"d1"}))


def test_is_cut_matches_naive_path_enumeration():
    rng = random.Random(0xCA11AB1E)
    checked = 0
    for _ in range(200):
        net = random_layered_net(rng)
        for _ in range(4):
            removed, fr, to = random_query(rng, net)
            expected = is_cut_naive(net, removed, fr, to)
            assert is_cut(net, q(removed, fr, to)) == expected
            checked += 1
    assert checked >= 200


def test_omniscient_examples():
    assert [(r.node, r.destination_index) for r in detect_omniscient(gen_bottleneck_family(1))].count(("w", 1)) == 1
    assert detect_omniscient(gen_no_bottleneck_example()) == ()
    assert detect_omniscient(gen_bottleneck_family(3)) == ()


def test_omniscient_matches_naive():
    rng = random.Random(7341)
    for _ in range(50):
        net = random_layered_net(rng)
        got = [(r.node, r.destination_index, r.witness_u) for r in detect_omniscient(net)]
        assert got == omniscient_naive(net)


def test_bottleneck_family_m3_single_record():
    report = detect_bottlenecks(gen_bottleneck_family(3))
    assert [(r.node, r.destination_index, r.minimal_m, set(r.witness)) for r in report.bottlenecks] == [
        ("w", 1, 3, {"v2", "v3", "v4"})
    ]


def test_bottleneck_m1_is_also_omniscient():
    """With a single flow-2 relay, w chokes both flows and is omniscient."""
    report = detect_bottlenecks(gen_bottleneck_family(1))
    records = {(r.node, r.destination_index, r.minimal_m): r.witness for r in report.bottlenecks}
    assert records[("w", 1, 1)] == {"v2"}
    assert records[("w", 2, 1)] == {"v1"}
    assert ("w", 1, "v2") in [(r.node, r.destination_index, r.witness_u) for r in report.omniscient]


def test_bottleneck_double_family_two_records():
    report = detect_bottlenecks(gen_double_bottleneck_family(2))
    assert [(r.node, r.destination_index, r.minimal_m) for r in report.bottlenecks] == [
        ("w", 1, 2),
        ("w2", 2, 2),
    ]
    assert set(next(r.witness for r in report.bottlenecks if r.node == "w2")) == {"q1", "q2"}


def test_bottleneck_no_bottleneck_example_empty():
    report = detect_bottlenecks(gen_no_bottleneck_example())
    assert report.bottlenecks == ()
    assert report.omniscient == ()


def test_minimal_m_matches_bruteforce():
    rng = random.Random(90125)
    for _ in range(50):
        net = random_layered_net(rng)
        report = detect_bottlenecks(net)
        got = [(r.node, r.destination_index, r.minimal_m, r.witness) for r in report.bottlenecks]
        assert got == bottlenecks_naive(net)


def test_witnesses_are_sound():
    for net in (gen_bottleneck_family(4), gen_double_bottleneck_family(3)):
        report = detect_bottlenecks(net)
        for r in report.bottlenecks:
            dest = net.destinations[r.destination_index - 1]
            other = net.sources[2 - r.destination_index]
            assert r.witness <= net.parents(r.node)
            assert is_cut(net, q({r.node}, set(net.sources), {dest}))
            assert is_cut(net, q(r.witness, {other}, set(net.destinations)))


def test_one_bottlenecks_are_omniscient():
    """Nodes with a size-1 witness always appear in the omniscient list."""
    rng = random.Random(424242)
    nets = [gen_bottleneck_family(1), gen_double_bottleneck_family(1)]
    nets += [random_layered_net(rng) for _ in range(40)]
    for net in nets:
        report = detect_bottlenecks(net)
        omni_nodes = {r.node for r in report.omniscient}
        for r in report.bottlenecks:
            if r.minimal_m == 1:
                assert r.node in omni_nodes


def test_report_bytes_deterministic():
    net = gen_double_bottleneck_family(3)
    assert detect_bottlenecks(net).to_json() == detect_bottlenecks(net).to_json()


def test_indegree_budget_error():
    with pytest.raises(IndegreeBudgetError, match="in-degree 4"):
        detect_bottlenecks(gen_bottleneck_family(3), max_indegree_for_exhaustive=2)
