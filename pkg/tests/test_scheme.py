from fractions import Fraction

import pytest

from twounicast.cuts import detect_bottlenecks
from twounicast.dof import build_region
from twounicast.scheme import (
    Coeff,
    HopBlock,
    ReplayReceived,
    Scheme,
    SchemeError,
    SendReconstruction,
    SendSymbol,
    a,
    b,
    builtin_network,
    builtin_scheme,
    check_csit_legality,
    parse_scheme,
    serialize_scheme,
    validate_scheme,
)

ALL_BUILTINS = (
    [("bottleneck", m) for m in range(1, 7)]
    + [("double-bottleneck", m) for m in range(1, 6)]
    + [("no-bottleneck", None)]
)


@pytest.mark.parametrize("family,m", ALL_BUILTINS)
def test_builtin_schemes_are_legal(family, m):
    net = builtin_network(family, m)
    sch = builtin_scheme(family, m)
    report = check_csit_legality(net, sch)
    assert report.ok, report.violations


@pytest.mark.parametrize("family,m", ALL_BUILTINS)
def test_builtin_declared_dof_meets_outer_bound(family, m):
    net = builtin_network(family, m)
    sch = builtin_scheme(family, m)
    region = build_region(net, detect_bottlenecks(net))
    assert sum(sch.declared_dof, Fraction(0)) == region.max_sum


def test_declared_dof_values():
    assert builtin_scheme("bottleneck", 3).declared_dof == (Fraction(2, 3), Fraction(1))
    assert builtin_scheme("bottleneck", 1).declared_dof == (Fraction(0), Fraction(1))
    assert builtin_scheme("double-bottleneck", 2).declared_dof == (Fraction(2, 3), Fraction(2, 3))
    assert builtin_scheme("no-bottleneck").declared_dof == (Fraction(1), Fraction(1))


def test_builtin_errors():
    with pytest.raises(SchemeError):
        builtin_scheme("bottleneck", 0)
    with pytest.raises(SchemeError):
        builtin_scheme("nope", 2)
    with pytest.raises(SchemeError):
        builtin_scheme("no-bottleneck", 2)


@pytest.mark.parametrize("delay", [2, 3, 5])
def test_legality_monotone_in_delay(delay):
    """Interleaving `delay` blocks stretches every gap past any fixed delay."""
    for family, m in (("bottleneck", 3), ("double-bottleneck", 2), ("no-bottleneck", None)):
        net = builtin_network(family, m)
        sch = builtin_scheme(family, m)
        assert check_csit_legality(net, sch, min_delay=1, stretch=1).ok
        assert check_csit_legality(net, sch, min_delay=delay, stretch=delay, probe=False).ok


def _tampered(net, sch, slot, node, spec):
    hops = list(sch.hop_blocks)
    hop_idx = net.layer_of(node)
    schedule = dict(hops[hop_idx].schedule)
    schedule[(slot, node)] = spec
    hops[hop_idx] = HopBlock(hops[hop_idx].slots, schedule)
    return Scheme(sch.family, sch.m, tuple(hops), sch.k1, sch.k2)


def test_rejects_instantaneous_cross_node_gain():
    net = builtin_network("bottleneck", 3)
    sch = builtin_scheme("bottleneck", 3)
    # v2 transmits at hop-2 slot 1 (global 4) scaled by a slot-4 gain it cannot know
    bad = _tampered(
        net, sch, 1, "v2",
        SendReconstruction(((b(1), Coeff()),), scale=Coeff.gain("v3", "w", 4)),
    )
    report = check_csit_legality(net, bad)
    assert not report.ok
    assert any(v.reason == "instantaneous cross-node gain" for v in report.violations)


def test_rejects_future_gain():
    net = builtin_network("bottleneck", 3)
    sch = builtin_scheme("bottleneck", 3)
    bad = _tampered(
        net, sch, 1, "v2",
        SendReconstruction(((b(1), Coeff()),), scale=Coeff.gain("s2", "v2", 5)),
    )
    report = check_csit_legality(net, bad)
    assert not report.ok
    assert any(v.reason == "future gain" for v in report.violations)


def test_rejects_reconstruction_without_the_symbols():
    net = builtin_network("bottleneck", 3)
    sch = builtin_scheme("bottleneck", 3)
    # v1 only ever hears flow-1 symbols; it cannot rebuild a flow-2 mix
    bad = _tampered(net, sch, 1, "v1", SendReconstruction(((b(1), Coeff()),)))
    report = check_csit_legality(net, bad)
    assert not report.ok
    assert any("reconstruction infeasible" in v.reason for v in report.violations)


def test_own_incoming_current_slot_gain_is_legal():
    net = builtin_network("bottleneck", 3)
    sch = builtin_scheme("bottleneck", 3)
    # v2 transmits at global slot 5 and may use h(s2, v2)[5]: its own incoming gain
    original = sch.hop_blocks[1].schedule[(2, "v2")]
    tweaked = _tampered(
        net, sch, 2, "v2",
        SendReconstruction(original.target, scale=Coeff.gain("s2", "v2", 5)),
    )
    assert check_csit_legality(net, tweaked).ok


def test_validation_wrong_hop():
    net = builtin_network("bottleneck", 2)
    sch = builtin_scheme("bottleneck", 2)
    hops = list(sch.hop_blocks)
    schedule = dict(hops[0].schedule)
    schedule[(1, "w")] = SendReconstruction(((b(1), Coeff()),))  # layer-3 node in hop 1
    hops[0] = HopBlock(hops[0].slots, schedule)
    bad = Scheme(sch.family, sch.m, tuple(hops), sch.k1, sch.k2)
    with pytest.raises(SchemeError, match="own hop block"):
        validate_scheme(net, bad)


def test_validation_symbol_range_and_raw_symbols():
    net = builtin_network("bottleneck", 2)
    sch = builtin_scheme("bottleneck", 2)
    with pytest.raises(SchemeError, match="out of declared range"):
        validate_scheme(net, _tampered(net, sch, 1, "s2", SendSymbol(b(9))))
    with pytest.raises(SchemeError, match="only source"):
        validate_scheme(net, _tampered(net, sch, 1, "s1", SendSymbol(b(1))))


def test_validation_replay_and_gain_references():
    net = builtin_network("bottleneck", 2)
    sch = builtin_scheme("bottleneck", 2)
    with pytest.raises(SchemeError, match="only receives"):
        validate_scheme(net, _tampered(net, sch, 1, "w", ReplayReceived(1)))
    with pytest.raises(SchemeError, match="nonexistent edge"):
        validate_scheme(
            net,
            _tampered(net, sch, 1, "v2",
                      SendReconstruction(((b(1), Coeff.gain("v1", "d2", 1)),))),
        )
    with pytest.raises(SchemeError, match="nonexistent slot"):
        validate_scheme(
            net,
            _tampered(net, sch, 1, "v2",
                      SendReconstruction(((b(1), Coeff.gain("s2", "v2", 99)),))),
        )


def test_hop_count_mismatch():
    net = builtin_network("double-bottleneck", 2)
    sch = builtin_scheme("bottleneck", 2)
    with pytest.raises(SchemeError, match="hop blocks"):
        validate_scheme(net, sch)


@pytest.mark.parametrize("family,m", [("bottleneck", 3), ("double-bottleneck", 2), ("no-bottleneck", None)])
def test_scheme_json_roundtrip(family, m):
    sch = builtin_scheme(family, m)
    text = serialize_scheme(sch)
    again = parse_scheme(text)
    assert again == sch
    assert serialize_scheme(again) == text


def test_parse_scheme_rejects_garbage():
    with pytest.raises(SchemeError):
        parse_scheme("not json")
    with pytest.raises(SchemeError):
        parse_scheme('{"hops": [], "symbols": {}}')
    with pytest.raises(SchemeError, match="at least one hop"):
        parse_scheme('{"hops": [], "symbols": {"k1": 1, "k2": 1}}')
