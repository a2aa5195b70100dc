import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latbal.fixtures import build_ex1, build_fig2
from latbal.netlist import (
    BadParameter,
    CycleDetected,
    DelayAssignment,
    DuplicateLeqId,
    Edge,
    InstanceId,
    Lceq,
    MissingDriver,
    MultipleDrivers,
    Netlist,
    NetlistBuilder,
    NetlistError,
    Op,
    Sink,
    Source,
    UnknownTarget,
    apply_delays,
    child_id,
    dump_netlist,
    load_netlist,
    max_depth,
    netlist_from_json,
    netlist_to_json,
    topological_order,
    validate,
)
from latbal.testing import random_netlist


def test_minimal_chain_is_valid():
    b = NetlistBuilder()
    b.source("s")
    b.sink("k", "s")
    assert validate(b.build()) == []


def two_lceqs(leq_a: str, leq_b: str) -> Netlist:
    b = NetlistBuilder()
    b.source("s")
    b.lceq("e1", ["s", "s"], leq_a)
    b.lceq("e2", ["s", "s"], leq_b)
    return b.build()


def test_duplicate_leq_id():
    assert validate(two_lceqs("TOP:EQ1", "TOP:EQ1")) == [DuplicateLeqId("TOP:EQ1")]
    assert validate(two_lceqs("TOP:EQ1", "TOP:EQ2")) == []


def test_back_edge_is_a_cycle():
    n = Netlist(
        {"s": Source("s"), "a": Op("a", 1, 2, "add"), "b": Op("b", 0, 1), "k": Sink("k")},
        (Edge("s", 0, "a", 0), Edge("b", 0, "a", 1), Edge("a", 0, "b", 0), Edge("a", 0, "k", 0)),
    )
    vs = validate(n)
    # nodes left over by the topological sort: the loop and everything behind it
    assert vs == [CycleDetected(("a", "b", "k"))]
    with pytest.raises(NetlistError):
        topological_order(n)


def test_driver_counts_and_parameters():
    n = Netlist(
        {"s": Source("s"), "a": Op("a", -1, 2, "add"), "e": Lceq("e", 1, InstanceId(("E",)))},
        (Edge("s", 0, "a", 0), Edge("s", 0, "e", 0), Edge("s", 0, "e", 0)),
    )
    vs = validate(n)
    assert MissingDriver("a", 1) in vs
    assert MultipleDrivers("e", 0) in vs
    assert any(isinstance(v, BadParameter) and v.node == "a" for v in vs)
    assert any(isinstance(v, BadParameter) and v.node == "e" for v in vs)


def test_child_id():
    assert child_id(InstanceId.parse("TOP"), "EQ1").render() == "TOP:EQ1"
    assert child_id("TOP", "CMP", 3).render() == "TOP:CMP3"
    assert child_id("A:B", "C").render() == "A:B:C"
    assert child_id(InstanceId(), "EQ1").render() == "EQ1"


@pytest.mark.parametrize("bad", ["", "A:B", "with space"])
def test_child_id_rejects_bad_segments(bad):
    with pytest.raises(NetlistError):
        child_id("TOP", bad) if bad else child_id("TOP", "")


segment = st.text(alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Nd"),
                                         whitelist_characters="_-."), min_size=1, max_size=8)


@given(st.lists(segment, min_size=1, max_size=5))
def test_instance_id_round_trip(segs):
    ident = InstanceId(tuple(segs))
    assert InstanceId.parse(ident.render()) == ident


def test_apply_delays_empty_zeroes_everything():
    n = apply_delays(build_fig2(), DelayAssignment({("EQ", 0): 2}))
    z = apply_delays(n, DelayAssignment())
    assert all(node.delays == (0, 0) for node in z.lceqs())
    assert DelayAssignment.of_netlist(z).is_zero()


def test_apply_delays_fig2():
    n = apply_delays(build_fig2(), DelayAssignment({("EQ", 1): 4}))
    (eq,) = n.lceqs()
    assert eq.delays == (0, 4)
    assert n.edges == build_fig2().edges


@pytest.mark.parametrize("entries", [{("NOPE", 0): 0}, {("EQ", 2): 1}])
def test_apply_delays_unknown_target(entries):
    with pytest.raises(UnknownTarget):
        apply_delays(build_fig2(), DelayAssignment(entries))


def test_delay_assignment_rejects_negative():
    with pytest.raises(ValueError):
        DelayAssignment({("EQ", 0): -1})


def test_delay_assignment_blocks_and_equality():
    d = DelayAssignment({("B", 1): 3, ("A", 0): 1})
    assert d.blocks() == {"A": [1], "B": [0, 3]}
    assert d == DelayAssignment({("B", 1): 3, ("B", 0): 0, ("A", 0): 1})
    assert d != DelayAssignment({("B", 1): 2, ("A", 0): 1})


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_apply_delays_properties(seed, dseed):
    n = random_netlist(random.Random(seed))
    rng = random.Random(dseed)
    keys = [(e.leq_id.render(), p) for e in n.lceqs() for p in range(e.n_paths)]
    d = DelayAssignment({k: rng.randint(0, 5) for k in keys if rng.random() < 0.5})
    once = apply_delays(n, d)
    assert apply_delays(once, d) == once
    assert validate(once) == validate(n) == []
    # disjoint key sets commute
    half = set(keys[: len(keys) // 2])
    d1 = DelayAssignment({k: v for k, v in d.items() if k in half})
    d2 = DelayAssignment({k: v for k, v in d.items() if k not in half})
    assert apply_delays(apply_delays(n, d1 + d2), d1 + d2) == apply_delays(n, d2 + d1)


def test_max_depth_fig2():
    assert max_depth(build_fig2()) == 7
    assert max_depth(apply_delays(build_fig2(), DelayAssignment({("EQ", 1): 4}))) == 7
    assert max_depth(apply_delays(build_fig2(), DelayAssignment({("EQ", 0): 2}))) == 9


def test_json_round_trip(tmp_path):
    for n in (build_fig2(), build_ex1(), random_netlist(random.Random(3))):
        path = tmp_path / "n.json"
        dump_netlist(n, path)
        assert load_netlist(path) == n
        assert json.loads(path.read_text())["version"] == "latbal-netlist-1"


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(version="other"),
    lambda d: d["nodes"].append({"id": "x", "kind": "op"}),
    lambda d: d["nodes"].append({"id": "x", "kind": "bogus"}),
    lambda d: d["edges"].append({"from": "in"}),
    lambda d: d["nodes"].append(dict(d["nodes"][0])),
])
def test_json_rejects_malformed(mutate):
    doc = netlist_to_json(build_fig2())
    mutate(doc)
    with pytest.raises(NetlistError):
        netlist_from_json(doc)
