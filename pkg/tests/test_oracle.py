from latbal.fixtures import build_fig2
from latbal.netlist import DelayAssignment, NetlistBuilder, apply_delays
from latbal.oracle import static_delays, static_latencies


def test_fig2():
    n = build_fig2()
    lat = static_latencies(n)
    assert (lat[("eq", 0)], lat[("eq", 1)]) == (6, 2)
    assert static_delays(n) == DelayAssignment({("EQ", 0): 0, ("EQ", 1): 4})
    assert lat[("out", 0)] == 7


def test_fig2_accounts_for_configured_delays():
    n = apply_delays(build_fig2(), DelayAssignment({("EQ", 1): 4}))
    assert static_delays(n).is_zero()
    n = apply_delays(build_fig2(), DelayAssignment({("EQ", 1): 1}))
    assert static_delays(n) == DelayAssignment({("EQ", 1): 3})


def test_chain_and_delay_line():
    b = NetlistBuilder()
    b.source("s")
    a = b.op("a", ["s"], 3, "first")
    d = b.delay("d", a, 2)
    c = b.op("c", [d], 4, "first")
    e = b.lceq("e", [c, "s"], "X")
    b.sink("k", (e, 1))
    n = b.build()
    assert static_latencies(n)[("e", 0)] == 9
    assert static_delays(n) == DelayAssignment({("X", 1): 9})


def test_diamond_takes_longest_branch():
    b = NetlistBuilder()
    b.source("s")
    x = b.op("x", ["s"], 1, "first")
    y = b.op("y", ["s"], 5, "first")
    j = b.op("j", [x, y], 1, "add")
    e = b.lceq("e", [j, "s", x], "TOP:EQ1")
    b.sink("k", (e, 0))
    lat = static_latencies(b.build())
    assert [lat[("e", p)] for p in range(3)] == [6, 0, 1]
    assert static_delays(b.build()).blocks() == {"TOP:EQ1": [0, 6, 5]}


def test_nested_lceq_output_is_aligned():
    b = NetlistBuilder()
    b.source("s")
    a = b.op("a", ["s"], 2, "first")
    e1 = b.lceq("e1", [a, "s"], "E1")
    c = b.op("c", [(e1, 1)], 1, "first")
    e2 = b.lceq("e2", [c, (e1, 0)], "E2")
    b.sink("k", (e2, 0))
    assert static_delays(b.build()).blocks() == {"E1": [0, 2], "E2": [0, 1]}
