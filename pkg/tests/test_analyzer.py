import io
import itertools
import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latbal.analyzer import (
    AnalysisError,
    BadIdentifier,
    InconsistentLatency,
    NoValidSamples,
    assignment_to_json,
    compute_delays,
    emit_assignment_json,
    emit_latency_package,
    is_vhdl_identifier,
    load_assignment_json,
    render_latency_package,
)
from latbal.marker import MarkerWindow
from latbal.netlist import DelayAssignment
from latbal.report import ReportGroup, parse_report
from latbal.simulator import SimMode, simulate
from latbal.testing import random_netlist


def g(leq, *markers):
    return ReportGroup(leq, tuple(markers))


def brute_force_delays(rows, size):
    """Try every delay vector with a zero entry; keep the one aligning every valid row."""
    valid = [r for r in rows if -1 not in r]
    n = len(valid[0])
    hits = [
        d for d in itertools.product(range(size // 2), repeat=n)
        if min(d) == 0 and all(len({(r[i] - d[i]) % size for i in range(n)}) == 1 for r in valid)
    ]
    assert len(hits) == 1
    return hits[0]


def test_example_from_markers():
    rows = [(10, 6), (11, 7), (12, 8)]
    d = compute_delays([g("EQ", *r) for r in rows])
    assert d == DelayAssignment({("EQ", 0): 4, ("EQ", 1): 0})
    assert brute_force_delays(rows, 16) == (4, 0)


def test_uninitialized_groups_are_skipped():
    rows = [(-1, -1), (0, -1), (1, 0), (2, 1)]
    assert compute_delays([g("EQ", *r) for r in rows]) == DelayAssignment({("EQ", 0): 1})
    assert brute_force_delays(rows, 16) == (1, 0)


def test_inconsistent():
    with pytest.raises(InconsistentLatency) as exc:
        compute_delays([g("EQ", 5, 5), g("EQ", 6, 7)])
    assert (exc.value.leq_id, exc.value.path, exc.value.values) == ("EQ", 1, (0, 1))


def test_no_valid_samples():
    with pytest.raises(NoValidSamples):
        compute_delays([g("EQ", -1, 3), g("EQ", -1, 4)])


def test_path_count_change():
    with pytest.raises(AnalysisError):
        compute_delays([g("EQ", 1, 1), g("EQ", 1, 1, 1)])


def test_wrapping_markers():
    w = MarkerWindow(64)
    d = compute_delays([g("EQ", 62, 1), g("EQ", 63, 2), g("EQ", 0, 3)], w)
    assert d == DelayAssignment({("EQ", 1): 3})
    assert brute_force_delays([(62, 1), (63, 2), (0, 3)], 64) == (0, 3)


@given(st.integers(0, 2**16 - 1), st.lists(st.integers(0, 40), min_size=2, max_size=5),
       st.integers(1, 10))
def test_shift_invariance(base, lags, cycles):
    """Adding a constant to every marker of a block leaves the delays unchanged."""
    w = MarkerWindow(2**16)
    rows = [tuple((t - lag) % w.size for lag in lags) for t in range(100, 100 + cycles)]
    shifted = [tuple((m + base) % w.size for m in r) for r in rows]
    a = compute_delays([g("B", *r) for r in rows], w)
    b = compute_delays([g("B", *r) for r in shifted], w)
    assert a == b
    assert [a.get("B", i) for i in range(len(lags))] == [max(lags) - lag for lag in lags]
    assert min(a.blocks()["B"]) == 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_blocks_are_independent(seed):
    rng = random.Random(seed)
    n = random_netlist(rng)
    rep = simulate(n, SimMode.ANALYSIS, 150).report
    groups = list(parse_report(io.StringIO(rep)))
    whole = compute_delays(groups)
    for leq in {gr.leq_id for gr in groups}:
        part = compute_delays([gr for gr in groups if gr.leq_id == leq])
        assert part.blocks()[leq] == whole.blocks()[leq]


def test_assignment_json(tmp_path):
    d = DelayAssignment({("TOP:EQ1", 0): 4, ("TOP:EQ1", 1): 0, ("A", 2): 1})
    assert assignment_to_json(d) == '{"A": [0, 0, 1], "TOP:EQ1": [4, 0]}\n'
    assert assignment_to_json(DelayAssignment()) == "{}\n"
    path = tmp_path / "d.json"
    emit_assignment_json(d, path)
    assert load_assignment_json(path) == d
    assert json.loads(path.read_text()) == {"A": [0, 0, 1], "TOP:EQ1": [4, 0]}


def test_assignment_json_rejects_garbage(tmp_path):
    path = tmp_path / "d.json"
    path.write_text('{"A": [1, -2]}')
    with pytest.raises(ValueError):
        load_assignment_json(path)


PKG_GOLDEN = """\
-- Latency configuration generated by latbal latreadgen.  Do not edit.
package ex1_trees_pkg is

  function ex1_trees (
    constant LEQ_ID : string;
    constant NUM    : integer)
    return integer;

end package ex1_trees_pkg;

package body ex1_trees_pkg is

  function ex1_trees (
    constant LEQ_ID : string;
    constant NUM    : integer)
    return integer is
  begin
    if LEQ_ID = "TOP:EQ1" and NUM = 0 then
      return 4;
    elsif LEQ_ID = "TOP:EQ1" and NUM = 1 then
      return 0;
    end if;
    return 0;
  end function ex1_trees;

end package body ex1_trees_pkg;
"""


def test_package_golden(tmp_path):
    d = DelayAssignment({("TOP:EQ1", 1): 0, ("TOP:EQ1", 0): 4})
    assert render_latency_package(d, "ex1_trees_pkg", "ex1_trees") == PKG_GOLDEN
    path = tmp_path / "p.vhd"
    emit_latency_package(d, "ex1_trees_pkg", "ex1_trees", path)
    assert path.read_text() == PKG_GOLDEN


def test_empty_package_returns_zero():
    text = render_latency_package(DelayAssignment(), "p_pkg", "f")
    body = text.split("begin", 1)[1]
    assert "if" not in body.split("end function")[0]
    assert "    return 0;\n  end function f;" in text


@pytest.mark.parametrize("pkg,fn", [("1bad", "f"), ("p", "end"), ("p", "a__b"), ("p_", "f")])
def test_bad_identifiers(pkg, fn):
    with pytest.raises(BadIdentifier):
        render_latency_package(DelayAssignment(), pkg, fn)


@pytest.mark.parametrize("name,ok", [("ex1_trees", True), ("A", True), ("_x", False),
                                     ("process", False), ("x-y", False)])
def test_is_vhdl_identifier(name, ok):
    assert is_vhdl_identifier(name) is ok
