"""Delay computation from marker reports, and emission of the results.

For every LCEQ block the analyzer reads the per-cycle marker groups, skips
groups where any input is still uninitialized, and requires the offset of
each path from the group's oldest marker to stay constant.  That offset is
the extra delay the path needs.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .marker import DEFAULT_WINDOW, MarkerWindow
from .netlist import DelayAssignment
from .report import ReportGroup

__all__ = [
    "AnalysisError",
    "InconsistentLatency",
    "NoValidSamples",
    "BadIdentifier",
    "compute_delays",
    "assignment_to_json",
    "emit_assignment_json",
    "load_assignment_json",
    "render_latency_package",
    "emit_latency_package",
    "is_vhdl_identifier",
]


class AnalysisError(ValueError):
    pass


class InconsistentLatency(AnalysisError):
    def __init__(self, leq_id: str, path: int, values: tuple[int, int]) -> None:
        super().__init__(f"{leq_id} path {path}: latency difference changes from {values[0]} to {values[1]}")
        self.leq_id, self.path, self.values = leq_id, path, values


class NoValidSamples(AnalysisError):
    def __init__(self, leq_id: str) -> None:
        super().__init__(f"{leq_id}: no cycle with all inputs initialized")
        self.leq_id = leq_id


class BadIdentifier(ValueError):
    pass


@dataclass
class _BlockState:
    n_paths: int
    deltas: list[int] | None = None


def compute_delays(groups: Iterable[ReportGroup], window: MarkerWindow = DEFAULT_WINDOW) -> DelayAssignment:
    """Single streaming pass over parsed report groups."""
    blocks: dict[str, _BlockState] = {}
    for leq_id, markers in groups:
        st = blocks.get(leq_id)
        if st is None:
            st = blocks[leq_id] = _BlockState(len(markers))
        elif len(markers) != st.n_paths:
            raise AnalysisError(f"{leq_id}: path count changes from {st.n_paths} to {len(markers)}")
        if any(m == -1 for m in markers):
            continue
        oldest = window.oldest_value(markers)
        deltas = [window.value_diff(m, oldest) for m in markers]
        if st.deltas is None:
            st.deltas = deltas
            continue
        for path, (a, b) in enumerate(zip(st.deltas, deltas)):
            if a != b:
                raise InconsistentLatency(leq_id, path, (a, b))

    entries = {}
    for leq_id, st in blocks.items():
        if st.deltas is None:
            raise NoValidSamples(leq_id)
        entries.update({(leq_id, i): d for i, d in enumerate(st.deltas)})
    return DelayAssignment(entries)


# -- JSON ---------------------------------------------------------------------


def assignment_to_json(d: DelayAssignment) -> str:
    return json.dumps(d.blocks(), sort_keys=True) + "\n"


def emit_assignment_json(d: DelayAssignment, path: str | Path) -> None:
    Path(path).write_text(assignment_to_json(d), encoding="utf-8")


def load_assignment_json(path: str | Path) -> DelayAssignment:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(obj, dict) or not all(
        isinstance(v, list) and all(isinstance(x, int) and x >= 0 for x in v) for v in obj.values()
    ):
        raise ValueError(f"{path}: expected an object mapping LEQ_ID to a list of delays")
    return DelayAssignment.from_blocks(obj)


# -- VHDL package ------------------------------------------------------------

_VHDL_RESERVED = frozenset("""
abs access after alias all and architecture array assert attribute begin block
body buffer bus case component configuration constant disconnect downto else
elsif end entity exit file for function generate generic group guarded if
impure in inertial inout is label library linkage literal loop map mod nand
new next nor not null of on open or others out package port postponed
procedure process pure range record register reject rem report return rol ror
select severity signal shared sla sll sra srl subtype then to transport type
unaffected units until use variable wait when while with xnor xor
""".split())

_BASIC_ID = re.compile(r"[A-Za-z](?:_?[A-Za-z0-9])*\Z")


def is_vhdl_identifier(name: str) -> bool:
    return bool(_BASIC_ID.match(name)) and name.lower() not in _VHDL_RESERVED


def _check_identifier(name: str, what: str) -> None:
    if not is_vhdl_identifier(name):
        raise BadIdentifier(f"{what} {name!r} is not a VHDL basic identifier")


def _vhdl_string(s: str) -> str:
    return '"' + s.replace('"', '""') + '"'


def render_latency_package(d: DelayAssignment, package_name: str, function_name: str) -> str:
    _check_identifier(package_name, "package name")
    _check_identifier(function_name, "function name")
    decl = [
        f"  function {function_name} (",
        "    constant LEQ_ID : string;",
        "    constant NUM    : integer)",
        "    return integer",
    ]
    lines = [
        "-- Latency configuration generated by latbal latreadgen.  Do not edit.",
        f"package {package_name} is",
        "",
        *decl[:-1], decl[-1] + ";",
        "",
        f"end package {package_name};",
        "",
        f"package body {package_name} is",
        "",
        *decl[:-1], decl[-1] + " is",
        "  begin",
    ]
    items = d.items()
    for k, ((leq_id, path), delay) in enumerate(items):
        kw = "if" if k == 0 else "elsif"
        lines.append(f"    {kw} LEQ_ID = {_vhdl_string(leq_id)} and NUM = {path} then")
        lines.append(f"      return {delay};")
    if items:
        lines.append("    end if;")
    lines += [
        "    return 0;",
        f"  end function {function_name};",
        "",
        f"end package body {package_name};",
    ]
    return "\n".join(lines) + "\n"


def emit_latency_package(d: DelayAssignment, package_name: str, function_name: str,
                         path: str | Path) -> None:
    text = render_latency_package(d, package_name, function_name)
    Path(path).write_text(text, encoding="utf-8")
