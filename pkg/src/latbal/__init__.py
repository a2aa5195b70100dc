"""Latency balancing for pipelined dataflow designs via simulated time markers.

Time markers travel with simulated data; LCEQ blocks report them, and one
analysis pass yields every delay needed to align parallel paths.
"""

from . import fixtures  # registers the example-system stimulus
from .analyzer import compute_delays, emit_assignment_json, emit_latency_package
from .marker import DEFAULT_WINDOW, UNINITIALIZED, MarkerWindow, TimeMarker, advance, marker_diff, marker_min
from .netlist import (
    DelayAssignment,
    InstanceId,
    Netlist,
    NetlistBuilder,
    apply_delays,
    child_id,
    load_netlist,
    validate,
)
from .oracle import static_delays, static_latencies
from .report import parse_report, write_record
from .simulator import SimMode, simulate
from .vhdlgen import LceqSpec, generate_lceq, init_constant_name

__version__ = "0.1.0"

__all__ = [
    "fixtures",
    "compute_delays",
    "emit_assignment_json",
    "emit_latency_package",
    "DEFAULT_WINDOW",
    "UNINITIALIZED",
    "MarkerWindow",
    "TimeMarker",
    "advance",
    "marker_diff",
    "marker_min",
    "DelayAssignment",
    "InstanceId",
    "Netlist",
    "NetlistBuilder",
    "apply_delays",
    "child_id",
    "load_netlist",
    "validate",
    "static_delays",
    "static_latencies",
    "parse_report",
    "write_record",
    "SimMode",
    "simulate",
    "LceqSpec",
    "generate_lceq",
    "init_constant_name",
]
