"""``latbal`` command line: the simulation-analysis-correction workflow.

Subcommands mirror the demonstration makefile targets (``initial``,
``synchro``, ``final``) plus the two generators, whose positional arguments
follow the original tools::

    latbal latreadgen /tmp/latrep.txt lateq_read_pkg.vhd lateq_read_pkg lateq_read_delays
    latbal lateqgen lceq1 lceq1.vhd T_VOLTAGE T_VOLTAGE T_WIDTH T_POSITION

Exit status: 0 on success, 1 when balancing or verification fails, 2 on
usage, input or parse errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .analyzer import (
    AnalysisError,
    BadIdentifier,
    compute_delays,
    emit_assignment_json,
    emit_latency_package,
    load_assignment_json,
)
from .fixtures import TABLE1_PARAMS, Ex1Params, build_ex1, build_fig2
from .marker import DEFAULT_WINDOW_SIZE, MarkerWindow
from .netlist import (
    DelayAssignment,
    Netlist,
    NetlistError,
    apply_delays,
    dump_netlist,
    load_netlist,
    validate,
)
from .oracle import static_delays
from .report import ReportError, parse_report
from .simulator import FinalTestFailed, InvalidNetlist, SimMode, SimOutcome, WindowExceeded, simulate
from .vhdlgen import BadTypeName, LceqSpec, SpecError, generate_lceq

__all__ = [
    "SynchroResult",
    "cmd_initial",
    "cmd_synchro",
    "cmd_final",
    "cmd_latreadgen",
    "cmd_lateqgen",
    "default_report_path",
    "main",
]

DEFAULT_CYCLES = 200
DEFAULT_PACKAGE_NAME = "lateq_read_pkg"
DEFAULT_FUNCTION_NAME = "lateq_read_delays"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class OracleMismatch(Exception):
    pass


def default_report_path(name: str = "latrep.txt") -> Path:
    return Path(os.environ.get("LATBAL_REPORT_DIR") or tempfile.gettempdir()) / name


def format_blocks(d: DelayAssignment) -> list[str]:
    return [f"{leq}: [{','.join(map(str, ds))}]" for leq, ds in d.blocks().items()]


def _check(n: Netlist) -> None:
    violations = validate(n)
    if violations:
        raise InvalidNetlist(violations)


# -- workflow ------------------------------------------------------------------


def cmd_initial(n: Netlist, out_package: str | Path | None, out_json: str | Path | None,
                package_name: str = DEFAULT_PACKAGE_NAME,
                function_name: str = DEFAULT_FUNCTION_NAME) -> DelayAssignment:
    """All paths at zero delay; the package function returns 0 for everything."""
    _check(n)
    zeros = DelayAssignment.zeros(n)
    if out_json is not None:
        emit_assignment_json(zeros, out_json)
    if out_package is not None:
        emit_latency_package(DelayAssignment(), package_name, function_name, out_package)
    return zeros


@dataclass
class SynchroResult:
    added: DelayAssignment
    total: DelayAssignment
    report_path: Path
    oracle: DelayAssignment | None = None


def cmd_synchro(
    n: Netlist,
    cycles: int = DEFAULT_CYCLES,
    out_package: str | Path | None = None,
    out_json: str | Path | None = None,
    report_path: str | Path | None = None,
    *,
    delays: DelayAssignment | None = None,
    seed: int = 0,
    window: MarkerWindow = MarkerWindow(),
    oracle: bool = False,
    package_name: str = DEFAULT_PACKAGE_NAME,
    function_name: str = DEFAULT_FUNCTION_NAME,
) -> SynchroResult:
    """One analysis run, then the delays it implies.

    The run uses the netlist's configured delays, or ``delays`` when given.
    ``added`` is what the analysis found missing; ``total`` (current plus
    added) is what gets written out.
    """
    _check(n)
    current = DelayAssignment.of_netlist(n) if delays is None else delays
    n = apply_delays(n, current)
    report_path = Path(report_path) if report_path is not None else default_report_path()
    simulate(n, SimMode.ANALYSIS, cycles, seed=seed, window=window, report_to=report_path)
    with open(report_path, encoding="ascii") as f:
        added = compute_delays(parse_report(f), window)
    total = current + added
    if out_json is not None:
        emit_assignment_json(total, out_json)
    if out_package is not None:
        emit_latency_package(total, package_name, function_name, out_package)
    result = SynchroResult(added, total, report_path)
    if oracle:
        result.oracle = static_delays(n)
        if result.oracle != added:
            raise OracleMismatch(f"oracle {result.oracle!r} != analysis {added!r}")
    return result


def cmd_final(n: Netlist, delays: DelayAssignment | None, cycles: int = DEFAULT_CYCLES, *,
              seed: int = 0, window: MarkerWindow = MarkerWindow()) -> SimOutcome:
    """Final test run; raises :class:`FinalTestFailed` on the first inequality."""
    _check(n)
    if delays is not None:
        n = apply_delays(n, delays)
    return simulate(n, SimMode.FINAL_TEST, cycles, seed=seed, window=window)


def cmd_latreadgen(markers_file: str | Path, package_file: str | Path, package_name: str,
                   function_name: str, *, initial: bool = False, json_path: str | Path | None = None,
                   window: MarkerWindow = MarkerWindow()) -> DelayAssignment:
    if initial:
        d = DelayAssignment()
    else:
        with open(markers_file, encoding="ascii") as f:
            d = compute_delays(parse_report(f), window)
    emit_latency_package(d, package_name, function_name, package_file)
    if json_path is not None:
        emit_assignment_json(d, json_path)
    return d


def cmd_lateqgen(entity: str, out_file: str | Path, types: Sequence[str],
                 use_clauses: Sequence[str] = ()) -> str:
    text = generate_lceq(LceqSpec(entity, tuple(types), tuple(use_clauses)))
    Path(out_file).write_text(text, encoding="utf-8")
    return text


# -- argument parsing ----------------------------------------------------------


def _design_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("design (default: the example detector system)")
    g.add_argument("--netlist", type=Path, help="netlist JSON file")
    g.add_argument("--case", type=int, choices=range(1, len(TABLE1_PARAMS) + 1),
                   help="example system with Table 1 test-case parameters")
    g.add_argument("--fig2", action="store_true", help="two-branch example (latencies 6 and 2)")
    d = Ex1Params()
    g.add_argument("--channels", type=int, default=d.n_channels)
    g.add_argument("--side-chans", type=int, default=d.n_side_chans)
    g.add_argument("--ins-cmp", type=int, default=d.ins_in_cmp)
    g.add_argument("--ins-add", type=int, default=d.ins_in_add)


def _sim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cycles", type=int, default=DEFAULT_CYCLES)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW_SIZE, help="marker wraparound window")
    p.add_argument("--seed", type=int, default=0, help="stimulus seed")


def _pkg_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--package", type=Path, help="write the latency VHDL package here")
    p.add_argument("--json", type=Path, help="write the delay assignment JSON here")
    p.add_argument("--package-name", default=DEFAULT_PACKAGE_NAME)
    p.add_argument("--function-name", default=DEFAULT_FUNCTION_NAME)


def _design(args) -> Netlist:
    if args.netlist is not None:
        return load_netlist(args.netlist)
    if args.fig2:
        return build_fig2()
    if args.case is not None:
        return build_ex1(TABLE1_PARAMS[args.case - 1])
    return build_ex1(Ex1Params(args.channels, args.side_chans, args.ins_cmp, args.ins_add))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="latbal", description="Simulation-analysis-correction workflow for latency balancing.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("initial", help="zero-delay configuration")
    _design_args(p)
    _pkg_args(p)

    p = sub.add_parser("synchro", help="simulation-analysis-correction cycle")
    _design_args(p)
    _sim_args(p)
    _pkg_args(p)
    p.add_argument("--report", type=Path, help="marker report path (default $LATBAL_REPORT_DIR/latrep.txt)")
    p.add_argument("--delays", type=Path, help="current delay assignment JSON to start from")
    p.add_argument("--oracle", action="store_true", help="cross-check against static path analysis")
    p.add_argument("--cases", help="run Table 1 cases instead, e.g. 'all' or '1,3,5'")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for --cases")

    p = sub.add_parser("final", help="final test simulation")
    _design_args(p)
    _sim_args(p)
    p.add_argument("--delays", type=Path, help="delay assignment JSON (default: netlist as is)")

    p = sub.add_parser("latreadgen", help="report file -> latency package")
    p.add_argument("markers_file", type=Path)
    p.add_argument("package_file", type=Path)
    p.add_argument("package_name")
    p.add_argument("function_name")
    p.add_argument("--initial", action="store_true", help="ignore the report; all delays 0")
    p.add_argument("--json", type=Path, help="also write the assignment as JSON")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW_SIZE)

    p = sub.add_parser("lateqgen", help="generate an LCEQ entity for the given path types")
    p.add_argument("entity")
    p.add_argument("out_file", type=Path)
    p.add_argument("types", nargs="+", metavar="TYPE")
    p.add_argument("--use", action="append", default=[], metavar="CLAUSE",
                   help="extra use clause, e.g. work.ex1_pkg.all")

    p = sub.add_parser("fixture", help="export a built-in design as netlist JSON")
    _design_args(p)
    p.add_argument("-o", "--output", type=Path, required=True)
    return ap


def _parse_cases(text: str) -> list[int]:
    if text == "all":
        return list(range(1, len(TABLE1_PARAMS) + 1))
    cases = [int(c) for c in text.split(",")]
    if any(not 1 <= c <= len(TABLE1_PARAMS) for c in cases):
        raise ValueError(f"cases must lie in 1..{len(TABLE1_PARAMS)}")
    return cases


def _synchro_case(case: int, cycles: int, seed: int, window: int, report_dir: str) -> dict[str, list[int]]:
    report = Path(report_dir) / f"latrep_case{case}.txt"
    r = cmd_synchro(build_ex1(TABLE1_PARAMS[case - 1]), cycles, report_path=report,
                    seed=seed, window=MarkerWindow(window), oracle=True)
    return r.total.blocks()


def _run_cases(args) -> int:
    cases = _parse_cases(args.cases)
    report_dir = str(args.report.parent if args.report else default_report_path().parent)
    jobs = [(c, args.cycles, args.seed, args.window, report_dir) for c in cases]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            results = list(ex.map(_synchro_case, *zip(*jobs)))
    else:
        results = [_synchro_case(*j) for j in jobs]
    summary = {}
    for case, blocks in zip(cases, results):
        summary[f"case{case}"] = blocks
        print(f"case {case}: " + "; ".join(f"{k}: [{','.join(map(str, v))}]" for k, v in blocks.items()))
    if args.json:
        args.json.write_text(json.dumps(summary, sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "lateqgen":
        cmd_lateqgen(args.entity, args.out_file, args.types, args.use)
        print(f"wrote {args.out_file}")
        return EXIT_OK
    if cmd == "latreadgen":
        d = cmd_latreadgen(args.markers_file, args.package_file, args.package_name, args.function_name,
                           initial=args.initial, json_path=args.json, window=MarkerWindow(args.window))
        for line in format_blocks(d):
            print(line)
        return EXIT_OK
    if cmd == "synchro" and args.cases:
        return _run_cases(args)

    n = _design(args)
    if cmd == "fixture":
        _check(n)
        dump_netlist(n, args.output)
        print(f"wrote {args.output}")
        return EXIT_OK
    if cmd == "initial":
        zeros = cmd_initial(n, args.package, args.json, args.package_name, args.function_name)
        for line in format_blocks(zeros):
            print(line)
        return EXIT_OK

    window = MarkerWindow(args.window)
    delays = load_assignment_json(args.delays) if args.delays else None
    if cmd == "synchro":
        r = cmd_synchro(n, args.cycles, args.package, args.json, args.report, delays=delays,
                        seed=args.seed, window=window, oracle=args.oracle,
                        package_name=args.package_name, function_name=args.function_name)
        for line in format_blocks(r.added):
            print(line)
        if args.oracle:
            print("oracle: agrees")
        return EXIT_OK

    try:
        out = cmd_final(n, delays, args.cycles, seed=args.seed, window=window)
    except FinalTestFailed as exc:
        print(exc.event.message(), file=sys.stderr)
        print(f"final test FAILED at cycle {exc.event.cycle}", file=sys.stderr)
        return EXIT_FAIL
    valid = {k: sum(tok.marker.initialized for tok in trace) for k, trace in out.sink_trace.items()}
    print(f"final test passed: {out.cycles_run} cycles, no inequal latencies")
    for k, count in valid.items():
        print(f"  sink {k}: {count} valid results")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (AnalysisError, OracleMismatch) as exc:
        print(f"latbal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ReportError, NetlistError, InvalidNetlist, WindowExceeded, BadIdentifier,
            BadTypeName, SpecError, OSError, ValueError) as exc:
        print(f"latbal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
