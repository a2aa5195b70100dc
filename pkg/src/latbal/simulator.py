"""Cycle-accurate simulation of a netlist carrying ``(payload, marker)`` tokens.

All nodes are evaluated once per clock cycle in topological order.  An op
with latency ``L`` presents at cycle ``t`` the result computed from its inputs
at ``t - L``; registers power up holding an uninitialized token (payload
``None``).  Sources stamp the data they emit at cycle ``t`` with marker ``t``
(modulo the window).

Only LCEQ blocks check markers.  In analysis mode they report post-delay
markers every cycle and forward the oldest marker on all outputs; in final
test mode the first cycle with unequal post-delay markers aborts the run.
"""

from __future__ import annotations

import enum
import io
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any, Callable, Mapping, NamedTuple

from .marker import DEFAULT_WINDOW, UNINITIALIZED, MarkerWindow, TimeMarker
from .netlist import DelayLine, Lceq, Netlist, Op, Sink, Source, max_depth, topological_order, validate
from .ops import OP_FUNCTIONS, make_stimulus
from .report import ReportWriter

__all__ = [
    "Token",
    "SimMode",
    "InequalityEvent",
    "SimOutcome",
    "SimulationError",
    "InvalidNetlist",
    "WindowExceeded",
    "FinalTestFailed",
    "simulate",
]


class Token(NamedTuple):
    payload: Any
    marker: TimeMarker


INIT_TOKEN = Token(None, UNINITIALIZED)


class SimMode(enum.Enum):
    ANALYSIS = "analysis"
    FINAL_TEST = "final"


@dataclass(frozen=True)
class InequalityEvent:
    leq_id: str
    cycle: int
    markers: tuple[TimeMarker, ...]

    def message(self) -> str:
        outs = ", ".join(f"out{i}={m.render()}" for i, m in enumerate(self.markers))
        return f"{self.leq_id} inequal latencies: {outs}"


@dataclass
class SimOutcome:
    cycles_run: int
    inequality_events: list[InequalityEvent] = field(default_factory=list)
    sink_trace: dict[str, list[Token]] = field(default_factory=dict)
    report: str | None = None


class SimulationError(Exception):
    pass


class InvalidNetlist(SimulationError):
    def __init__(self, violations) -> None:
        self.violations = list(violations)
        super().__init__("netlist is not simulatable: " + "; ".join(map(repr, self.violations)))


class WindowExceeded(SimulationError):
    pass


class FinalTestFailed(SimulationError):
    def __init__(self, event: InequalityEvent, outcome: SimOutcome) -> None:
        super().__init__(event.message())
        self.event = event
        self.outcome = outcome


class _Abort(Exception):
    def __init__(self, event: InequalityEvent) -> None:
        self.event = event


def simulate(
    n: Netlist,
    mode: SimMode,
    cycles: int,
    stimulus: Mapping[str, Callable[[int], Any]] | None = None,
    *,
    seed: int = 0,
    window: MarkerWindow = DEFAULT_WINDOW,
    report_to: IO[str] | str | Path | None = None,
    allow_wrap: bool = False,
) -> SimOutcome:
    """Run ``cycles`` clock cycles of ``n``.

    ``stimulus`` maps source ids to ``cycle -> payload`` callables; sources not
    listed use the generator named in their node, seeded with ``seed``.

    By default ``cycles`` must stay below half the marker window so no marker
    ever wraps.  With ``allow_wrap`` markers may wrap freely; only the deepest
    pipeline path must then fit in half the window.

    In analysis mode the report goes to ``report_to`` (a path or text stream);
    when that is ``None`` it is kept in memory as ``SimOutcome.report``.
    """
    if cycles <= 0:
        raise ValueError("cycles must be positive")
    violations = validate(n)
    if violations:
        raise InvalidNetlist(violations)
    if allow_wrap:
        depth = max_depth(n)
        if depth >= window.half:
            raise WindowExceeded(f"pipeline depth {depth} needs a marker window larger than {2 * depth}")
    elif cycles >= window.half:
        raise WindowExceeded(f"{cycles} cycles do not fit in half the marker window ({window.half})")

    analysis = mode is SimMode.ANALYSIS
    outcome = SimOutcome(cycles_run=0)

    if not analysis:
        return _run(n, analysis, cycles, stimulus, seed, window, None, outcome)
    if report_to is None:
        buf = io.StringIO()
        _run(n, analysis, cycles, stimulus, seed, window, ReportWriter(buf), outcome)
        outcome.report = buf.getvalue()
        return outcome
    if isinstance(report_to, (str, Path)):
        with open(report_to, "w", encoding="ascii", newline="\n") as f:
            return _run(n, analysis, cycles, stimulus, seed, window, ReportWriter(f), outcome)
    return _run(n, analysis, cycles, stimulus, seed, window, ReportWriter(report_to), outcome)


def _run(n, analysis, cycles, stimulus, seed, window, writer, outcome) -> SimOutcome:
    steps = _compile(n, analysis, stimulus or {}, seed, window, writer, outcome)
    t = 0
    try:
        for t in range(cycles):
            for step in steps:
                step(t)
    except _Abort as abort:
        outcome.cycles_run = t + 1
        outcome.inequality_events.append(abort.event)
        raise FinalTestFailed(abort.event, outcome) from None
    outcome.cycles_run = cycles
    return outcome


def _compile(n: Netlist, analysis: bool, stimulus, seed: int, window: MarkerWindow,
             writer: ReportWriter | None, outcome: SimOutcome) -> list[Callable[[int], None]]:
    order = topological_order(n)
    slot_of: dict[tuple[str, int], int] = {}
    for k in order:
        for p in range(n.nodes[k].n_outputs):
            slot_of[(k, p)] = len(slot_of)
    slots: list[Token] = [INIT_TOKEN] * len(slot_of)
    drivers = n.drivers()

    def inputs_of(node) -> list[int]:
        return [slot_of[drivers[(node.id, p)]] for p in range(node.n_inputs)]

    steps: list[Callable[[int], None]] = []
    for k in order:
        node = n.nodes[k]
        if isinstance(node, Source):
            gen = stimulus.get(k) or make_stimulus(node.stimulus, node.params, k, seed)
            steps.append(_source_step(slots, slot_of[(k, 0)], gen, window))
        elif isinstance(node, Op):
            fn = OP_FUNCTIONS.get(node.fn)
            if fn is None:
                raise SimulationError(f"op {k!r} uses unknown function {node.fn!r}")
            steps.append(_op_step(slots, inputs_of(node), slot_of[(k, 0)], fn, node.params,
                                  node.latency, window))
        elif isinstance(node, DelayLine):
            steps.append(_delay_step(slots, inputs_of(node)[0], slot_of[(k, 0)], node.depth))
        elif isinstance(node, Lceq):
            outs = [slot_of[(k, p)] for p in range(node.n_paths)]
            steps.append(_lceq_step(slots, inputs_of(node), outs, node, analysis, window, writer, outcome))
        elif isinstance(node, Sink):
            trace: list[Token] = []
            outcome.sink_trace[k] = trace
            steps.append(_sink_step(slots, inputs_of(node)[0], trace))
    return steps


def _source_step(slots, out, gen, window):
    state = {"m": window.first()}

    def step(t: int) -> None:
        m = state["m"]
        slots[out] = Token(gen(t), m)
        state["m"] = window.advance(m)

    return step


def _same_marker(toks) -> bool:
    m0 = toks[0].marker
    return all(tok.marker == m0 for tok in toks)


def _op_step(slots, ins, out, fn, params, latency, window):
    pipe = deque([INIT_TOKEN] * latency)

    def step(t: int) -> None:
        toks = [slots[i] for i in ins]
        if _same_marker(toks):
            m = toks[0].marker
        else:
            m = window.min(tok.marker for tok in toks)
        payloads = [tok.payload for tok in toks]
        if any(p is None for p in payloads):
            result = Token(None, m)
        else:
            result = Token(fn(params, *payloads), m)
        if latency:
            pipe.append(result)
            result = pipe.popleft()
        slots[out] = result

    return step


def _delay_step(slots, inp, out, depth):
    pipe = deque([INIT_TOKEN] * depth)

    def step(t: int) -> None:
        tok = slots[inp]
        if depth:
            pipe.append(tok)
            tok = pipe.popleft()
        slots[out] = tok

    return step


def _lceq_step(slots, ins, outs, node: Lceq, analysis, window, writer, outcome):
    leq = node.leq_id.render()
    pipes = [deque([INIT_TOKEN] * d) if d else None for d in node.delays]
    events = outcome.inequality_events

    def step(t: int) -> None:
        post = []
        for i, pipe in zip(ins, pipes):
            tok = slots[i]
            if pipe is not None:
                pipe.append(tok)
                tok = pipe.popleft()
            post.append(tok)
        equal = _same_marker(post)
        if analysis:
            for i, tok in enumerate(post):
                writer.marker(leq, i, tok.marker)
            writer.end(leq)
            if not equal:
                markers = tuple(tok.marker for tok in post)
                events.append(InequalityEvent(leq, t, markers))
                m = window.min(markers)
                post = [Token(tok.payload, m) for tok in post]
        elif not equal:
            raise _Abort(InequalityEvent(leq, t, tuple(tok.marker for tok in post)))
        for o, tok in zip(outs, post):
            slots[o] = tok

    return step


def _sink_step(slots, inp, trace):
    def step(t: int) -> None:
        trace.append(slots[inp])

    return step
