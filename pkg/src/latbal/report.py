"""Marker report file: reader and writer.

Format (one record per line, single-space separated, LF terminated)::

    <LEQ_ID> <input_number> <marker>
    <LEQ_ID> end

Each block writes one marker line per input per clock cycle, then its ``end``
line.  Lines of different blocks may interleave; grouping is per block.
Uninitialized markers are written as ``-1``.
"""

from __future__ import annotations

import re

from dataclasses import dataclass
from typing import IO, Iterable, Iterator, NamedTuple, Union

from .marker import TimeMarker

__all__ = [
    "MarkerLine",
    "EndLine",
    "ReportRecord",
    "ReportGroup",
    "ReportError",
    "ParseError",
    "TruncatedReport",
    "DuplicateInput",
    "MissingInput",
    "ReportWriter",
    "write_record",
    "parse_records",
    "parse_report",
]


@dataclass(frozen=True)
class MarkerLine:
    leq_id: str
    input: int
    marker: int

    def __post_init__(self) -> None:
        if self.input < 0 or self.marker < -1:
            raise ValueError(f"invalid marker line {self}")


@dataclass(frozen=True)
class EndLine:
    leq_id: str


ReportRecord = Union[MarkerLine, EndLine]


class ReportGroup(NamedTuple):
    leq_id: str
    markers: tuple[int, ...]


class ReportError(ValueError):
    pass


class ParseError(ReportError):
    def __init__(self, lineno: int, line: str, reason: str = "malformed line") -> None:
        super().__init__(f"line {lineno}: {reason}: {line!r}")
        self.lineno = lineno
        self.line = line


class TruncatedReport(ReportError):
    def __init__(self, leq_ids: Iterable[str]) -> None:
        self.leq_ids = sorted(leq_ids)
        super().__init__(f"report ends without 'end' line for {', '.join(self.leq_ids)}")


class DuplicateInput(ReportError):
    def __init__(self, lineno: int, leq_id: str, input: int) -> None:
        super().__init__(f"line {lineno}: input {input} of {leq_id} reported twice in one cycle")
        self.lineno, self.leq_id, self.input = lineno, leq_id, input


class MissingInput(ReportError):
    def __init__(self, lineno: int, leq_id: str, got: Iterable[int]) -> None:
        got = sorted(got)
        super().__init__(f"line {lineno}: {leq_id} cycle group has inputs {got}, not 0..n-1")
        self.lineno, self.leq_id, self.got = lineno, leq_id, got


def _check_leq_id(leq_id: str) -> None:
    if not leq_id or any(c.isspace() for c in leq_id):
        raise ValueError(f"LEQ_ID must be non-empty without whitespace: {leq_id!r}")


def write_record(r: ReportRecord) -> str:
    _check_leq_id(r.leq_id)
    if isinstance(r, EndLine):
        return f"{r.leq_id} end\n"
    return f"{r.leq_id} {r.input:d} {r.marker:d}\n"


class ReportWriter:
    """Streams records to a text file opened by the caller."""

    def __init__(self, stream: IO[str]) -> None:
        self._stream = stream

    def marker(self, leq_id: str, input: int, m: TimeMarker) -> None:
        self._stream.write(f"{leq_id} {input:d} {m.render()}\n")

    def end(self, leq_id: str) -> None:
        self._stream.write(f"{leq_id} end\n")

    def write(self, r: ReportRecord) -> None:
        self._stream.write(write_record(r))


_MARKER_FIELD = re.compile(r"-1|[0-9]+")


def _parse_line(lineno: int, raw: str) -> ReportRecord:
    line = raw[:-1] if raw.endswith("\n") else raw
    fields = line.split(" ")
    if any(not f for f in fields):
        raise ParseError(lineno, raw)
    if len(fields) == 2 and fields[1] == "end":
        return EndLine(fields[0])
    if len(fields) != 3:
        raise ParseError(lineno, raw)
    try:
        inp, mrk = int(fields[1]), int(fields[2])
    except ValueError:
        raise ParseError(lineno, raw) from None
    if not fields[1].isdigit() or not _MARKER_FIELD.fullmatch(fields[2]) or mrk < -1:
        raise ParseError(lineno, raw, "field out of range")
    return MarkerLine(fields[0], inp, mrk)


def parse_records(lines: Iterable[str]) -> Iterator[tuple[int, ReportRecord]]:
    """Yield ``(line_number, record)`` pairs; line numbers start at 1."""
    for lineno, raw in enumerate(lines, 1):
        yield lineno, _parse_line(lineno, raw)


def parse_report(lines: Iterable[str]) -> Iterator[ReportGroup]:
    """Group marker lines per block, yielding each group at its ``end`` line.

    Memory use is bounded by the number of blocks times their path counts.
    """
    pending: dict[str, dict[int, int]] = {}
    for lineno, rec in parse_records(lines):
        if isinstance(rec, MarkerLine):
            group = pending.setdefault(rec.leq_id, {})
            if rec.input in group:
                raise DuplicateInput(lineno, rec.leq_id, rec.input)
            group[rec.input] = rec.marker
            continue
        group = pending.pop(rec.leq_id, {})
        if not group or sorted(group) != list(range(len(group))):
            raise MissingInput(lineno, rec.leq_id, group)
        yield ReportGroup(rec.leq_id, tuple(group[i] for i in range(len(group))))
    if pending:
        raise TruncatedReport(pending)
