"""Time markers: per-datum clock-period tags with modular wraparound.

A marker is either uninitialized (rendered as ``-1`` in reports) or holds a
value in ``[0, W)``.  All arithmetic that needs the window ``W`` lives on
:class:`MarkerWindow`; the module-level helpers use :data:`DEFAULT_WINDOW`.

Differences are interpreted in the signed half-window: ``diff(a, b)`` is the
unique ``d`` in ``[-W/2, W/2)`` with ``b + d == a (mod W)``.  Callers must keep
every real latency difference below ``W/2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "DEFAULT_WINDOW_SIZE",
    "DEFAULT_WINDOW",
    "UNINITIALIZED",
    "MarkerWindow",
    "TimeMarker",
    "UninitializedMarker",
    "advance",
    "marker_diff",
    "marker_min",
]

DEFAULT_WINDOW_SIZE = 2**16


class UninitializedMarker(ValueError):
    """Arithmetic was attempted on an uninitialized marker."""


@dataclass(frozen=True, slots=True)
class TimeMarker:
    value: int | None = None

    @property
    def initialized(self) -> bool:
        return self.value is not None

    def render(self) -> str:
        return "-1" if self.value is None else str(self.value)

    @classmethod
    def parse(cls, text: str) -> "TimeMarker":
        v = int(text)
        if v == -1:
            return UNINITIALIZED
        if v < 0:
            raise ValueError(f"invalid marker rendering: {text!r}")
        return cls(v)

    def __repr__(self) -> str:
        return "TimeMarker(uninit)" if self.value is None else f"TimeMarker({self.value})"


UNINITIALIZED = TimeMarker()


@dataclass(frozen=True)
class MarkerWindow:
    """Wraparound arithmetic for markers modulo ``size`` (a power of two)."""

    size: int = DEFAULT_WINDOW_SIZE

    def __post_init__(self) -> None:
        if self.size < 2 or self.size & (self.size - 1):
            raise ValueError(f"window size must be a power of two >= 2, got {self.size}")

    @property
    def half(self) -> int:
        return self.size // 2

    def valid(self, value: int) -> TimeMarker:
        if not 0 <= value < self.size:
            raise ValueError(f"marker value {value} outside window [0, {self.size})")
        return TimeMarker(value)

    def first(self) -> TimeMarker:
        return TimeMarker(0)

    def at(self, cycle: int) -> TimeMarker:
        """Marker stamped on data entering at ``cycle``."""
        return TimeMarker(cycle % self.size)

    def advance(self, m: TimeMarker) -> TimeMarker:
        if m.value is None:
            raise UninitializedMarker("cannot advance an uninitialized marker")
        return TimeMarker((m.value + 1) % self.size)

    def value_diff(self, a: int, b: int) -> int:
        return (a - b + self.half) % self.size - self.half

    def diff(self, a: TimeMarker, b: TimeMarker) -> int:
        if a.value is None or b.value is None:
            raise UninitializedMarker("cannot subtract uninitialized markers")
        return self.value_diff(a.value, b.value)

    def oldest_value(self, values: Sequence[int]) -> int:
        pivot = values[0]
        best = pivot
        best_d = 0
        for v in values[1:]:
            d = self.value_diff(v, pivot)
            if d < best_d:
                best, best_d = v, d
        return best

    def min(self, markers: Iterable[TimeMarker]) -> TimeMarker:
        ms = list(markers)
        if not ms:
            raise ValueError("marker_min of an empty sequence")
        values = []
        for m in ms:
            if m.value is None:
                return UNINITIALIZED
            values.append(m.value)
        return TimeMarker(self.oldest_value(values))


DEFAULT_WINDOW = MarkerWindow()


def advance(m: TimeMarker, window: MarkerWindow = DEFAULT_WINDOW) -> TimeMarker:
    return window.advance(m)


def marker_diff(a: TimeMarker, b: TimeMarker, window: MarkerWindow = DEFAULT_WINDOW) -> int:
    return window.diff(a, b)


def marker_min(ms: Iterable[TimeMarker], window: MarkerWindow = DEFAULT_WINDOW) -> TimeMarker:
    return window.min(ms)
