"""Named combinational functions for ``Op`` nodes and stimulus generators for
``Source`` nodes.

Netlist files refer to both by name, so anything a netlist uses must be
registered here (or by an imported module) before simulation.
"""

from __future__ import annotations

import random
from typing import Any, Callable, Mapping

__all__ = ["OP_FUNCTIONS", "STIMULI", "register_op", "register_stimulus", "make_stimulus"]

OpFunction = Callable[..., Any]
StimulusFactory = Callable[[Mapping[str, Any], str, int], Callable[[int], Any]]

OP_FUNCTIONS: dict[str, OpFunction] = {}
STIMULI: dict[str, StimulusFactory] = {}


def register_op(name: str):
    def deco(fn: OpFunction) -> OpFunction:
        OP_FUNCTIONS[name] = fn
        return fn
    return deco


def register_stimulus(name: str):
    def deco(fn: StimulusFactory) -> StimulusFactory:
        STIMULI[name] = fn
        return fn
    return deco


def make_stimulus(kind: str, params: Mapping[str, Any], source_id: str, seed: int) -> Callable[[int], Any]:
    try:
        factory = STIMULI[kind]
    except KeyError:
        raise KeyError(f"unknown stimulus {kind!r} for source {source_id!r}") from None
    return factory(params, source_id, seed)


# -- op functions: fn(params, *payloads) -> payload -------------------------


@register_op("first")
def _first(params, *xs):
    return xs[0]


@register_op("add")
def _add(params, *xs):
    return sum(xs)


@register_op("mul")
def _mul(params, *xs):
    out = 1
    for x in xs:
        out *= x
    return out


@register_op("tuple")
def _tuple(params, *xs):
    return tuple(xs)


@register_op("field")
def _field(params, x):
    return x[params["index"]]


@register_op("slice_sum")
def _slice_sum(params, vec):
    return sum(vec[params["lo"]:params["hi"]])


@register_op("slice_argmax")
def _slice_argmax(params, vec):
    """``(index, value)`` of the largest element of ``vec[lo:hi]``; lowest index wins ties."""
    lo, hi = params["lo"], params["hi"]
    best = lo
    for i in range(lo + 1, hi):
        if vec[i] > vec[best]:
            best = i
    return (best, vec[best])


@register_op("argmax")
def _argmax(params, *cands):
    best = cands[0]
    for c in cands[1:]:
        if c[1] > best[1] or (c[1] == best[1] and c[0] < best[0]):
            best = c
    return best


@register_op("select_window")
def _select_window(params, vec, peak):
    """``(n, (vec[n-k], ..., vec[n+k]))`` around the peak index; outside -> 0."""
    k = params["k"]
    n = peak[0]
    return (n, tuple(vec[i] if 0 <= i < len(vec) else 0 for i in range(n - k, n + k + 1)))


@register_op("weight_window")
def _weight_window(params, sel):
    k = params["k"]
    n, window = sel
    return tuple((n - k + j) * v for j, v in enumerate(window))


# -- stimuli: factory(params, source_id, seed) -> (cycle -> payload) --------


@register_stimulus("counter")
def _counter(params, source_id, seed):
    offset = params.get("offset", 0)
    return lambda t: t + offset


@register_stimulus("random")
def _random(params, source_id, seed):
    rng = random.Random(f"{seed}:{source_id}")
    lo, hi = params.get("lo", 0), params.get("hi", 255)
    cache: list[int] = []

    def gen(t: int) -> int:
        while len(cache) <= t:
            cache.append(rng.randint(lo, hi))
        return cache[t]

    return gen
