"""Demonstration designs.

``build_ex1`` models the particle-detector hit processor: a comparator tree
finds the channel with the largest charge (``N_max``), a selector extracts
the ``2K+1`` channels around it, and two adder trees compute the charge sum
``S`` and the position-weighted sum ``S_W``.  Two LCEQ blocks align the
paths: ``EQ1`` (raw data vs. ``N_max``) and ``EQ2`` (``N_max``, ``S``, ``S_W``).

``build_fig2`` is the minimal two-branch example: operations of latency 6 and
2 feeding a third operation.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, NamedTuple

from .netlist import InstanceId, Netlist, NetlistBuilder, child_id
from .ops import register_stimulus

__all__ = [
    "Ex1Params",
    "TABLE1_PARAMS",
    "CHARGE_SCALE",
    "HitStimulus",
    "HitResult",
    "tree_depth",
    "build_ex1",
    "build_fig2",
    "deposit",
    "reference_hit",
    "centered_position",
    "random_hit",
    "hit_stream",
]

CHARGE_SCALE = 100


@dataclass(frozen=True)
class Ex1Params:
    n_channels: int = 64
    n_side_chans: int = 3
    ins_in_cmp: int = 3
    ins_in_add: int = 3

    def __post_init__(self) -> None:
        if self.n_side_chans < 1 or self.ins_in_cmp < 2 or self.ins_in_add < 2:
            raise ValueError(f"invalid parameters {self}")
        if 2 * self.n_side_chans + 1 > self.n_channels:
            raise ValueError(f"window of 2*{self.n_side_chans}+1 channels exceeds {self.n_channels}")

    @property
    def window(self) -> int:
        return 2 * self.n_side_chans + 1


# C_N_CHANNELS, C_N_SIDE_CHANS, EX1_NOF_INS_IN_CMP, EX1_NOF_INS_IN_ADD
TABLE1_PARAMS: tuple[Ex1Params, ...] = (
    Ex1Params(64, 3, 3, 3),
    Ex1Params(64, 3, 3, 2),
    Ex1Params(32, 3, 2, 3),
    Ex1Params(32, 3, 2, 2),
    Ex1Params(64, 5, 2, 2),
    Ex1Params(64, 5, 3, 2),
    Ex1Params(64, 5, 3, 3),
)


def tree_depth(n_inputs: int, branching: int) -> int:
    """Levels of a ``branching``-ary reduction tree over ``n_inputs`` leaves."""
    depth = 0
    while n_inputs > 1:
        n_inputs = -(-n_inputs // branching)
        depth += 1
    return depth


def _tree(b: NetlistBuilder, prefix: str, vec: tuple[str, int] | str, width: int,
          branching: int, leaf_fn: str, node_fn: str) -> str:
    # First level reduces slices of the input vector; one register per level.
    level = [
        b.op(f"{prefix}_l1_{j}", [vec], 1, leaf_fn, lo=lo, hi=min(lo + branching, width))
        for j, lo in enumerate(range(0, width, branching))
    ]
    depth = 1
    while len(level) > 1:
        depth += 1
        level = [
            b.op(f"{prefix}_l{depth}_{j}", level[i:i + branching], 1, node_fn)
            for j, i in enumerate(range(0, len(level), branching))
        ]
    return level[0]


def build_ex1(p: Ex1Params = Ex1Params(), parent: InstanceId = InstanceId()) -> Netlist:
    k = p.n_side_chans
    b = NetlistBuilder()
    b.source("adc", "ex1_hits", n_channels=p.n_channels, n_side_chans=k)
    peak = _tree(b, "cmp", "adc", p.n_channels, p.ins_in_cmp, "slice_argmax", "argmax")
    eq1 = b.lceq("eq1", ["adc", peak], child_id(parent, "EQ1"))

    sel = b.op("sel", [(eq1, 0), (eq1, 1)], 1, "select_window", k=k)
    nmax = b.op("nmax", [sel], 0, "field", index=0)

    s_win = b.op("s_win", [sel], 0, "field", index=1)
    s_top = _tree(b, "sum", s_win, p.window, p.ins_in_add, "slice_sum", "add")
    s_reg = b.op("s_reg", [s_top], 1, "first")

    sw_mul = b.op("sw_mul", [sel], 1, "weight_window", k=k)
    sw_top = _tree(b, "wsum", sw_mul, p.window, p.ins_in_add, "slice_sum", "add")
    sw_reg = b.op("sw_reg", [sw_top], 1, "first")

    eq2 = b.lceq("eq2", [nmax, s_reg, sw_reg], child_id(parent, "EQ2"))
    b.sink("n_max", (eq2, 0))
    b.sink("s", (eq2, 1))
    b.sink("s_w", (eq2, 2))
    return b.build()


def build_fig2(long_path_first: bool = True, leq_id: InstanceId | str = "EQ") -> Netlist:
    """Operation A (latency 6) and B (latency 2) feed C (latency 1) through an LCEQ.

    With ``long_path_first`` A drives LCEQ path 0; otherwise B does.
    """
    b = NetlistBuilder()
    b.source("in")
    a = b.op("opA", ["in"], 6, "first")
    bb = b.op("opB", ["in"], 2, "first")
    ins = [a, bb] if long_path_first else [bb, a]
    eq = b.lceq("eq", ins, leq_id)
    c = b.op("opC", [(eq, 0), (eq, 1)], 1, "add")
    b.sink("out", c)
    return b.build()


# -- hit model ---------------------------------------------------------------


@dataclass(frozen=True)
class HitStimulus:
    """A particle hit: Gaussian charge cloud of ``width`` channels (sigma)."""

    center: float
    charge: float
    width: float = 0.8


class HitResult(NamedTuple):
    n_max: int
    s: int
    s_w: int
    x: float


def deposit(p: Ex1Params, h: HitStimulus) -> tuple[int, ...]:
    """Scaled integer charge per channel; the cloud is cut at ``K`` channels."""
    k = p.n_side_chans
    if h.charge <= 0 or h.width <= 0:
        raise ValueError(f"hit needs positive charge and width: {h}")
    if not k <= h.center <= p.n_channels - 1 - k:
        raise ValueError(f"hit at {h.center} closer than {k} channels to the detector edge")
    c0 = int(math.floor(h.center + 0.5))
    chans = range(c0 - k, c0 + k + 1)
    w = [math.exp(-((i - h.center) ** 2) / (2 * h.width**2)) for i in chans]
    total = sum(w)
    v = [0] * p.n_channels
    for i, wi in zip(chans, w):
        v[i] = round(CHARGE_SCALE * h.charge * wi / total)
    return tuple(v)


def reference_hit(p: Ex1Params, h: HitStimulus) -> HitResult:
    """``N_max``, ``S``, ``S_W`` and the interpolated ``X = N_max + S_W / S``."""
    v = deposit(p, h)
    k = p.n_side_chans
    n_max = max(range(len(v)), key=lambda i: (v[i], -i))
    if not k <= n_max <= p.n_channels - 1 - k:
        raise ValueError(f"hit maximum at channel {n_max} is too near the edge")
    idx = range(n_max - k, n_max + k + 1)
    s = sum(v[i] for i in idx)
    s_w = sum(i * v[i] for i in idx)
    return HitResult(n_max, s, s_w, n_max + s_w / s)


def centered_position(r: HitResult) -> float:
    """Center of gravity ``S_W / S``.

    ``S_W`` is weighted by absolute channel numbers, so this is already the
    hit position; ``HitResult.x`` adds ``N_max`` once more.
    """
    return r.s_w / r.s


def random_hit(p: Ex1Params, rng: random.Random) -> HitStimulus:
    k = p.n_side_chans
    while True:
        h = HitStimulus(rng.uniform(k, p.n_channels - 1 - k), rng.uniform(50.0, 500.0),
                        rng.uniform(0.4, 1.5))
        try:
            reference_hit(p, h)
        except ValueError:
            continue
        return h


def hit_stream(p: Ex1Params, seed: int, source_id: str = "adc") -> Callable[[int], HitStimulus]:
    """Deterministic ``cycle -> hit`` sequence; cycles must be requested in order or revisited."""
    rng = random.Random(f"{seed}:{source_id}")
    hits: list[HitStimulus] = []

    def at(t: int) -> HitStimulus:
        while len(hits) <= t:
            hits.append(random_hit(p, rng))
        return hits[t]

    return at


@register_stimulus("ex1_hits")
def _ex1_hits(params, source_id, seed):
    p = Ex1Params(params["n_channels"], params["n_side_chans"], 2, 2)
    hits = hit_stream(p, seed, source_id)
    return lambda t: deposit(p, hits(t))
