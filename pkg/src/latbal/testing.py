"""Random netlist generation for property tests."""

from __future__ import annotations

import random

from .netlist import InstanceId, Netlist, NetlistBuilder, child_id

__all__ = ["random_netlist", "random_leq_id"]

_CONTAINERS = ("TOP", "CORE", "FILT", "ACC", "CMP")


def random_leq_id(rng: random.Random, serial: int, max_depth: int = 3) -> InstanceId:
    """``depth``-segment ID whose last segment ``EQ<serial>`` keeps it unique."""
    ident = InstanceId()
    for _ in range(rng.randint(0, max_depth - 1)):
        index = rng.randint(0, 7) if rng.random() < 0.5 else None
        ident = child_id(ident, rng.choice(_CONTAINERS), index)
    return child_id(ident, "EQ", serial)


def random_netlist(
    rng: random.Random,
    max_nodes: int = 60,
    max_latency: int = 8,
    max_lceq: int = 6,
    max_id_depth: int = 3,
) -> Netlist:
    """A random valid DAG with 1-3 sources, ops, delay lines, LCEQs and sinks.

    Every node draws its inputs from outputs created before it, so the graph
    is acyclic by construction.  At most ``max_nodes`` nodes in total.
    """
    b = NetlistBuilder()
    outputs: list[tuple[str, int]] = []
    used: set[tuple[str, int]] = set()

    n_sources = rng.randint(1, 3)
    n_sinks = rng.randint(1, 4)
    n_body = rng.randint(2, max_nodes - n_sources - n_sinks)
    n_lceq = rng.randint(1, min(max_lceq, n_body))
    kinds = ["lceq"] * n_lceq + ["body"] * (n_body - n_lceq)
    rng.shuffle(kinds)

    for s in range(n_sources):
        sid = b.source(f"src{s}", rng.choice(("counter", "random")))
        outputs.append((sid, 0))

    def pick() -> tuple[str, int]:
        # favour recent outputs so paths get long
        ref = outputs[-1 - min(int(rng.expovariate(0.25)), len(outputs) - 1)]
        used.add(ref)
        return ref

    n_eq = 0
    for j, kind in enumerate(kinds):
        if kind == "lceq":
            ins = [pick() for _ in range(rng.randint(2, 4))]
            eid = b.lceq(f"eq{n_eq}", ins, random_leq_id(rng, n_eq, max_id_depth))
            n_eq += 1
            outputs.extend((eid, p) for p in range(len(ins)))
        elif rng.random() < 0.15:
            outputs.append((b.delay(f"dl{j}", pick(), rng.randint(0, 4)), 0))
        else:
            arity = rng.randint(1, 3)
            fn = "first" if arity == 1 else rng.choice(("add", "first"))
            oid = b.op(f"op{j}", [pick() for _ in range(arity)], rng.randint(0, max_latency), fn)
            outputs.append((oid, 0))

    dangling = [ref for ref in outputs if ref not in used] or outputs[-1:]
    for k in range(min(n_sinks, len(dangling))):
        b.sink(f"sink{k}", dangling[-1 - k])
    return b.build()
