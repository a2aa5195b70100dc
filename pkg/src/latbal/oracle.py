"""Static latency analysis: longest register paths over the netlist DAG.

This is the cross-check for the simulation flow.  Each LCEQ output carries
the largest post-delay latency of its inputs, so the extra delay a path needs
is ``max_j L_j - L_i`` with ``L`` measured after the configured delay lines.
"""

from __future__ import annotations

from graphlib import TopologicalSorter

from .netlist import DelayAssignment, DelayLine, Lceq, Netlist, Op, Sink, Source

__all__ = ["Unreachable", "static_latencies", "static_delays"]


class Unreachable(ValueError):
    def __init__(self, node: str) -> None:
        super().__init__(f"node {node!r} is not driven from any source")
        self.node = node


def _output_latencies(n: Netlist) -> tuple[dict[tuple[str, int], int], dict[tuple[str, int], int]]:
    preds: dict[str, set[str]] = {k: set() for k in n.nodes}
    driver: dict[tuple[str, int], tuple[str, int]] = {}
    for e in n.edges:
        preds[e.dst].add(e.src)
        driver[(e.dst, e.dst_port)] = (e.src, e.src_port)

    out_lat: dict[tuple[str, int], int] = {}
    in_lat: dict[tuple[str, int], int] = {}
    for k in TopologicalSorter(preds).static_order():
        node = n.nodes[k]
        ins = []
        for p in range(node.n_inputs):
            src = driver.get((k, p))
            if src is None or src not in out_lat:
                raise Unreachable(k)
            in_lat[(k, p)] = out_lat[src]
            ins.append(out_lat[src])
        if isinstance(node, Source):
            out_lat[(k, 0)] = 0
        elif isinstance(node, Op):
            if not ins:
                raise Unreachable(k)
            out_lat[(k, 0)] = max(ins) + node.latency
        elif isinstance(node, DelayLine):
            out_lat[(k, 0)] = ins[0] + node.depth
        elif isinstance(node, Lceq):
            aligned = max(l + d for l, d in zip(ins, node.delays))
            for p in range(node.n_paths):
                out_lat[(k, p)] = aligned
        elif not isinstance(node, Sink):
            raise TypeError(f"unknown node kind {node!r}")
    return in_lat, out_lat


def static_latencies(n: Netlist) -> dict[tuple[str, int], int]:
    """Latency (cycles since entering at a source) arriving at every input port."""
    return _output_latencies(n)[0]


def static_delays(n: Netlist) -> DelayAssignment:
    """Extra per-path delays that balance every LCEQ block of ``n``."""
    in_lat = static_latencies(n)
    entries = {}
    for node in n.lceqs():
        post = [in_lat[(node.id, p)] + node.delays[p] for p in range(node.n_paths)]
        top = max(post)
        leq = node.leq_id.render()
        entries.update({(leq, p): top - l for p, l in enumerate(post)})
    return DelayAssignment(entries)
