"""Pipelined design model: a DAG of sources, registered ops, delay lines,
LCEQ (latency checking and equalizing) blocks and sinks.

Every node output may fan out; every input port has exactly one driver.
Netlists are treated as immutable: :func:`apply_delays` returns a copy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Union

import jsonschema

__all__ = [
    "FORMAT_VERSION",
    "InstanceId",
    "child_id",
    "Source",
    "Op",
    "DelayLine",
    "Lceq",
    "Sink",
    "Node",
    "Edge",
    "Netlist",
    "NetlistBuilder",
    "DelayAssignment",
    "UnknownTarget",
    "NetlistError",
    "Violation",
    "CycleDetected",
    "DuplicateLeqId",
    "UnknownNode",
    "BadPort",
    "MissingDriver",
    "MultipleDrivers",
    "BadParameter",
    "validate",
    "apply_delays",
    "topological_order",
    "max_depth",
    "load_netlist",
    "dump_netlist",
    "netlist_from_json",
    "netlist_to_json",
]

FORMAT_VERSION = "latbal-netlist-1"


class NetlistError(ValueError):
    pass


class UnknownTarget(NetlistError):
    """A delay assignment names an LCEQ block or path that does not exist."""


# ---------------------------------------------------------------------------
# Instance IDs


@dataclass(frozen=True, order=True)
class InstanceId:
    """Hierarchical LCEQ identifier, rendered as ``seg:seg:...``.

    The root (no segments) renders as the empty string and is only useful
    as a parent.
    """

    segments: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for seg in self.segments:
            _check_segment(seg)

    def render(self) -> str:
        return ":".join(self.segments)

    __str__ = render

    @classmethod
    def parse(cls, text: str) -> "InstanceId":
        if text == "":
            return cls(())
        return cls(tuple(text.split(":")))

    def child(self, block_name: str, index: int | None = None) -> "InstanceId":
        return child_id(self, block_name, index)


def _check_segment(seg: str) -> None:
    if not seg:
        raise NetlistError("empty instance-id segment")
    # ':' separates segments; whitespace separates report fields
    if ":" in seg or any(c.isspace() for c in seg):
        raise NetlistError(f"invalid character in instance-id segment {seg!r}")


def child_id(parent: InstanceId | str, block_name: str, index: int | None = None) -> InstanceId:
    if isinstance(parent, str):
        parent = InstanceId.parse(parent)
    if not block_name:
        raise NetlistError("block name must be non-empty")
    seg = block_name if index is None else f"{block_name}{index:d}"
    return InstanceId(parent.segments + (seg,))


# ---------------------------------------------------------------------------
# Nodes and edges


@dataclass(frozen=True)
class Source:
    id: str
    stimulus: str = "counter"
    params: Mapping[str, Any] = field(default_factory=dict)

    n_inputs = property(lambda self: 0)
    n_outputs = property(lambda self: 1)


@dataclass(frozen=True)
class Op:
    """Combinational function ``fn`` followed by ``latency`` registers."""

    id: str
    latency: int
    arity: int
    fn: str = "first"
    params: Mapping[str, Any] = field(default_factory=dict)

    n_inputs = property(lambda self: self.arity)
    n_outputs = property(lambda self: 1)


@dataclass(frozen=True)
class DelayLine:
    id: str
    depth: int

    n_inputs = property(lambda self: 1)
    n_outputs = property(lambda self: 1)


@dataclass(frozen=True)
class Lceq:
    """Latency checking and equalizing block.

    Path ``i`` runs from input ``i`` through a delay line of ``delays[i]``
    registers to output ``i``.
    """

    id: str
    n_paths: int
    leq_id: InstanceId
    delays: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not self.delays:
            object.__setattr__(self, "delays", (0,) * max(self.n_paths, 0))

    n_inputs = property(lambda self: self.n_paths)
    n_outputs = property(lambda self: self.n_paths)


@dataclass(frozen=True)
class Sink:
    id: str

    n_inputs = property(lambda self: 1)
    n_outputs = property(lambda self: 0)


Node = Union[Source, Op, DelayLine, Lceq, Sink]


@dataclass(frozen=True, order=True)
class Edge:
    src: str
    src_port: int
    dst: str
    dst_port: int


@dataclass(frozen=True)
class Netlist:
    nodes: Mapping[str, Node]
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", dict(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))

    def lceqs(self) -> list[Lceq]:
        return [n for n in self.nodes.values() if isinstance(n, Lceq)]

    def lceq_by_leq_id(self) -> dict[str, Lceq]:
        return {n.leq_id.render(): n for n in self.lceqs()}

    def drivers(self) -> dict[tuple[str, int], tuple[str, int]]:
        """Map ``(dst, dst_port) -> (src, src_port)``; assumes a valid netlist."""
        return {(e.dst, e.dst_port): (e.src, e.src_port) for e in self.edges}

    def __len__(self) -> int:
        return len(self.nodes)


class NetlistBuilder:
    """Incremental construction helper; ``build()`` does not validate."""

    def __init__(self) -> None:
        self._nodes: dict[str, Node] = {}
        self._edges: list[Edge] = []

    def _add(self, node: Node) -> str:
        if node.id in self._nodes:
            raise NetlistError(f"duplicate node id {node.id!r}")
        self._nodes[node.id] = node
        return node.id

    def source(self, id: str, stimulus: str = "counter", **params: Any) -> str:
        return self._add(Source(id, stimulus, params))

    def op(self, id: str, inputs: Iterable[tuple[str, int] | str], latency: int,
           fn: str = "first", **params: Any) -> str:
        ins = [_port(i) for i in inputs]
        self._add(Op(id, latency, len(ins), fn, params))
        for k, (src, port) in enumerate(ins):
            self.connect(src, port, id, k)
        return id

    def delay(self, id: str, input: tuple[str, int] | str, depth: int) -> str:
        self._add(DelayLine(id, depth))
        self.connect(*_port(input), id, 0)
        return id

    def lceq(self, id: str, inputs: Iterable[tuple[str, int] | str],
             leq_id: InstanceId | str) -> str:
        ins = [_port(i) for i in inputs]
        if isinstance(leq_id, str):
            leq_id = InstanceId.parse(leq_id)
        self._add(Lceq(id, len(ins), leq_id))
        for k, (src, port) in enumerate(ins):
            self.connect(src, port, id, k)
        return id

    def sink(self, id: str, input: tuple[str, int] | str) -> str:
        self._add(Sink(id))
        self.connect(*_port(input), id, 0)
        return id

    def connect(self, src: str, src_port: int, dst: str, dst_port: int) -> None:
        self._edges.append(Edge(src, src_port, dst, dst_port))

    def build(self) -> Netlist:
        return Netlist(self._nodes, tuple(self._edges))


def _port(ref: tuple[str, int] | str) -> tuple[str, int]:
    return (ref, 0) if isinstance(ref, str) else (ref[0], ref[1])


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    def describe(self) -> str:
        return repr(self)


@dataclass(frozen=True)
class CycleDetected(Violation):
    nodes: tuple[str, ...]


@dataclass(frozen=True)
class DuplicateLeqId(Violation):
    leq_id: str


@dataclass(frozen=True)
class UnknownNode(Violation):
    edge: Edge
    node: str


@dataclass(frozen=True)
class BadPort(Violation):
    edge: Edge
    reason: str


@dataclass(frozen=True)
class MissingDriver(Violation):
    node: str
    port: int


@dataclass(frozen=True)
class MultipleDrivers(Violation):
    node: str
    port: int


@dataclass(frozen=True)
class BadParameter(Violation):
    node: str
    reason: str


def _node_violations(node: Node) -> Iterator[Violation]:
    if isinstance(node, Op):
        if node.latency < 0:
            yield BadParameter(node.id, f"negative latency {node.latency}")
        if node.arity < 1:
            yield BadParameter(node.id, f"op arity must be >= 1, got {node.arity}")
    elif isinstance(node, DelayLine):
        if node.depth < 0:
            yield BadParameter(node.id, f"negative depth {node.depth}")
    elif isinstance(node, Lceq):
        if node.n_paths < 2:
            yield BadParameter(node.id, f"LCEQ needs >= 2 paths, got {node.n_paths}")
        if len(node.delays) != node.n_paths:
            yield BadParameter(node.id, "delay count does not match path count")
        if any(d < 0 for d in node.delays):
            yield BadParameter(node.id, "negative path delay")
        if not node.leq_id.segments:
            yield BadParameter(node.id, "empty LEQ_ID")


def validate(n: Netlist) -> list[Violation]:
    """Return every structural problem found; an empty list means simulatable."""
    out: list[Violation] = []
    for key, node in n.nodes.items():
        if key != node.id:
            out.append(BadParameter(key, f"table key differs from node id {node.id!r}"))
        out.extend(_node_violations(node))

    seen_leq: dict[str, int] = {}
    for node in n.lceqs():
        r = node.leq_id.render()
        seen_leq[r] = seen_leq.get(r, 0) + 1
    out.extend(DuplicateLeqId(r) for r, c in seen_leq.items() if c > 1)

    driven: dict[tuple[str, int], int] = {}
    for e in n.edges:
        src, dst = n.nodes.get(e.src), n.nodes.get(e.dst)
        if src is None:
            out.append(UnknownNode(e, e.src))
        if dst is None:
            out.append(UnknownNode(e, e.dst))
        if src is None or dst is None:
            continue
        if not 0 <= e.src_port < src.n_outputs:
            out.append(BadPort(e, f"{e.src} has no output port {e.src_port}"))
        if not 0 <= e.dst_port < dst.n_inputs:
            out.append(BadPort(e, f"{e.dst} has no input port {e.dst_port}"))
            continue
        driven[(e.dst, e.dst_port)] = driven.get((e.dst, e.dst_port), 0) + 1

    for node in n.nodes.values():
        for p in range(max(node.n_inputs, 0)):
            c = driven.get((node.id, p), 0)
            if c == 0:
                out.append(MissingDriver(node.id, p))
            elif c > 1:
                out.append(MultipleDrivers(node.id, p))

    _, cyclic = _kahn(n)
    if cyclic:
        out.append(CycleDetected(tuple(sorted(cyclic))))
    return out


def _kahn(n: Netlist) -> tuple[list[str], set[str]]:
    indeg = {k: 0 for k in n.nodes}
    succ: dict[str, list[str]] = {k: [] for k in n.nodes}
    for e in n.edges:
        if e.src in n.nodes and e.dst in n.nodes:
            indeg[e.dst] += 1
            succ[e.src].append(e.dst)
    ready = [k for k in n.nodes if indeg[k] == 0]
    order: list[str] = []
    while ready:
        k = ready.pop(0)
        order.append(k)
        for s in succ[k]:
            indeg[s] -= 1
            if indeg[s] == 0:
                ready.append(s)
    return order, set(n.nodes) - set(order)


def topological_order(n: Netlist) -> list[str]:
    order, cyclic = _kahn(n)
    if cyclic:
        raise NetlistError(f"netlist has a cycle through {sorted(cyclic)}")
    return order


def max_depth(n: Netlist) -> int:
    """Longest register count from any source to any node output.

    Counts op latencies, delay lines and configured LCEQ path delays; used to
    size the marker window for long (wrapping) simulations.
    """
    drivers = n.drivers()
    depth: dict[tuple[str, int], int] = {}
    best = 0
    for k in topological_order(n):
        node = n.nodes[k]
        ins = [depth[drivers[(k, p)]] for p in range(node.n_inputs)]
        if isinstance(node, Source):
            outs = [0]
        elif isinstance(node, Op):
            outs = [max(ins) + node.latency]
        elif isinstance(node, DelayLine):
            outs = [ins[0] + node.depth]
        elif isinstance(node, Lceq):
            outs = [max(i + d for i, d in zip(ins, node.delays))] * node.n_paths
        else:
            outs = []
        for p, v in enumerate(outs):
            depth[(k, p)] = v
        best = max([best, *outs])
    return best


# ---------------------------------------------------------------------------
# Delay assignments


class DelayAssignment:
    """``(leq_id, path) -> delay`` in clock cycles; absent entries mean 0."""

    def __init__(self, entries: Mapping[tuple[str, int], int] | None = None) -> None:
        self._entries: dict[tuple[str, int], int] = {}
        for (leq, path), d in (entries or {}).items():
            leq = str(leq)
            if path < 0 or d < 0:
                raise ValueError(f"negative path or delay in entry {(leq, path)}: {d}")
            self._entries[(leq, int(path))] = int(d)

    @classmethod
    def from_blocks(cls, blocks: Mapping[str, Iterable[int]]) -> "DelayAssignment":
        return cls({(leq, i): d for leq, ds in blocks.items() for i, d in enumerate(ds)})

    @classmethod
    def zeros(cls, n: Netlist) -> "DelayAssignment":
        return cls({(node.leq_id.render(), i): 0 for node in n.lceqs() for i in range(node.n_paths)})

    @classmethod
    def of_netlist(cls, n: Netlist) -> "DelayAssignment":
        """The delays currently configured in ``n``'s LCEQ blocks."""
        return cls({(node.leq_id.render(), i): d
                    for node in n.lceqs() for i, d in enumerate(node.delays)})

    def get(self, leq_id: str, path: int) -> int:
        return self._entries.get((leq_id, path), 0)

    def items(self):
        return sorted(self._entries.items())

    def keys(self):
        return self._entries.keys()

    def blocks(self) -> dict[str, list[int]]:
        """Per-block delay lists, sorted by LEQ_ID; gaps are filled with 0."""
        out: dict[str, list[int]] = {}
        for (leq, path), d in sorted(self._entries.items()):
            ds = out.setdefault(leq, [])
            ds.extend([0] * (path + 1 - len(ds)))
            ds[path] = d
        return out

    def __add__(self, other: "DelayAssignment") -> "DelayAssignment":
        keys = set(self._entries) | set(other._entries)
        return DelayAssignment({k: self._entries.get(k, 0) + other._entries.get(k, 0) for k in keys})

    def is_zero(self) -> bool:
        return all(d == 0 for d in self._entries.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DelayAssignment):
            return NotImplemented
        # absent and explicit-zero entries are equivalent
        keys = set(self._entries) | set(other._entries)
        return all(self._entries.get(k, 0) == other._entries.get(k, 0) for k in keys)

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"DelayAssignment({self.blocks()!r})"


def apply_delays(n: Netlist, d: DelayAssignment) -> Netlist:
    """Return ``n`` with every LCEQ path delay set from ``d`` (absent -> 0)."""
    by_id = n.lceq_by_leq_id()
    for leq, path in d.keys():
        node = by_id.get(leq)
        if node is None:
            raise UnknownTarget(f"no LCEQ block with LEQ_ID {leq!r}")
        if not 0 <= path < node.n_paths:
            raise UnknownTarget(f"LCEQ {leq!r} has no path {path}")
    nodes = {}
    for k, node in n.nodes.items():
        if isinstance(node, Lceq):
            leq = node.leq_id.render()
            node = replace(node, delays=tuple(d.get(leq, i) for i in range(node.n_paths)))
        nodes[k] = node
    return Netlist(nodes, n.edges)


# ---------------------------------------------------------------------------
# JSON netlist format

NETLIST_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["version", "nodes", "edges"],
    "properties": {
        "version": {"const": FORMAT_VERSION},
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "kind"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "kind": {"enum": ["source", "op", "delay", "lceq", "sink"]},
                    "stimulus": {"type": "string"},
                    "params": {"type": "object"},
                    "latency": {"type": "integer", "minimum": 0},
                    "arity": {"type": "integer", "minimum": 1},
                    "fn": {"type": "string"},
                    "depth": {"type": "integer", "minimum": 0},
                    "paths": {"type": "integer", "minimum": 2},
                    "leq_id": {"type": "string", "minLength": 1},
                    "delays": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                },
                "allOf": [
                    {"if": {"properties": {"kind": {"const": "op"}}},
                     "then": {"required": ["latency", "arity", "fn"]}},
                    {"if": {"properties": {"kind": {"const": "delay"}}},
                     "then": {"required": ["depth"]}},
                    {"if": {"properties": {"kind": {"const": "lceq"}}},
                     "then": {"required": ["paths", "leq_id"]}},
                ],
            },
        },
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["from", "from_port", "to", "to_port"],
                "properties": {
                    "from": {"type": "string"},
                    "from_port": {"type": "integer", "minimum": 0},
                    "to": {"type": "string"},
                    "to_port": {"type": "integer", "minimum": 0},
                },
            },
        },
    },
}


def _node_to_json(node: Node) -> dict[str, Any]:
    if isinstance(node, Source):
        return {"id": node.id, "kind": "source", "stimulus": node.stimulus, "params": dict(node.params)}
    if isinstance(node, Op):
        return {"id": node.id, "kind": "op", "latency": node.latency, "arity": node.arity,
                "fn": node.fn, "params": dict(node.params)}
    if isinstance(node, DelayLine):
        return {"id": node.id, "kind": "delay", "depth": node.depth}
    if isinstance(node, Lceq):
        return {"id": node.id, "kind": "lceq", "paths": node.n_paths,
                "leq_id": node.leq_id.render(), "delays": list(node.delays)}
    return {"id": node.id, "kind": "sink"}


def _node_from_json(obj: Mapping[str, Any]) -> Node:
    kind = obj["kind"]
    if kind == "source":
        return Source(obj["id"], obj.get("stimulus", "counter"), dict(obj.get("params", {})))
    if kind == "op":
        return Op(obj["id"], obj["latency"], obj["arity"], obj["fn"], dict(obj.get("params", {})))
    if kind == "delay":
        return DelayLine(obj["id"], obj["depth"])
    if kind == "lceq":
        return Lceq(obj["id"], obj["paths"], InstanceId.parse(obj["leq_id"]),
                    tuple(obj.get("delays", ())))
    return Sink(obj["id"])


def netlist_to_json(n: Netlist) -> dict[str, Any]:
    return {
        "version": FORMAT_VERSION,
        "nodes": [_node_to_json(node) for node in n.nodes.values()],
        "edges": [{"from": e.src, "from_port": e.src_port, "to": e.dst, "to_port": e.dst_port}
                  for e in n.edges],
    }


def netlist_from_json(obj: Any) -> Netlist:
    try:
        jsonschema.validate(obj, NETLIST_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise NetlistError(f"bad netlist document: {exc.message}") from None
    nodes: dict[str, Node] = {}
    for item in obj["nodes"]:
        node = _node_from_json(item)
        if node.id in nodes:
            raise NetlistError(f"duplicate node id {node.id!r}")
        nodes[node.id] = node
    edges = tuple(Edge(e["from"], e["from_port"], e["to"], e["to_port"]) for e in obj["edges"])
    return Netlist(nodes, edges)


def load_netlist(path: str | Path) -> Netlist:
    with open(path, encoding="utf-8") as f:
        return netlist_from_json(json.load(f))


def dump_netlist(n: Netlist, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(netlist_to_json(n), f, indent=1)
        f.write("\n")
