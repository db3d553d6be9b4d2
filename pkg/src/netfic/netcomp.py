"""Network computation problems, network codes and their verification."""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from typing import Mapping

import networkx as nx
import numpy as np

from .algebra import (
    BlockLayout,
    Concat,
    EnumMode,
    FieldSpec,
    FuncExpr,
    Proj,
    compose,
    evaluate_env,
    iter_batches,
    output_width,
    resolve_mode,
)
from .errors import (
    CycleDetected,
    InvalidProblem,
    MissingDecoder,
    MissingKernel,
    NetficError,
    WidthMismatch,
)
from .report import VerifyReport, WitnessCollector, finish


@dataclass(frozen=True)
class SourceEdge:
    """Tailless edge carrying message ``message`` into ``node``."""

    id: str
    node: str
    message: str
    width: int


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    capacity: int


@dataclass(frozen=True)
class Sink:
    node: str
    demands: tuple[FuncExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "demands", tuple(self.demands))

    @property
    def n_t(self) -> int:
        return len(self.demands)

    @property
    def demand(self) -> FuncExpr:
        """G_t as a single expression of width n_t."""
        return self.demands[0] if len(self.demands) == 1 else Concat(self.demands)


@dataclass(frozen=True)
class NetProblem:
    q: int
    sources: tuple[SourceEdge, ...]
    edges: tuple[Edge, ...]
    sinks: tuple[Sink, ...]

    def __post_init__(self):
        FieldSpec(self.q)
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "sinks", tuple(self.sinks))

    @property
    def message_layout(self) -> BlockLayout:
        return BlockLayout(tuple((s.message, s.width) for s in self.sources))

    @property
    def nodes(self) -> list[str]:
        seen: dict[str, None] = {}
        for s in self.sources:
            seen[s.node] = None
        for e in self.edges:
            seen[e.tail] = None
            seen[e.head] = None
        for t in self.sinks:
            seen[t.node] = None
        return list(seen)

    @property
    def n_k(self) -> int:
        return sum(s.width for s in self.sources)

    @property
    def n_e(self) -> int:
        return sum(e.capacity for e in self.edges)

    def edge(self, edge_id: str) -> Edge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise KeyError(edge_id)

    def sink(self, node: str) -> Sink:
        for t in self.sinks:
            if t.node == node:
                return t
        raise KeyError(node)

    def in_blocks(self, node: str) -> BlockLayout:
        """Payload blocks entering ``node``: messages of its source edges, then network edges.

        Message payloads are named by message, network payloads by edge id.
        """
        blocks = [(s.message, s.width) for s in self.sources if s.node == node]
        blocks += [(e.id, e.capacity) for e in self.edges if e.head == node]
        return BlockLayout(tuple(blocks))

    def kernel_layout(self, edge_id: str) -> BlockLayout:
        return self.in_blocks(self.edge(edge_id).tail)


@dataclass(frozen=True)
class NetCode:
    kernels: Mapping[str, FuncExpr]
    decoders: Mapping[str, FuncExpr]

    def __post_init__(self):
        object.__setattr__(self, "kernels", dict(self.kernels))
        object.__setattr__(self, "decoders", dict(self.decoders))


@dataclass(frozen=True)
class Finding:
    kind: str
    element: str
    message: str = ""

    def __str__(self) -> str:
        text = f"{self.kind}({self.element})"
        return f"{text}: {self.message}" if self.message else text


def validate_problem(p: NetProblem) -> list[Finding]:
    """Structural findings; an empty list means the problem is well formed."""
    findings: list[Finding] = []
    names: dict[str, str] = {}

    def claim(name: str, what: str):
        if name in names:
            findings.append(Finding("DuplicateName", name, f"used as {names[name]} and {what}"))
        else:
            names[name] = what

    for s in p.sources:
        claim(s.id, "source edge")
        claim(s.message, "message")
        if s.width < 1:
            findings.append(Finding("BadWidth", s.message, f"width {s.width} < 1"))
    for e in p.edges:
        claim(e.id, "edge")
        if e.capacity < 1:
            findings.append(Finding("BadCapacity", e.id, f"capacity {e.capacity} < 1"))
    sink_nodes = set()
    for t in p.sinks:
        if t.node in sink_nodes:
            findings.append(Finding("DuplicateSink", t.node))
        sink_nodes.add(t.node)
    for e in p.edges:
        if e.tail in sink_nodes:
            findings.append(Finding("SinkHasOutgoingEdge", e.tail, f"edge {e.id} leaves a sink"))
    try:
        ancestral_order(p)
    except CycleDetected as exc:
        findings.append(Finding("CycleDetected", ",".join(exc.edges)))

    widths = {s.message: s.width for s in p.sources}
    for t in p.sinks:
        if not t.demands:
            findings.append(Finding("EmptyDemand", t.node))
        for i, g in enumerate(t.demands):
            try:
                w = output_width(g, widths, p.q)
            except NetficError as exc:
                findings.append(Finding(type(exc).__name__, _err_element(exc), f"demand {i} of sink {t.node}"))
                continue
            if w != 1:
                findings.append(Finding("WidthMismatch", t.node, f"demand {i} has width {w}, expected 1"))
    return findings


def _err_element(exc: Exception) -> str:
    return getattr(exc, "name", None) or str(exc)


def ensure_valid(p: NetProblem) -> None:
    findings = validate_problem(p)
    if findings:
        raise InvalidProblem(findings)


def ancestral_order(p: NetProblem, reverse_ties: bool = False) -> list[str]:
    """Topological order of the network edges (Kahn; ties by declaration index).

    Source edges are implicitly first and are not listed.
    """
    index = {e.id: i for i, e in enumerate(p.edges)}
    into: dict[str, list[str]] = {}
    for e in p.edges:
        into.setdefault(e.head, []).append(e.id)
    indeg = {e.id: len(into.get(e.tail, ())) for e in p.edges}
    out_of: dict[str, list[str]] = {}
    for e in p.edges:
        for dep in into.get(e.tail, ()):
            out_of.setdefault(dep, []).append(e.id)
    sign = -1 if reverse_ties else 1
    ready = [(sign * index[e], e) for e, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        _, e = heapq.heappop(ready)
        order.append(e)
        for nxt in out_of.get(e, ()):
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(ready, (sign * index[nxt], nxt))
    if len(order) != len(p.edges):
        raise CycleDetected(_cycle_edges(p))
    return order


def _cycle_edges(p: NetProblem) -> list[str]:
    """Edges lying on some directed cycle, in declaration order."""
    g = nx.DiGraph((e.tail, e.head) for e in p.edges)
    component = {}
    for i, nodes in enumerate(nx.strongly_connected_components(g)):
        for n in nodes:
            component[n] = i
    return [e.id for e in p.edges if component[e.tail] == component[e.head]]


def check_code(p: NetProblem, c: NetCode) -> None:
    """Raise unless every edge has a kernel and every sink a decoder of the right widths."""
    for e in p.edges:
        if e.id not in c.kernels:
            raise MissingKernel(e.id)
        w = output_width(c.kernels[e.id], p.in_blocks(e.tail).widths, p.q)
        if w != e.capacity:
            raise WidthMismatch(f"kernel of {e.id} has width {w}, capacity is {e.capacity}")
    for t in p.sinks:
        if t.node not in c.decoders:
            raise MissingDecoder(t.node)
        w = output_width(c.decoders[t.node], p.in_blocks(t.node).widths, p.q)
        if w != t.n_t:
            raise WidthMismatch(f"decoder of {t.node} has width {w}, sink demands {t.n_t}")


def _source_bindings(layout: BlockLayout, globals_: Mapping[str, FuncExpr]) -> dict[str, FuncExpr]:
    return {name: globals_[name] for name in layout.names}


def derive_global_kernels(p: NetProblem, c: NetCode, order: list[str] | None = None) -> dict[str, FuncExpr]:
    """Global kernel of every network edge as an expression over the messages."""
    order = ancestral_order(p) if order is None else order
    F: dict[str, FuncExpr] = {s.message: Proj(s.message) for s in p.sources}
    for eid in order:
        if eid not in c.kernels:
            raise MissingKernel(eid)
        F[eid] = compose(c.kernels[eid], _source_bindings(p.kernel_layout(eid), F))
    return {e.id: F[e.id] for e in p.edges}


def sink_outputs(p: NetProblem, c: NetCode, global_kernels: Mapping[str, FuncExpr] | None = None) -> dict[str, FuncExpr]:
    """D_t composed with the global kernels of In(t), per sink."""
    F = dict(global_kernels or derive_global_kernels(p, c))
    F.update({s.message: Proj(s.message) for s in p.sources})
    out = {}
    for t in p.sinks:
        if t.node not in c.decoders:
            raise MissingDecoder(t.node)
        out[t.node] = compose(c.decoders[t.node], _source_bindings(p.in_blocks(t.node), F))
    return out


def simulate(p: NetProblem, c: NetCode, x: np.ndarray, order: list[str] | None = None) -> dict[str, np.ndarray]:
    """Payload of every edge (and message) for a batch of message realizations."""
    order = ancestral_order(p) if order is None else order
    payload = dict(p.message_layout.split(x))
    n = x.shape[0]
    for eid in order:
        layout = p.kernel_layout(eid)
        payload[eid] = evaluate_env(c.kernels[eid], {k: payload[k] for k in layout.names}, p.q, n)
    return payload


def verify_net_code(p: NetProblem, c: NetCode, mode: EnumMode | None = None) -> VerifyReport:
    """Check D_t(payloads of In(t)) == G_t(x) for every enumerated x and sink."""
    started = time.perf_counter()
    ensure_valid(p)
    check_code(p, c)
    mode = resolve_mode(p.n_k, p.q) if mode is None else mode
    order = ancestral_order(p)
    layout = p.message_layout
    collector = WitnessCollector()
    checked = 0
    for x in iter_batches(layout.total_width, p.q, mode):
        n = x.shape[0]
        payload = simulate(p, c, x, order)
        messages = layout.split(x)
        for t in p.sinks:
            in_layout = p.in_blocks(t.node)
            got = evaluate_env(c.decoders[t.node], {k: payload[k] for k in in_layout.names}, p.q, n)
            expected = evaluate_env(t.demand, messages, p.q, n)
            collector.add(t.node, x, expected, got, np.any(got != expected, axis=1))
        checked += n
    return finish(mode, checked, collector, started, [t.node for t in p.sinks], check="network-code")
