"""Conversions between network computation and functional index coding.

``nc_to_fic`` turns a network into an index-coding instance with one client
per edge, one per sink and one client holding every source message; a network
code of the network becomes an index code of length N_E and back.

``fic_to_nc`` builds the bottleneck network: sources s_k, sinks t_m, and a
single coding edge v_B -> v_B' of capacity l whose payload plays the role of
the broadcast codeword.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    Concat,
    Const,
    Exhaustive,
    FuncExpr,
    Proj,
    Select,
    SymbolVec,
    compose,
    default_cap,
    evaluate_env,
    index_to_vectors,
    iter_batches,
    simplify,
)
from .errors import LengthMismatch, MissingDecoder
from .fic import CODEWORD, Client, FicCode, FicProblem, _groups, _pack
from .fic import check_code as check_fic_code
from .fic import ensure_valid as ensure_valid_fic
from .netcomp import (
    Edge,
    NetCode,
    NetProblem,
    Sink,
    SourceEdge,
    check_code,
    derive_global_kernels,
    ensure_valid,
)
from .report import VerifyReport, WitnessCollector, finish

ALL_CLIENT = "R_all"


def _symbols(name: str, width: int) -> list[FuncExpr]:
    """Width-1 projections of every symbol of a block."""
    if width == 1:
        return [Proj(name)]
    return [Select(Proj(name), (i,)) for i in range(width)]


def _tidy_net(c: NetCode, q: int) -> NetCode:
    return NetCode({k: simplify(v, q) for k, v in c.kernels.items()}, {k: simplify(v, q) for k, v in c.decoders.items()})


def _tidy_fic(c: FicCode, q: int) -> FicCode:
    return FicCode(c.length, simplify(c.encoder, q), {k: simplify(v, q) for k, v in c.decoders.items()})


def _check_unique(names, what: str):
    seen = set()
    for n in names:
        if n in seen:
            raise ValueError(f"generated {what} name {n!r} collides with an existing name")
        seen.add(n)


# ---------------------------------------------------------------------------
# Network computation -> functional index coding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NcToFicMap:
    source: NetProblem
    edge_order: tuple[str, ...]
    x_blocks: dict[str, str]
    y_blocks: dict[str, str]
    edge_clients: dict[str, str]
    sink_clients: dict[str, str]
    all_client: str = ALL_CLIENT

    def codeword_offsets(self) -> dict[str, tuple[int, int]]:
        """Position of M_e inside the length-N_E codeword."""
        out, pos = {}, 0
        for eid in self.edge_order:
            cap = self.source.edge(eid).capacity
            out[eid] = (pos, pos + cap)
            pos += cap
        return out

    def hat(self, payload_name: str) -> str:
        """Index-coding block for a network payload name (message or edge id)."""
        if payload_name in self.x_blocks:
            return self.x_blocks[payload_name]
        return self.y_blocks[payload_name]


def nc_to_fic(p: NetProblem) -> tuple[FicProblem, NcToFicMap]:
    ensure_valid(p)
    x_blocks = {s.message: s.message for s in p.sources}
    y_blocks = {e.id: f"Y_{e.id}" for e in p.edges}
    edge_clients = {e.id: f"R_{e.id}" for e in p.edges}
    sink_clients = {t.node: f"R_{t.node}" for t in p.sinks}
    _check_unique(list(x_blocks.values()) + list(y_blocks.values()) + [CODEWORD], "block")
    _check_unique(list(edge_clients.values()) + list(sink_clients.values()) + [ALL_CLIENT], "client")
    mapping = NcToFicMap(p, tuple(e.id for e in p.edges), x_blocks, y_blocks, edge_clients, sink_clients)

    messages = [(x_blocks[s.message], s.width) for s in p.sources]
    messages += [(y_blocks[e.id], e.capacity) for e in p.edges]
    clients = []
    for e in p.edges:
        has = [mapping.hat(n) for n in p.in_blocks(e.tail).names]
        clients.append(Client(edge_clients[e.id], has, _symbols(y_blocks[e.id], e.capacity)))
    for t in p.sinks:
        has = [mapping.hat(n) for n in p.in_blocks(t.node).names]
        clients.append(Client(sink_clients[t.node], has, t.demands))
    wants = [w for e in p.edges for w in _symbols(y_blocks[e.id], e.capacity)]
    clients.append(Client(ALL_CLIENT, [x_blocks[s.message] for s in p.sources], wants))
    return FicProblem(p.q, tuple(messages), tuple(clients)), mapping


def nc_code_to_fic_code(p: NetProblem, c: NetCode, mapping: NcToFicMap) -> FicCode:
    """Index code of length N_E: M_e = Y_e + F_e(X), with symbolic decoders."""
    check_code(p, c)
    F = derive_global_kernels(p, c)
    offsets = mapping.codeword_offsets()
    codeword = Proj(CODEWORD)

    def part(eid: str) -> FuncExpr:
        a, b = offsets[eid]
        return Select(codeword, tuple(range(a, b)))

    def recovered(eid: str) -> FuncExpr:
        # F_e'(X) = M_e' - Y_e'
        return part(eid) - Proj(mapping.y_blocks[eid])

    def inputs(node: str) -> dict[str, FuncExpr]:
        out = {}
        for name in p.in_blocks(node).names:
            out[name] = recovered(name) if name in mapping.y_blocks else Proj(mapping.x_blocks[name])
        return out

    encoder = Concat(tuple(Proj(mapping.y_blocks[e]) + F[e] for e in mapping.edge_order))
    decoders: dict[str, FuncExpr] = {}
    for e in p.edges:
        local = compose(c.kernels[e.id], inputs(e.tail))
        decoders[mapping.edge_clients[e.id]] = part(e.id) - local
    for t in p.sinks:
        decoders[mapping.sink_clients[t.node]] = compose(c.decoders[t.node], inputs(t.node))
    decoders[mapping.all_client] = Concat(tuple(part(e) - F[e] for e in mapping.edge_order))
    return _tidy_fic(FicCode(p.n_e, encoder, decoders), p.q)


def fic_code_to_nc_code(
    p_fic: FicProblem,
    c: FicCode,
    mapping: NcToFicMap,
    m: SymbolVec | tuple[int, ...] | None = None,
) -> NetCode:
    """Restrict the R_e / R_t decoders at the fixed codeword ``m`` (all-zero by default)."""
    p = mapping.source
    if c.length != p.n_e:
        raise LengthMismatch(f"code length {c.length} differs from N_E = {p.n_e}")
    m = tuple(m) if m is not None else (0,) * p.n_e
    if len(m) != p.n_e:
        raise LengthMismatch(f"restriction point has length {len(m)}, expected {p.n_e}")
    point = Const(tuple(m))

    def bindings(node: str) -> dict[str, FuncExpr]:
        out: dict[str, FuncExpr] = {CODEWORD: point}
        for name in p.in_blocks(node).names:
            out[mapping.hat(name)] = Proj(name)
        return out

    kernels = {}
    for e in p.edges:
        cid = mapping.edge_clients[e.id]
        if cid not in c.decoders:
            raise MissingDecoder(cid)
        kernels[e.id] = compose(c.decoders[cid], bindings(e.tail))
    decoders = {}
    for t in p.sinks:
        cid = mapping.sink_clients[t.node]
        if cid not in c.decoders:
            raise MissingDecoder(cid)
        decoders[t.node] = compose(c.decoders[cid], bindings(t.node))
    return _tidy_net(NetCode(kernels, decoders), p.q)


def check_bijection(p_fic: FicProblem, c: FicCode, mapping: NcToFicMap, cap: int | None = None) -> VerifyReport:
    """For every fixed X-part, the map Y -> M(X, Y) must be injective."""
    started = time.perf_counter()
    cap = default_cap() if cap is None else cap
    mode = Exhaustive(cap)
    n_x = sum(s.width for s in mapping.source.sources)
    keys, total = [], 0
    for z in iter_batches(p_fic.n_k, p_fic.q, mode):
        env = p_fic.messages.split(z)
        m = evaluate_env(c.encoder, env, p_fic.q, len(z))
        keys.append(np.concatenate([_pack(z[:, :n_x], p_fic.q), _pack(m, p_fic.q)], axis=1))
        total += len(z)
    key = np.concatenate(keys)
    index = np.arange(total, dtype=np.int64)[:, None]
    order, new_group, sub_change = _groups(key, index)
    collector = WitnessCollector()
    if sub_change.any():
        first_dup = np.flatnonzero(sub_change)[: collector.limit]
        a = order[first_dup - 1]
        b = order[first_dup]
        za = index_to_vectors(a, p_fic.n_k, p_fic.q)
        zb = index_to_vectors(b, p_fic.n_k, p_fic.q)
        cw = evaluate_env(c.encoder, p_fic.messages.split(za), p_fic.q, len(a))
        collector.add("encoder", za, cw, cw, np.ones(len(a), dtype=bool), partner=zb)
    return finish(mode, total, collector, started, check="bijection")


# ---------------------------------------------------------------------------
# Functional index coding -> network computation (bottleneck gadget)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FicToNcMap:
    source: FicProblem
    length: int
    source_nodes: dict[str, str]
    sink_nodes: dict[str, str]
    v_b: str = "v_B"
    v_b_out: str = "v_B'"
    source_edges: dict[str, str] = field(default_factory=dict)
    e1: dict[tuple[str, str], str] = field(default_factory=dict)
    e2: dict[str, str] = field(default_factory=dict)
    e3: dict[str, str] = field(default_factory=dict)
    e_b: str = "e_B"


def fic_to_nc(p: FicProblem, length: int) -> tuple[NetProblem, FicToNcMap]:
    ensure_valid_fic(p)
    if length < 1:
        raise ValueError("bottleneck length must be positive")
    msgs = p.messages.names
    mapping = FicToNcMap(
        source=p,
        length=length,
        source_nodes={k: f"s_{k}" for k in msgs},
        sink_nodes={c.id: f"t_{c.id}" for c in p.clients},
        source_edges={k: f"src_{k}" for k in msgs},
        e1={(k, c.id): f"e1_{k}_{c.id}" for c in p.clients for k in c.has},
        e2={k: f"e2_{k}" for k in msgs},
        e3={c.id: f"e3_{c.id}" for c in p.clients},
    )
    _check_unique(
        list(msgs) + list(mapping.source_edges.values()) + list(mapping.e1.values()) + list(mapping.e2.values())
        + list(mapping.e3.values()) + [mapping.e_b],
        "edge",
    )
    _check_unique(list(mapping.source_nodes.values()) + list(mapping.sink_nodes.values()) + [mapping.v_b, mapping.v_b_out], "node")
    widths = p.messages.widths
    sources = [SourceEdge(mapping.source_edges[k], mapping.source_nodes[k], k, widths[k]) for k in msgs]
    edges = []
    for c in p.clients:
        for k in c.has:
            edges.append(Edge(mapping.e1[(k, c.id)], mapping.source_nodes[k], mapping.sink_nodes[c.id], widths[k]))
    for k in msgs:
        edges.append(Edge(mapping.e2[k], mapping.source_nodes[k], mapping.v_b, widths[k]))
    edges.append(Edge(mapping.e_b, mapping.v_b, mapping.v_b_out, length))
    for c in p.clients:
        edges.append(Edge(mapping.e3[c.id], mapping.v_b_out, mapping.sink_nodes[c.id], length))
    sinks = [Sink(mapping.sink_nodes[c.id], c.wants) for c in p.clients]
    return NetProblem(p.q, tuple(sources), tuple(edges), tuple(sinks)), mapping


def nc_code_to_fic_code_gadget(p_nc: NetProblem, c: NetCode, mapping: FicToNcMap) -> FicCode:
    """Encoder = global kernel of e_B; decoder of R_m = D_{t_m} fed (codeword, Has-values).

    Relay kernels on E1/E3 edges need not be identities: they are folded into
    the decoder.
    """
    check_code(p_nc, c)
    F = derive_global_kernels(p_nc, c)
    decoders = {}
    for client in mapping.source.clients:
        sink = mapping.sink_nodes[client.id]
        e3 = mapping.e3[client.id]
        bind = {e3: compose(c.kernels[e3], {mapping.e_b: Proj(CODEWORD)})}
        for k in client.has:
            bind[mapping.e1[(k, client.id)]] = F[mapping.e1[(k, client.id)]]
        decoders[client.id] = compose(c.decoders[sink], bind)
    return _tidy_fic(FicCode(mapping.length, F[mapping.e_b], decoders), p_nc.q)


def fic_code_to_nc_code_gadget(p_fic: FicProblem, c: FicCode, mapping: FicToNcMap) -> NetCode:
    """Relay every message unchanged and put the codeword on e_B."""
    if c.length != mapping.length:
        raise LengthMismatch(f"code length {c.length} differs from bottleneck capacity {mapping.length}")
    check_fic_code(p_fic, c)
    kernels: dict[str, FuncExpr] = {}
    for (k, _), eid in mapping.e1.items():
        kernels[eid] = Proj(k)
    for k, eid in mapping.e2.items():
        kernels[eid] = Proj(k)
    kernels[mapping.e_b] = compose(c.encoder, {k: Proj(mapping.e2[k]) for k in p_fic.messages.names})
    for eid in mapping.e3.values():
        kernels[eid] = Proj(mapping.e_b)
    decoders = {}
    for client in p_fic.clients:
        bind = {CODEWORD: Proj(mapping.e3[client.id])}
        for k in client.has:
            bind[k] = Proj(mapping.e1[(k, client.id)])
        decoders[mapping.sink_nodes[client.id]] = compose(c.decoders[client.id], bind)
    return _tidy_net(NetCode(kernels, decoders), p_fic.q)
