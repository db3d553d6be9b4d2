"""Functional index coding problems and codes.

Clients hold subsets of the messages (Has-sets) and want functions of them.
Besides direct verification this module checks the generalized exclusive law
and bounds the minimum code length through the confusion graph.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import coloring
from .algebra import (
    BlockLayout,
    Concat,
    EnumMode,
    Exhaustive,
    FieldSpec,
    FuncExpr,
    Table,
    default_cap,
    evaluate_env,
    index_to_vectors,
    iter_batches,
    output_width,
    resolve_mode,
    vectors_to_index,
)
from .errors import CapExceeded, InvalidProblem, MissingDecoder, NetficError, TableTooLarge, WidthMismatch
from .netcomp import Finding, _err_element
from .report import VerifyReport, WitnessCollector, finish

CODEWORD = "C"
EXACT_COLORING_LIMIT = 128
DECODER_TABLE_LIMIT = 2**16


@dataclass(frozen=True)
class Client:
    id: str
    has: tuple[str, ...]
    wants: tuple[FuncExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "has", tuple(self.has))
        object.__setattr__(self, "wants", tuple(self.wants))

    @property
    def want(self) -> FuncExpr:
        return self.wants[0] if len(self.wants) == 1 else Concat(self.wants)


@dataclass(frozen=True)
class FicProblem:
    q: int
    messages: BlockLayout
    clients: tuple[Client, ...]

    def __post_init__(self):
        FieldSpec(self.q)
        if not isinstance(self.messages, BlockLayout):
            object.__setattr__(self, "messages", BlockLayout(tuple(self.messages)))
        object.__setattr__(self, "clients", tuple(self.clients))

    @property
    def n_k(self) -> int:
        return self.messages.total_width

    def client(self, cid: str) -> Client:
        for c in self.clients:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def has_layout(self, client: Client) -> BlockLayout:
        widths = self.messages.widths
        return BlockLayout(tuple((h, widths[h]) for h in client.has))

    def decoder_layout(self, client: Client, length: int) -> BlockLayout:
        """Decoder inputs: the codeword block, then the client's Has blocks."""
        return BlockLayout(((CODEWORD, length),)) + self.has_layout(client)


@dataclass(frozen=True)
class FicCode:
    length: int
    encoder: FuncExpr
    decoders: Mapping[str, FuncExpr]

    def __post_init__(self):
        object.__setattr__(self, "decoders", dict(self.decoders))


def validate_fic_problem(p: FicProblem) -> list[Finding]:
    findings: list[Finding] = []
    widths = p.messages.widths
    if CODEWORD in widths:
        findings.append(Finding("ReservedName", CODEWORD, "message name is reserved for the codeword block"))
    for name, w in p.messages.blocks:
        if w < 1:
            findings.append(Finding("BadWidth", name, f"width {w} < 1"))
    seen = set()
    for c in p.clients:
        if c.id in seen:
            findings.append(Finding("DuplicateClient", c.id))
        seen.add(c.id)
        if len(set(c.has)) != len(c.has):
            findings.append(Finding("DuplicateHas", c.id))
        for h in c.has:
            if h not in widths:
                findings.append(Finding("UnknownBlock", h, f"Has-set of client {c.id}"))
        if not c.wants:
            findings.append(Finding("EmptyWant", c.id))
        for i, w in enumerate(c.wants):
            try:
                ow = output_width(w, widths, p.q)
            except NetficError as exc:
                findings.append(Finding(type(exc).__name__, _err_element(exc), f"want {i} of client {c.id}"))
                continue
            if ow != 1:
                findings.append(Finding("WidthMismatch", c.id, f"want {i} has width {ow}, expected 1"))
    return findings


def ensure_valid(p: FicProblem) -> None:
    findings = validate_fic_problem(p)
    if findings:
        raise InvalidProblem(findings)


def check_code(p: FicProblem, c: FicCode) -> None:
    w = output_width(c.encoder, p.messages.widths, p.q)
    if w != c.length:
        raise WidthMismatch(f"encoder has width {w}, code length is {c.length}")
    for client in p.clients:
        if client.id not in c.decoders:
            raise MissingDecoder(client.id)
        dw = output_width(c.decoders[client.id], p.decoder_layout(client, c.length).widths, p.q)
        if dw != len(client.wants):
            raise WidthMismatch(f"decoder of {client.id} has width {dw}, client wants {len(client.wants)}")


def decode_env(p: FicProblem, client: Client, codeword: np.ndarray, messages: Mapping[str, np.ndarray]) -> dict:
    env = {CODEWORD: codeword}
    env.update({h: messages[h] for h in client.has})
    return env


def verify_fic_code(p: FicProblem, c: FicCode, mode: EnumMode | None = None) -> VerifyReport:
    """Check decoder_i(M(z), H_i(z)) == W_i(z) for every enumerated z and client."""
    started = time.perf_counter()
    ensure_valid(p)
    check_code(p, c)
    mode = resolve_mode(p.n_k, p.q) if mode is None else mode
    collector = WitnessCollector()
    checked = 0
    for z in iter_batches(p.n_k, p.q, mode):
        n = z.shape[0]
        env = p.messages.split(z)
        codeword = evaluate_env(c.encoder, env, p.q, n)
        for client in p.clients:
            got = evaluate_env(c.decoders[client.id], decode_env(p, client, codeword, env), p.q, n)
            expected = evaluate_env(client.want, env, p.q, n)
            collector.add(client.id, z, expected, got, np.any(got != expected, axis=1))
        checked += n
    return finish(mode, checked, collector, started, [cl.id for cl in p.clients], check="index-code")


# ---------------------------------------------------------------------------
# Exclusive law and confusion graph
# ---------------------------------------------------------------------------


def _pack(a: np.ndarray, q: int) -> np.ndarray:
    """Pack rows of symbols into int64 key columns (several symbols per column)."""
    per = max(1, int(np.floor(62 / np.log2(q))))
    cols = []
    for start in range(0, a.shape[1], per):
        cols.append(vectors_to_index(a[:, start : start + per], q))
    if not cols:
        cols.append(np.zeros(a.shape[0], dtype=np.int64))
    return np.stack(cols, axis=1)


def _client_keys(p: FicProblem, client: Client, mode: EnumMode, encoder: FuncExpr | None, length: int = 0):
    """Per-realization keys (H, [M,] W) for one client, plus the realizations when sampled."""
    hs, ms, ws, zs = [], [], [], []
    for z in iter_batches(p.n_k, p.q, mode):
        n = z.shape[0]
        env = p.messages.split(z)
        h = np.concatenate([env[b] for b in client.has], axis=1) if client.has else np.zeros((n, 0), np.int64)
        hs.append(_pack(h, p.q))
        ws.append(_pack(evaluate_env(client.want, env, p.q, n), p.q))
        if encoder is not None:
            ms.append(_pack(evaluate_env(encoder, env, p.q, n), p.q))
        if not isinstance(mode, Exhaustive):
            zs.append(z)
    H = np.concatenate(hs)
    W = np.concatenate(ws)
    M = np.concatenate(ms) if ms else None
    Z = np.concatenate(zs) if zs else None
    return H, M, W, Z


def _groups(key: np.ndarray, sub: np.ndarray):
    """Sort rows by (key, sub, row index); return order and group boundaries of ``key``."""
    idx = np.arange(key.shape[0])
    order = np.lexsort([idx] + [sub[:, j] for j in range(sub.shape[1] - 1, -1, -1)] + [key[:, j] for j in range(key.shape[1] - 1, -1, -1)])
    k = key[order]
    s = sub[order]
    new_group = np.ones(len(order), dtype=bool)
    new_group[1:] = np.any(k[1:] != k[:-1], axis=1)
    sub_change = np.zeros(len(order), dtype=bool)
    sub_change[1:] = np.any(s[1:] != s[:-1], axis=1) & ~new_group[1:]
    return order, new_group, sub_change


def check_exclusive_law(p: FicProblem, c: FicCode, mode: EnumMode | None = None) -> VerifyReport:
    """Confusable realizations (same Has-value, different Want-value) must get distinct codewords.

    Necessary but not sufficient for decodability.
    """
    started = time.perf_counter()
    ensure_valid(p)
    w = output_width(c.encoder, p.messages.widths, p.q)
    if w != c.length:
        raise WidthMismatch(f"encoder has width {w}, code length is {c.length}")
    mode = resolve_mode(p.n_k, p.q) if mode is None else mode
    collector = WitnessCollector()
    checked = 0
    for client in p.clients:
        H, M, W, Z = _client_keys(p, client, mode, c.encoder)
        checked = len(H)
        key = np.concatenate([H, M], axis=1)
        order, new_group, sub_change = _groups(key, W)
        if not sub_change.any():
            continue
        group_id = np.cumsum(new_group) - 1
        bad_groups = np.unique(group_id[sub_change])
        starts = np.flatnonzero(new_group)
        rows_z, rows_p, exp, got = [], [], [], []
        for g in bad_groups[: collector.limit * 4]:
            lo = starts[g]
            hi = starts[g + 1] if g + 1 < len(starts) else len(order)
            members = order[lo:hi]
            first = members.min()
            w0 = W[first]
            other = members[np.any(W[members] != w0, axis=1)].min()
            rows_z.append(first)
            rows_p.append(other)
        rz = np.asarray(rows_z)
        rp = np.asarray(rows_p)
        zz = _realizations(p, mode, rz, Z)
        pp = _realizations(p, mode, rp, Z)
        env_z = p.messages.split(zz)
        env_p = p.messages.split(pp)
        exp = evaluate_env(client.want, env_z, p.q, len(rz))
        got = evaluate_env(client.want, env_p, p.q, len(rp))
        collector.add(client.id, zz, exp, got, np.ones(len(rz), dtype=bool), partner=pp)
    return finish(
        mode,
        checked,
        collector,
        started,
        [cl.id for cl in p.clients],
        check="exclusive-law",
        note="necessary condition only",
    )


def _realizations(p: FicProblem, mode: EnumMode, rows: np.ndarray, Z: np.ndarray | None) -> np.ndarray:
    if Z is not None:
        return Z[rows]
    return index_to_vectors(rows.astype(np.int64), p.n_k, p.q)


@dataclass(frozen=True)
class ConfusionGraph:
    """Vertices are realization indices (lexicographic); edges are confusable pairs ``i < j``."""

    q: int
    width: int
    edges: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.q**self.width

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def vertex(self, i: int) -> tuple[int, ...]:
        return tuple(int(v) for v in index_to_vectors(np.asarray([i]), self.width, self.q)[0])

    def edge_set(self) -> set[tuple[tuple[int, ...], tuple[int, ...]]]:
        return {(self.vertex(int(a)), self.vertex(int(b))) for a, b in self.edges}


def build_confusion_graph(p: FicProblem, cap: int | None = None) -> ConfusionGraph:
    cap = default_cap() if cap is None else cap
    ensure_valid(p)
    size = p.q**p.n_k
    if size > cap:
        raise CapExceeded(size, cap)
    mode = Exhaustive(cap)
    found = []
    for client in p.clients:
        H, _, W, _ = _client_keys(p, client, mode, None)
        order, new_group, _ = _groups(H, W)
        starts = np.append(np.flatnonzero(new_group), len(order))
        for lo, hi in zip(starts[:-1], starts[1:]):
            if hi - lo < 2:
                continue
            members = order[lo:hi]
            wm = W[members]
            differ = np.any(wm[:, None, :] != wm[None, :, :], axis=2)
            a, b = np.nonzero(np.triu(differ, 1))
            if len(a):
                u, v = members[a], members[b]
                found.append(np.stack([np.minimum(u, v), np.maximum(u, v)], axis=1))
    if found:
        edges = np.unique(np.concatenate(found), axis=0)
    else:
        edges = np.zeros((0, 2), dtype=np.int64)
    return ConfusionGraph(p.q, p.n_k, edges)


# ---------------------------------------------------------------------------
# Length bounds from coloring
# ---------------------------------------------------------------------------


def ceil_log(k: int, q: int) -> int:
    """Smallest l with q**l >= k."""
    length = 0
    while q**length < k:
        length += 1
    return length


@dataclass(frozen=True)
class LengthBounds:
    lower: int
    upper: int
    regime: str
    colors: int
    chromatic: int | None
    clique: int
    n_vertices: int
    n_edges: int
    code: FicCode

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "regime": self.regime,
            "colors_used": self.colors,
            "chromatic_number": self.chromatic,
            "clique_size": self.clique,
            "vertices": self.n_vertices,
            "edges": self.n_edges,
        }


def code_from_coloring(p: FicProblem, colors: np.ndarray, length: int) -> FicCode:
    """Index code sending the color class of z; decoders are lookup tables.

    Color classes are numbered by their lexicographically smallest member and
    get codewords in lexicographic order.
    """
    colors = np.asarray(colors, dtype=np.int64)
    n = len(colors)
    first_seen: dict[int, int] = {}
    for i, c in enumerate(colors.tolist()):
        first_seen.setdefault(c, i)
    rank = {c: r for r, c in enumerate(sorted(first_seen, key=first_seen.get))}
    codeword_idx = np.asarray([rank[c] for c in colors.tolist()], dtype=np.int64)
    codewords = index_to_vectors(codeword_idx, length, p.q)
    encoder = Table(p.messages.blocks, tuple(map(tuple, codewords.tolist())))

    z = index_to_vectors(np.arange(n, dtype=np.int64), p.n_k, p.q)
    env = p.messages.split(z)
    decoders = {}
    for client in p.clients:
        layout = p.decoder_layout(client, length)
        size = p.q**layout.total_width
        if size > DECODER_TABLE_LIMIT:
            raise TableTooLarge(f"decoder table for {client.id} would have {size} rows")
        want = evaluate_env(client.want, env, p.q, n)
        h = [env[b] for b in client.has]
        key = vectors_to_index(np.concatenate([codewords] + h, axis=1), p.q)
        rows = np.zeros((size, want.shape[1]), dtype=np.int64)
        rows[key] = want
        decoders[client.id] = Table(layout.blocks, tuple(map(tuple, rows.tolist())))
    return FicCode(length, encoder, decoders)


def min_length_bounds(p: FicProblem, cap: int | None = None) -> LengthBounds:
    """Lower bound ceil(log_q chi) on the code length, and a code achieving the upper bound."""
    # side information alone already overflows a lookup decoder; refuse before any graph work
    for client in p.clients:
        size = p.q ** p.decoder_layout(client, 0).total_width
        if size > DECODER_TABLE_LIMIT:
            raise TableTooLarge(f"decoder table for {client.id} would have at least {size} rows")
    graph = build_confusion_graph(p, cap)
    n = graph.n_vertices
    edges = graph.edges.tolist()
    if n <= EXACT_COLORING_LIMIT:
        clique = coloring.max_clique(n, edges)
        colors, optimal = coloring.exact_coloring(n, edges, clique=clique)
        used = max(colors) + 1
        chromatic = used if optimal else None
        regime = "exact"
        lower_colors = used
    else:
        clique = coloring.max_clique(n, edges) if len(edges) <= 200_000 else coloring.greedy_clique(n, edges)
        colors = coloring.dsatur_greedy(n, edges)
        used = max(colors) + 1
        chromatic = used if used == len(clique) else None
        regime = "exact" if chromatic is not None else "clique-bound"
        lower_colors = used if chromatic is not None else max(1, len(clique))
    lower = ceil_log(lower_colors, p.q)
    upper = ceil_log(used, p.q)
    code = code_from_coloring(p, np.asarray(colors), upper)
    return LengthBounds(lower, upper, regime, used, chromatic, len(clique), n, graph.n_edges, code)
