"""Built-in instances: the max-computation network, the XOR-sum network and the
majority index-coding instance, each with its code."""
from __future__ import annotations

from .algebra import Concat, Majority, MaxInt, Proj, Select
from .fic import Client, FicCode, FicProblem
from .instances import InstanceFile
from .netcomp import Edge, NetCode, NetProblem, Sink, SourceEdge

P = Proj

# Max network: source s_k emits X_k; relays combine by maximum.
_FIG1_EDGES = [
    ("e1", "s1", "s4"),
    ("e2", "s2", "s5"),
    ("e3", "s2", "s6"),
    ("e4", "s3", "s7"),
    ("e5", "s4", "s8"),
    ("e6", "s5", "s8"),
    ("e7", "s5", "s9"),
    ("e8", "s6", "s11"),
    ("e9", "s7", "s11"),
    ("e10", "s8", "s10"),
    ("e11", "s9", "s10"),
    ("e12", "s10", "t"),
    ("e13", "s11", "t"),
]

_FIG1_KERNELS = {
    "e1": P("X1"),
    "e2": P("X2"),
    "e3": P("X2"),
    "e4": P("X3"),
    "e5": MaxInt((P("e1"), P("X4"))),
    "e6": MaxInt((P("e2"), P("X5"))),
    "e7": MaxInt((P("e2"), P("X5"))),
    "e8": MaxInt((P("e3"), P("X6"))),
    "e9": MaxInt((P("e4"), P("X7"))),
    "e10": MaxInt((P("e5"), P("e6"), P("X8"))),
    "e11": MaxInt((P("e7"), P("X9"))),
    "e12": MaxInt((P("e10"), P("e11"), P("X10"))),
    "e13": MaxInt((P("e8"), P("e9"), P("X11"))),
}

# Global kernels as printed for the max network (function of the messages).
FIG1_GLOBAL = {
    "e1": ["X1"],
    "e2": ["X2"],
    "e3": ["X2"],
    "e4": ["X3"],
    "e5": ["X1", "X4"],
    "e6": ["X2", "X5"],
    "e7": ["X2", "X5"],
    "e8": ["X2", "X6"],
    "e9": ["X3", "X7"],
    "e10": ["X1", "X2", "X4", "X5", "X8"],
    "e11": ["X2", "X5", "X9"],
    "e12": ["X1", "X2", "X4", "X5", "X8", "X9", "X10"],
    "e13": ["X2", "X3", "X6", "X7", "X11"],
}


def _max_of(names):
    return P(names[0]) if len(names) == 1 else MaxInt(tuple(P(n) for n in names))


def fig1_problem(width: int = 10) -> NetProblem:
    sources = tuple(SourceEdge(f"x{k}", f"s{k}", f"X{k}", width) for k in range(1, 12))
    edges = tuple(Edge(e, a, b, width) for e, a, b in _FIG1_EDGES)
    overall = MaxInt(tuple(P(f"X{k}") for k in range(1, 12)))
    demands = (overall,) if width == 1 else tuple(Select(overall, (i,)) for i in range(width))
    return NetProblem(2, sources, edges, (Sink("t", demands),))


def fig1_code() -> NetCode:
    return NetCode(dict(_FIG1_KERNELS), {"t": MaxInt((P("e12"), P("e13")))})


def fig1(width: int = 10) -> InstanceFile:
    title = "max of eleven messages" + (f" ({width}-bit blocks)" if width != 10 else "")
    return InstanceFile("netcomp", fig1_problem(width), fig1_code(), {"title": title})


# XOR network: s1 emits X1, X2; s2 emits X3, X4; relays v1..v4 feed sinks t1..t6.
_FIG2_EDGES = [
    ("e1", "s1", "v1"),
    ("e2", "s1", "v2"),
    ("e3", "s1", "v3"),
    ("e4", "s2", "v2"),
    ("e5", "s2", "v3"),
    ("e6", "s2", "v4"),
    ("e7", "v1", "t1"),
    ("e8", "v1", "t2"),
    ("e9", "v1", "t3"),
    ("e10", "v2", "t1"),
    ("e11", "v2", "t4"),
    ("e12", "v2", "t5"),
    ("e13", "v3", "t2"),
    ("e14", "v3", "t4"),
    ("e15", "v3", "t6"),
    ("e16", "v4", "t3"),
    ("e17", "v4", "t5"),
    ("e18", "v4", "t6"),
]

_FIG2_SINKS = {
    "t1": (("e7", "e10"), ["X1", "X2", "X3", "X4"]),
    "t2": (("e8", "e13"), ["X2", "X4"]),
    "t3": (("e9", "e16"), ["X1", "X3"]),
    "t4": (("e11", "e14"), ["X1", "X3"]),
    "t5": (("e12", "e17"), ["X2", "X4"]),
    "t6": (("e15", "e18"), ["X1", "X2", "X3", "X4"]),
}


def _sum(names):
    expr = P(names[0])
    for n in names[1:]:
        expr = expr + P(n)
    return expr


_FIG2_KERNELS = {
    "e1": P("X1"),
    "e2": P("X2"),
    "e3": _sum(["X1", "X2"]),
    "e4": _sum(["X3", "X4"]),
    "e5": P("X4"),
    "e6": P("X3"),
    "e7": P("e1"),
    "e8": P("e1"),
    "e9": P("e1"),
    "e10": _sum(["e2", "e4"]),
    "e11": _sum(["e2", "e4"]),
    "e12": _sum(["e2", "e4"]),
    "e13": _sum(["e3", "e5"]),
    "e14": _sum(["e3", "e5"]),
    "e15": _sum(["e3", "e5"]),
    "e16": P("e6"),
    "e17": P("e6"),
    "e18": P("e6"),
}

FIG2_GLOBAL = {
    "e1": ["X1"],
    "e2": ["X2"],
    "e3": ["X1", "X2"],
    "e4": ["X3", "X4"],
    "e5": ["X4"],
    "e6": ["X3"],
    "e7": ["X1"],
    "e8": ["X1"],
    "e9": ["X1"],
    "e10": ["X2", "X3", "X4"],
    "e11": ["X2", "X3", "X4"],
    "e12": ["X2", "X3", "X4"],
    "e13": ["X1", "X2", "X4"],
    "e14": ["X1", "X2", "X4"],
    "e15": ["X1", "X2", "X4"],
    "e16": ["X3"],
    "e17": ["X3"],
    "e18": ["X3"],
}


def fig2_problem() -> NetProblem:
    sources = (
        SourceEdge("x1", "s1", "X1", 1),
        SourceEdge("x2", "s1", "X2", 1),
        SourceEdge("x3", "s2", "X3", 1),
        SourceEdge("x4", "s2", "X4", 1),
    )
    edges = tuple(Edge(e, a, b, 1) for e, a, b in _FIG2_EDGES)
    sinks = tuple(Sink(t, (_sum(demand),)) for t, (_, demand) in _FIG2_SINKS.items())
    return NetProblem(2, sources, edges, sinks)


def fig2_code() -> NetCode:
    decoders = {t: _sum(list(ins)) for t, (ins, _) in _FIG2_SINKS.items()}
    return NetCode(dict(_FIG2_KERNELS), decoders)


def fig2() -> InstanceFile:
    return InstanceFile("netcomp", fig2_problem(), fig2_code(), {"title": "sums of four binary messages"})


# Index-coding instance with a majority demand.
TABLE3_ENCODER = Concat((P("X1") + P("X6"), P("X3") + P("X4"), P("X2") + P("X5")))


def table3_problem() -> FicProblem:
    messages = tuple((f"X{k}", 1) for k in range(1, 7))
    clients = (
        Client("R1", ("X2", "X3"), (Majority((P("X1") + P("X6"), P("X2") + P("X3"), P("X4"))),)),
        Client("R2", ("X4", "X5"), (P("X1") + P("X5") + P("X6"), P("X3"))),
        Client("R3", ("X3", "X6"), (P("X2") + P("X5"), P("X1") + P("X3") + P("X6"))),
        Client("R4", ("X1",), (P("X6"),)),
    )
    return FicProblem(2, messages, clients)


def table3_code() -> FicCode:
    C = P("C")
    c1, c2, c3 = C[0], C[1], C[2]
    decoders = {
        "R1": Majority((c1, P("X2") + P("X3"), c2 + P("X3"))),
        "R2": Concat((c1 + P("X5"), c2 + P("X4"))),
        "R3": Concat((c3, c1 + P("X3"))),
        "R4": c1 + P("X1"),
    }
    return FicCode(3, TABLE3_ENCODER, decoders)


def table3() -> InstanceFile:
    return InstanceFile("fic", table3_problem(), table3_code(), {"title": "majority index coding instance"})


BUILTINS = {
    "fig1": lambda: fig1(10),
    "fig1-scaled": lambda: fig1(1),
    "fig2": fig2,
    "table3": table3,
}


def builtin_examples() -> list[InstanceFile]:
    return [make() for make in BUILTINS.values()]


def builtin(name: str) -> InstanceFile:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown example {name!r}; choose from {', '.join(BUILTINS)}") from None
