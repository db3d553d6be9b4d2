import numpy as np
import pytest

from netfic.algebra import BlockLayout, Const, MaxInt, Proj, func_equal
from netfic.errors import CycleDetected, MissingKernel
from netfic.examples import FIG1_GLOBAL, FIG2_GLOBAL, fig1, fig1_problem, fig2_code, fig2_problem
from netfic.netcomp import (
    Edge,
    NetCode,
    NetProblem,
    Sink,
    SourceEdge,
    ancestral_order,
    check_code,
    derive_global_kernels,
    sink_outputs,
    simulate,
    validate_problem,
    verify_net_code,
)
from netfic.algebra import Exhaustive, Sampled

P = Proj


def relay(demand=None, kernel=None, decoder=None):
    p = NetProblem(
        2,
        (SourceEdge("x1", "s", "X1", 1),),
        (Edge("e", "s", "t", 1),),
        (Sink("t", (demand or P("X1"),)),),
    )
    return p, NetCode({"e": kernel or P("X1")}, {"t": decoder or P("e")})


def _sum(names):
    out = P(names[0])
    for n in names[1:]:
        out = out + P(n)
    return out


# --- validation --------------------------------------------------------------


def test_fig2_is_valid():
    assert validate_problem(fig2_problem()) == []
    assert validate_problem(fig1_problem()) == []


def test_cycle_is_reported():
    p = NetProblem(
        2,
        (SourceEdge("x1", "s", "X1", 1),),
        (Edge("e0", "s", "a", 1), Edge("a", "a", "b", 1), Edge("b", "b", "a", 1), Edge("c", "b", "t", 1)),
        (Sink("t", (P("X1"),)),),
    )
    findings = validate_problem(p)
    assert [f.kind for f in findings] == ["CycleDetected"]
    assert set(findings[0].element.split(",")) == {"a", "b"}
    with pytest.raises(CycleDetected):
        ancestral_order(p)


def test_unknown_demand_block():
    sources = tuple(SourceEdge(f"x{k}", "s", f"X{k}", 1) for k in range(1, 5))
    p = NetProblem(2, sources, (Edge("e", "s", "t", 1),), (Sink("t", (P("X9"),)),))
    findings = validate_problem(p)
    assert len(findings) == 1
    assert findings[0].kind == "UnknownBlock" and findings[0].element == "X9"


def test_other_structural_findings():
    p = NetProblem(
        2,
        (SourceEdge("x1", "s", "X1", 0),),
        (Edge("e", "s", "t", 0), Edge("f", "t", "u", 1)),
        (Sink("t", ()), Sink("u", (P("X1") + P("X1"),)), Sink("u", (P("X1"),))),
    )
    kinds = {f.kind for f in validate_problem(p)}
    assert {"BadWidth", "BadCapacity", "EmptyDemand", "SinkHasOutgoingEdge", "DuplicateSink"} <= kinds


def test_wide_demand_rejected():
    p = NetProblem(2, (SourceEdge("x1", "s", "X1", 2),), (Edge("e", "s", "t", 2),), (Sink("t", (P("X1"),)),))
    assert [f.kind for f in validate_problem(p)] == ["WidthMismatch"]


# --- ancestral order ---------------------------------------------------------


def test_fig1_order_respects_table_one():
    order = ancestral_order(fig1_problem())
    pos = {e: i for i, e in enumerate(order)}
    for early in ("e1", "e2", "e3", "e4"):
        for late in ("e5", "e6", "e7", "e8", "e9"):
            assert pos[early] < pos[late]
    for e in ("e5", "e6", "e7", "e8", "e9"):
        assert pos[e] < pos["e10"]
    assert pos["e10"] < pos["e12"] and pos["e11"] < pos["e12"]
    assert pos["e13"] > pos["e8"] and pos["e13"] > pos["e9"]
    assert set(order) == {f"e{i}" for i in range(1, 14)}


def test_single_edge_order():
    p, _ = relay()
    assert ancestral_order(p) == ["e"]


def test_parallel_edges_keep_declaration_order():
    p = NetProblem(
        2,
        (SourceEdge("x1", "s", "X1", 1),),
        (Edge("e_b", "s", "t", 1), Edge("e_a", "s", "t", 1)),
        (Sink("t", (P("X1"),)),),
    )
    assert ancestral_order(p) == ["e_b", "e_a"]
    assert ancestral_order(p, reverse_ties=True) == ["e_a", "e_b"]


# --- global kernels ----------------------------------------------------------


def test_fig1_global_kernels():
    p = fig1_problem(10)
    F = derive_global_kernels(p, fig1().code)
    assert F.keys() == FIG1_GLOBAL.keys()
    f5 = F["e5"]
    layout = p.message_layout
    expected = MaxInt((P("X1"), P("X4")))
    assert func_equal(f5, expected, layout, 2, budget=0, samples=20_000).status == "inconclusive"
    for e, msgs in FIG1_GLOBAL.items():
        want = P(msgs[0]) if len(msgs) == 1 else MaxInt(tuple(P(m) for m in msgs))
        assert func_equal(F[e], want, layout, 2, budget=0, samples=20_000).status == "inconclusive", e


def test_fig1_scaled_global_kernels_exhaustive():
    p = fig1_problem(1)
    F = derive_global_kernels(p, fig1(1).code)
    for e, msgs in FIG1_GLOBAL.items():
        want = P(msgs[0]) if len(msgs) == 1 else MaxInt(tuple(P(m) for m in msgs))
        assert func_equal(F[e], want, p.message_layout, 2).status == "equal", e


def test_fig2_global_kernels():
    p = fig2_problem()
    F = derive_global_kernels(p, fig2_code())
    for e, msgs in FIG2_GLOBAL.items():
        assert func_equal(F[e], _sum(msgs), p.message_layout, 2), e
    assert func_equal(F["e10"], _sum(["X2", "X3", "X4"]), p.message_layout, 2)


def test_identity_relay_global_kernel():
    p, c = relay()
    assert derive_global_kernels(p, c)["e"] == P("X1")


def test_global_kernels_independent_of_tie_order():
    p, c = fig2_problem(), fig2_code()
    a = derive_global_kernels(p, c, ancestral_order(p))
    b = derive_global_kernels(p, c, ancestral_order(p, reverse_ties=True))
    for e in a:
        assert func_equal(a[e], b[e], p.message_layout, 2)


def test_missing_kernel():
    p, _ = relay()
    with pytest.raises(MissingKernel):
        check_code(p, NetCode({}, {"t": P("e")}))


# --- simulation and verification --------------------------------------------


def test_simulate_matches_global_kernels():
    p, c = fig2_problem(), fig2_code()
    x = np.array([[1, 0, 1, 1], [0, 1, 1, 0]])
    payloads = simulate(p, c, x)
    assert payloads["e10"].tolist() == [[0], [0]]  # X2+X3+X4
    assert payloads["e13"].tolist() == [[0], [1]]  # X1+X2+X4
    outs = sink_outputs(p, c)
    assert func_equal(outs["t2"], P("X2") + P("X4"), p.message_layout, 2)


def test_fig2_verifies_exhaustively():
    r = verify_net_code(fig2_problem(), fig2_code())
    assert r.verdict == "pass" and r.checked == 16 and r.mode == "exhaustive"


def test_broken_kernel_gives_witness():
    # oracle: with f_e16 = 0, sink t3 outputs X1 but wants X1 + X3; fails exactly when X3 = 1
    p = fig2_problem()
    code = fig2_code()
    code = NetCode({**code.kernels, "e16": Const((0,))}, code.decoders)
    r = verify_net_code(p, code)
    assert r.verdict == "fail"
    assert r.witnesses
    for w in r.witnesses:
        assert w.input[2] == 1
    first = [w for w in r.witnesses if w.subject == "t3"][0]
    assert tuple(first.input) == (0, 0, 1, 0)


def test_one_edge_relay_passes():
    p, c = relay()
    assert verify_net_code(p, c).passed


def test_sampled_verification():
    r = verify_net_code(fig2_problem(), fig2_code(), Sampled(500, 3))
    assert r.verdict == "pass-sampled" and r.checked == 500 and r.seed == 3


def test_fig1_scaled_exhaustive():
    inst = fig1(1)
    r = verify_net_code(inst.problem, inst.code, Exhaustive())
    assert r.verdict == "pass" and r.checked == 2**11


def test_vector_messages():
    layout_p = NetProblem(
        3,
        (SourceEdge("x1", "s", "X1", 2),),
        (Edge("e", "s", "t", 2),),
        (Sink("t", (P("X1")[0] + P("X1")[1],)),),
    )
    code = NetCode({"e": P("X1")}, {"t": P("e")[0] + P("e")[1]})
    assert verify_net_code(layout_p, code).checked == 9
    assert BlockLayout((("X1", 2),)) == layout_p.message_layout
