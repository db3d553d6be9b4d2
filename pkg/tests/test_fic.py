import itertools

import numpy as np
import pytest

from netfic.algebra import (
    BlockLayout,
    Concat,
    Const,
    Majority,
    Proj,
    Sampled,
    Select,
    compose,
    evaluate_batch,
    func_equal,
    vectors_to_index,
)
from netfic.coloring import chromatic_number, dsatur_greedy, exact_coloring, is_proper, max_clique
from netfic.errors import CapExceeded, MissingDecoder, TableTooLarge, UnknownBlock, WidthMismatch
from netfic.examples import TABLE3_ENCODER, table3_code, table3_problem
from netfic.fic import (
    Client,
    FicCode,
    FicProblem,
    build_confusion_graph,
    ceil_log,
    check_code,
    check_exclusive_law,
    code_from_coloring,
    min_length_bounds,
    validate_fic_problem,
    verify_fic_code,
)

from randgen import random_fic

P = Proj
C = P("C")

# frozen from tests/oracles.py (pairwise brute force over 2016 pairs x 4 clients)
TABLE3_CONFUSION_EDGES = 1136
TABLE3_CLIQUE = 8


def xor_exchange():
    return FicProblem(2, (("Z1", 1), ("Z2", 1)), (Client("A", ("Z1",), (P("Z2"),)), Client("B", ("Z2",), (P("Z1"),))))


# --- verification ------------------------------------------------------------


def test_table3_code_verifies():
    r = verify_fic_code(table3_problem(), table3_code())
    assert r.verdict == "pass" and r.checked == 64


def test_table3_want_of_first_client():
    r1 = table3_problem().client("R1")
    layout = BlockLayout(tuple((f"X{k}", 1) for k in range(1, 7)))
    assert func_equal(r1.want, Majority((P("X1") + P("X6"), P("X2") + P("X3"), P("X4"))), layout, 2)


def test_truncated_code_fails_where_oracle_says():
    p = table3_problem()
    full = table3_code()
    decoders = dict(full.decoders)
    decoders["R3"] = Concat((Const((0,)), C[0] + P("X3")))
    code = FicCode(2, Concat((P("X1") + P("X6"), P("X3") + P("X4"))), decoders)
    decoders["R1"] = Const((0,))
    decoders["R2"] = Concat((C[0] + P("X5"), C[1] + P("X4")))
    r = verify_fic_code(p, code)
    assert r.verdict == "fail"
    r3 = [w for w in r.witnesses if w.subject == "R3"]
    assert r3
    for w in r3:
        x = w.input
        assert (x[1] + x[4]) % 2 == 1
    assert tuple(r3[0].input) == (0, 0, 0, 0, 1, 0)


def test_broadcast_everything_code():
    p = table3_problem()
    msgs = [f"X{k}" for k in range(1, 7)]
    encoder = Concat(tuple(P(m) for m in msgs))
    decoders = {}
    for c in p.clients:
        decoders[c.id] = compose(c.want, {m: C[i] for i, m in enumerate(msgs)})
    assert verify_fic_code(p, FicCode(6, encoder, decoders)).passed


def test_code_checks():
    p = table3_problem()
    with pytest.raises(MissingDecoder):
        check_code(p, FicCode(3, TABLE3_ENCODER, {}))
    with pytest.raises(WidthMismatch):
        check_code(p, FicCode(2, TABLE3_ENCODER, table3_code().decoders))


def test_problem_validation():
    bad = FicProblem(2, (("Z1", 1),), (Client("A", ("Z9",), (P("Z1"),)), Client("A", (), (P("Z1") + Concat((P("Z1"), P("Z1"))),))))
    kinds = {f.kind for f in validate_fic_problem(bad)}
    assert "UnknownBlock" in kinds and "DuplicateClient" in kinds and "WidthMismatch" in kinds


# --- exclusive law -----------------------------------------------------------


def test_exclusive_law_passes_for_table3():
    r = check_exclusive_law(table3_problem(), table3_code())
    assert r.verdict == "pass" and r.check == "exclusive-law"


def test_exclusive_law_fails_for_uncoded_exchange():
    p = xor_exchange()
    code = FicCode(1, P("Z1"), {"A": P("Z1"), "B": C})
    r = check_exclusive_law(p, code)
    assert r.verdict == "fail"
    w = r.witnesses[0]
    assert w.subject == "A" and tuple(w.input) == (0, 0) and tuple(w.partner) == (0, 1)


def test_exclusive_law_trivial_when_wants_known():
    p = FicProblem(2, (("Z1", 1), ("Z2", 1)), (Client("A", ("Z1", "Z2"), (P("Z1") + P("Z2"),)),))
    code = FicCode(1, Const((0,)), {"A": P("Z1") + P("Z2")})
    assert check_exclusive_law(p, code).passed
    assert verify_fic_code(p, code).passed


# --- confusion graph and bounds ---------------------------------------------


def test_xor_exchange_confusion_graph():
    g = build_confusion_graph(xor_exchange())
    assert g.n_vertices == 4
    assert g.edge_set() == {((0, 0), (0, 1)), ((0, 0), (1, 0)), ((0, 1), (1, 1)), ((1, 0), (1, 1))}


def test_xor_exchange_bounds_and_witness():
    p = xor_exchange()
    b = min_length_bounds(p)
    assert (b.lower, b.upper) == (1, 1) and b.chromatic == 2
    assert verify_fic_code(p, b.code).passed
    assert func_equal(b.code.encoder, P("Z1") + P("Z2"), p.messages, 2) or func_equal(
        b.code.encoder, P("Z1") + P("Z2") + Const((1,)), p.messages, 2
    )


def test_all_known_gives_no_edges():
    p = FicProblem(2, (("Z1", 1), ("Z2", 1)), (Client("A", ("Z1", "Z2"), (P("Z2"),)),))
    assert build_confusion_graph(p).n_edges == 0


def test_constant_wants_need_nothing():
    p = FicProblem(3, (("Z1", 1),), (Client("A", (), (Const((2,)),)), Client("B", ("Z1",), (P("Z1"),))))
    b = min_length_bounds(p)
    assert (b.lower, b.upper) == (0, 0)
    assert b.code.length == 0
    assert verify_fic_code(p, b.code).passed


def test_table3_confusion_graph_matches_oracle():
    g = build_confusion_graph(table3_problem())
    assert g.n_vertices == 64
    assert g.n_edges == TABLE3_CONFUSION_EDGES


def test_table3_bounds():
    b = min_length_bounds(table3_problem())
    assert (b.lower, b.upper) == (3, 3)
    assert b.regime == "exact" and b.chromatic == 8 and b.clique == TABLE3_CLIQUE
    assert verify_fic_code(table3_problem(), b.code).passed


def test_table3_encoder_is_a_proper_coloring():
    p = table3_problem()
    g = build_confusion_graph(p)
    z = np.array([g.vertex(i) for i in range(g.n_vertices)])
    colors = vectors_to_index(evaluate_batch(TABLE3_ENCODER, p.messages, z, 2), 2)
    assert is_proper(colors.tolist(), g.edges.tolist())


def test_ceil_log():
    assert [ceil_log(k, 2) for k in (0, 1, 2, 3, 4, 5, 8, 9)] == [0, 0, 1, 2, 2, 3, 3, 4]
    assert ceil_log(10, 3) == 3


def test_bounds_respect_cap():
    p = FicProblem(2, tuple((f"Z{i}", 1) for i in range(12)), (Client("A", (), (P("Z0"),)),))
    with pytest.raises(CapExceeded):
        build_confusion_graph(p, cap=1024)


def test_coloring_code_from_arbitrary_coloring():
    p = xor_exchange()
    code = code_from_coloring(p, np.array([0, 1, 2, 3]), 2)
    assert verify_fic_code(p, code).passed


# --- coloring ---------------------------------------------------------------


def _cycle(n):
    return [(i, (i + 1) % n) for i in range(n)]


@pytest.mark.parametrize(
    "n,edges,chi",
    [
        (5, _cycle(5), 3),
        (6, _cycle(6), 2),
        (4, [(i, j) for i in range(4) for j in range(i + 1, 4)], 4),
        (3, [], 1),
        # Petersen graph
        (10, _cycle(5) + [(i + 5, (i + 2) % 5 + 5) for i in range(5)] + [(i, i + 5) for i in range(5)], 3),
    ],
)
def test_chromatic_numbers(n, edges, chi):
    assert chromatic_number(n, edges) == chi
    colors, optimal = exact_coloring(n, edges)
    assert optimal and is_proper(colors, edges) and max(colors) + 1 == chi


def test_greedy_and_clique_sandwich():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(1, 14))
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4]
        greedy = dsatur_greedy(n, edges)
        chi = chromatic_number(n, edges)
        assert is_proper(greedy, edges)
        assert len(max_clique(n, edges)) <= chi <= max(greedy) + 1
        # brute-force oracle for tiny graphs
        if n <= 8:
            best = min(
                k
                for k in range(1, n + 1)
                if any(all(c[u] != c[v] for u, v in edges) for c in itertools.product(range(k), repeat=n))
            )
            assert chi == best


# --- properties --------------------------------------------------------------


@pytest.mark.parametrize("seed", range(40))
def test_random_valid_codes_pass_and_satisfy_exclusive_law(seed):
    q = 2 if seed % 2 == 0 else 3
    p, c = random_fic(seed, q, 6 if q == 2 else 4)
    assert verify_fic_code(p, c).passed
    assert check_exclusive_law(p, c).passed
    b = min_length_bounds(p)
    assert b.lower <= b.upper <= c.length
    assert verify_fic_code(p, b.code).passed


def test_unknown_has_block_in_decoder_layout():
    p = xor_exchange()
    with pytest.raises(UnknownBlock):
        verify_fic_code(p, FicCode(1, P("Z1") + P("Z2"), {"A": P("Z2"), "B": C + P("Z1")}))


def test_sampled_index_verification():
    r = verify_fic_code(table3_problem(), table3_code(), mode=Sampled(300, 1))
    assert r.verdict == "pass-sampled" and r.checked == 300


def test_select_in_want():
    p = FicProblem(2, (("Z", 2),), (Client("A", (), (Select(P("Z"), (1,)),)),))
    assert verify_fic_code(p, FicCode(1, P("Z")[1], {"A": C})).passed


def test_witnesses_capped_per_subject():
    p = FicProblem(2, tuple((f"Z{k}", 1) for k in range(1, 6)), (Client("A", (), (P("Z1"),)), Client("B", ("Z1",), (P("Z1"),))))
    r = verify_fic_code(p, FicCode(1, Const((0,)), {"A": C, "B": P("Z1")}))
    assert r.verdict == "fail" and r.checked == 32
    assert len(r.witnesses) == 10 and all(w.subject == "A" for w in r.witnesses)
    inputs = [tuple(w.input) for w in r.witnesses]
    assert inputs == sorted(inputs)


def test_oversized_decoder_table_is_refused():
    msgs = tuple((f"Z{k}", 1) for k in range(1, 18))
    p = FicProblem(2, msgs + (("Z18", 1),), (Client("A", tuple(m for m, _ in msgs), (P("Z18"),)),))
    with pytest.raises(TableTooLarge):
        min_length_bounds(p)
