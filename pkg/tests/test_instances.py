import json

import pytest

from netfic.algebra import Compose, Const, Proj, Table
from netfic.errors import InstanceSemanticError, InstanceSyntaxError
from netfic.examples import BUILTINS, builtin, builtin_examples, fig2
from netfic.fic import Client, FicProblem, min_length_bounds
from netfic.instances import (
    InstanceFile,
    expr_from_dict,
    expr_to_dict,
    instance_to_dict,
    map_to_dict,
    parse_instance,
    serialize_instance,
)
from netfic.reductions import fic_to_nc, nc_to_fic

P = Proj


@pytest.mark.parametrize("name", list(BUILTINS))
def test_builtin_round_trip(name):
    inst = builtin(name)
    text = serialize_instance(inst)
    again = parse_instance(text)
    assert again.problem == inst.problem
    assert again.code == inst.code
    assert again.meta == inst.meta
    assert serialize_instance(again) == text


def test_builtin_catalog():
    names = [i.title for i in builtin_examples()]
    assert len(names) == 4
    fig1 = builtin("fig1")
    assert len(fig1.problem.edges) == 13 and len(fig1.problem.sources) == 11
    assert all(s.width == 10 for s in fig1.problem.sources)
    assert all(s.width == 1 for s in builtin("fig1-scaled").problem.sources)
    with pytest.raises(KeyError):
        builtin("fig9")


def test_fig2_file_shape():
    inst = parse_instance(serialize_instance(fig2()))
    p = inst.problem
    assert inst.kind == "netcomp"
    assert (len(p.sources), len(p.edges), len(p.sinks)) == (4, 18, 6)


def test_q_must_be_prime():
    doc = instance_to_dict(fig2())
    doc["q"] = 4
    with pytest.raises(InstanceSemanticError) as info:
        parse_instance(json.dumps(doc))
    assert "$.q" in str(info.value) and "not a prime" in str(info.value)


def test_unknown_has_block():
    p = FicProblem(2, (("Z1", 1),), (Client("A", ("Z1",), (P("Z1"),)),))
    doc = instance_to_dict(InstanceFile("fic", p))
    doc["clients"][0]["has"] = ["Z7"]
    with pytest.raises(InstanceSemanticError) as info:
        parse_instance(json.dumps(doc))
    assert "UnknownBlock" in str(info.value) and "Z7" in str(info.value)


def test_syntax_errors_carry_paths():
    doc = instance_to_dict(fig2())
    del doc["edges"][3]["tail"]
    with pytest.raises(InstanceSyntaxError) as info:
        parse_instance(json.dumps(doc))
    assert str(info.value).startswith("$.edges[3].tail")

    doc = instance_to_dict(fig2())
    doc["sinks"][1]["demands"][0] = {"op": "pow", "args": []}
    with pytest.raises(InstanceSyntaxError) as info:
        parse_instance(json.dumps(doc))
    assert str(info.value).startswith("$.sinks[1].demands[0].op")

    with pytest.raises(InstanceSyntaxError) as info:
        parse_instance("{ not json")
    assert "line 1" in str(info.value)

    doc = instance_to_dict(fig2())
    doc["type"] = "graph"
    with pytest.raises(InstanceSyntaxError):
        parse_instance(json.dumps(doc))


def test_bad_code_is_semantic_error():
    doc = instance_to_dict(fig2())
    del doc["code"]["kernels"]["e5"]
    with pytest.raises(InstanceSemanticError) as info:
        parse_instance(json.dumps(doc))
    assert "$.code" in str(info.value) and "e5" in str(info.value)


def test_const_encodings():
    assert expr_to_dict(Const((0, 1, 1)), 2) == {"op": "const", "width": 3, "hex": "3"}
    assert expr_to_dict(Const((2, 0)), 3) == {"op": "const", "value": [2, 0]}
    assert expr_from_dict({"op": "const", "width": 3, "hex": "3"}) == Const((0, 1, 1))
    assert expr_from_dict({"op": "const", "width": 0, "hex": "0"}) == Const(())
    with pytest.raises(InstanceSyntaxError):
        expr_from_dict({"op": "const", "width": 2, "hex": "f"})


def test_table_and_compose_round_trip():
    t = Table((("a", 1),), ((1,), (0,)))
    e = Compose(t, {"a": P("x") + P("y")})
    assert expr_from_dict(expr_to_dict(e, 2)) == e


def test_reduction_maps_are_embedded():
    p_fic, m = nc_to_fic(fig2().problem)
    inst = InstanceFile("fic", p_fic, None, {"reduction": map_to_dict(m)})
    again = parse_instance(serialize_instance(inst))
    assert again.reduction() == m

    net, g = fic_to_nc(builtin("table3").problem, 3)
    inst = InstanceFile("netcomp", net, None, {"reduction": map_to_dict(g)})
    assert parse_instance(serialize_instance(inst)).reduction() == g


def test_empty_code_round_trip():
    p = FicProblem(2, (("Z1", 1),), (Client("A", (), (Const((1,)),)),))
    code = min_length_bounds(p).code
    inst = InstanceFile("fic", p, code)
    assert parse_instance(serialize_instance(inst)).code == code


def test_q3_instance_round_trip():
    p = FicProblem(3, (("Z1", 2),), (Client("A", (), (P("Z1")[0] + Const((2,)),)),))
    inst = InstanceFile("fic", p)
    text = serialize_instance(inst)
    assert '"value"' in text
    assert parse_instance(text).problem == p
