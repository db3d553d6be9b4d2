"""JSON instance files: problems, optional embedded codes and reduction maps.

Serialization is canonical (sorted keys, two-space indent, integers only), so
``serialize(parse(text))`` is a fixed point for canonical input.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .algebra import (
    Add,
    BlockLayout,
    Compose,
    Concat,
    Const,
    FuncExpr,
    Majority,
    MaxInt,
    Neg,
    Proj,
    Select,
    SymbolVec,
    Table,
)
from .errors import InstanceSemanticError, InstanceSyntaxError, NetficError
from .fic import Client, FicCode, FicProblem, check_code as check_fic_code, validate_fic_problem
from .netcomp import Edge, NetCode, NetProblem, Sink, SourceEdge, check_code, validate_problem
from .reductions import FicToNcMap, NcToFicMap

FORMAT = "netfic"
VERSION = 1


@dataclass
class InstanceFile:
    kind: str  # "netcomp" or "fic"
    problem: NetProblem | FicProblem
    code: NetCode | FicCode | None = None
    meta: dict = field(default_factory=dict)

    @property
    def title(self) -> str:
        return self.meta.get("title", "")

    def reduction(self) -> NcToFicMap | FicToNcMap | None:
        """The reduction map recorded when this instance was produced by a conversion."""
        raw = self.meta.get("reduction")
        return None if raw is None else map_from_dict(raw, "$.meta.reduction")


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


def expr_to_dict(e: FuncExpr, q: int) -> dict:
    if isinstance(e, Proj):
        return {"op": "proj", "block": e.block}
    if isinstance(e, Const):
        if q == 2:
            return {"op": "const", "width": len(e.values), "hex": SymbolVec(2, e.values).to_hex()}
        return {"op": "const", "value": list(e.values)}
    if isinstance(e, Add):
        return {"op": "add", "args": [expr_to_dict(a, q) for a in e.args]}
    if isinstance(e, Neg):
        return {"op": "neg", "arg": expr_to_dict(e.arg, q)}
    if isinstance(e, MaxInt):
        return {"op": "max", "args": [expr_to_dict(a, q) for a in e.args]}
    if isinstance(e, Majority):
        return {"op": "maj", "args": [expr_to_dict(a, q) for a in e.args]}
    if isinstance(e, Concat):
        return {"op": "concat", "args": [expr_to_dict(a, q) for a in e.args]}
    if isinstance(e, Select):
        return {"op": "select", "arg": expr_to_dict(e.arg, q), "indices": list(e.indices)}
    if isinstance(e, Table):
        return {
            "op": "table",
            "inputs": [{"block": n, "width": w} for n, w in e.inputs],
            "rows": [list(r) for r in e.rows],
        }
    if isinstance(e, Compose):
        return {
            "op": "compose",
            "outer": expr_to_dict(e.outer, q),
            "bind": {n: expr_to_dict(b, q) for n, b in e.bindings},
        }
    raise TypeError(f"not a FuncExpr: {e!r}")


def _get(obj: Any, key: str, path: str, kind=None):
    if not isinstance(obj, dict):
        raise InstanceSyntaxError(path, "expected an object")
    if key not in obj:
        raise InstanceSyntaxError(f"{path}.{key}", "missing field")
    value = obj[key]
    if kind is not None and not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise InstanceSyntaxError(f"{path}.{key}", f"expected {name}")
    return value


def _list(obj, key, path):
    return _get(obj, key, path, list)


def expr_from_dict(obj: Any, path: str = "$") -> FuncExpr:
    op = _get(obj, "op", path, str)
    if op == "proj":
        return Proj(_get(obj, "block", path, str))
    if op == "const":
        if "hex" in obj:
            width = _get(obj, "width", path, int)
            try:
                return Const(SymbolVec.from_hex(_get(obj, "hex", path, str), width).symbols)
            except (ValueError, NetficError) as exc:
                raise InstanceSyntaxError(f"{path}.hex", str(exc)) from None
        values = _list(obj, "value", path)
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in values):
            raise InstanceSyntaxError(f"{path}.value", "expected integers")
        return Const(tuple(values))
    if op in ("add", "max", "maj", "concat"):
        args = tuple(expr_from_dict(a, f"{path}.args[{i}]") for i, a in enumerate(_list(obj, "args", path)))
        try:
            return {"add": Add, "max": MaxInt, "maj": Majority, "concat": Concat}[op](args)
        except ValueError as exc:
            raise InstanceSyntaxError(f"{path}.args", str(exc)) from None
    if op == "neg":
        return Neg(expr_from_dict(_get(obj, "arg", path), f"{path}.arg"))
    if op == "select":
        indices = _list(obj, "indices", path)
        return Select(expr_from_dict(_get(obj, "arg", path), f"{path}.arg"), tuple(indices))
    if op == "table":
        inputs = []
        for i, item in enumerate(_list(obj, "inputs", path)):
            p = f"{path}.inputs[{i}]"
            inputs.append((_get(item, "block", p, str), _get(item, "width", p, int)))
        try:
            return Table(tuple(inputs), tuple(tuple(r) for r in _list(obj, "rows", path)))
        except (ValueError, TypeError) as exc:
            raise InstanceSyntaxError(f"{path}.rows", str(exc)) from None
    if op == "compose":
        bind = _get(obj, "bind", path, dict)
        return Compose(
            expr_from_dict(_get(obj, "outer", path), f"{path}.outer"),
            {n: expr_from_dict(b, f"{path}.bind.{n}") for n, b in bind.items()},
        )
    raise InstanceSyntaxError(f"{path}.op", f"unknown operator {op!r}")


# ---------------------------------------------------------------------------
# Problems and codes
# ---------------------------------------------------------------------------


def problem_to_dict(p: NetProblem | FicProblem) -> dict:
    if isinstance(p, NetProblem):
        return {
            "type": "netcomp",
            "q": p.q,
            "sources": [{"id": s.id, "node": s.node, "message": s.message, "width": s.width} for s in p.sources],
            "edges": [{"id": e.id, "tail": e.tail, "head": e.head, "capacity": e.capacity} for e in p.edges],
            "sinks": [{"node": t.node, "demands": [expr_to_dict(g, p.q) for g in t.demands]} for t in p.sinks],
        }
    return {
        "type": "fic",
        "q": p.q,
        "messages": [{"name": n, "width": w} for n, w in p.messages.blocks],
        "clients": [
            {"id": c.id, "has": list(c.has), "want": [expr_to_dict(w, p.q) for w in c.wants]} for c in p.clients
        ],
    }


def code_to_dict(c: NetCode | FicCode, q: int) -> dict:
    if isinstance(c, NetCode):
        return {
            "kernels": {k: expr_to_dict(v, q) for k, v in c.kernels.items()},
            "decoders": {k: expr_to_dict(v, q) for k, v in c.decoders.items()},
        }
    return {
        "length": c.length,
        "encoder": expr_to_dict(c.encoder, q),
        "decoders": {k: expr_to_dict(v, q) for k, v in c.decoders.items()},
    }


def _q(obj, path) -> int:
    q = _get(obj, "q", path, int)
    if not 2 <= q <= 251 or any(q % d == 0 for d in range(2, int(q**0.5) + 1)):
        raise InstanceSemanticError(f"{path}.q", f"q = {q} is not a prime in [2, 251]")
    return q


def problem_from_dict(obj: Any, path: str = "$") -> NetProblem | FicProblem:
    kind = _get(obj, "type", path, str)
    q = _q(obj, path)
    if kind == "netcomp":
        sources = []
        for i, s in enumerate(_list(obj, "sources", path)):
            p = f"{path}.sources[{i}]"
            sources.append(SourceEdge(_get(s, "id", p, str), _get(s, "node", p, str), _get(s, "message", p, str), _get(s, "width", p, int)))
        edges = []
        for i, e in enumerate(_list(obj, "edges", path)):
            p = f"{path}.edges[{i}]"
            edges.append(Edge(_get(e, "id", p, str), _get(e, "tail", p, str), _get(e, "head", p, str), _get(e, "capacity", p, int)))
        sinks = []
        for i, t in enumerate(_list(obj, "sinks", path)):
            p = f"{path}.sinks[{i}]"
            demands = tuple(expr_from_dict(g, f"{p}.demands[{j}]") for j, g in enumerate(_list(t, "demands", p)))
            sinks.append(Sink(_get(t, "node", p, str), demands))
        problem = NetProblem(q, tuple(sources), tuple(edges), tuple(sinks))
        findings = validate_problem(problem)
        if findings:
            raise InstanceSemanticError(path, "; ".join(map(str, findings)))
        return problem
    if kind == "fic":
        blocks = []
        for i, m in enumerate(_list(obj, "messages", path)):
            p = f"{path}.messages[{i}]"
            blocks.append((_get(m, "name", p, str), _get(m, "width", p, int)))
        try:
            layout = BlockLayout(tuple(blocks))
        except ValueError as exc:
            raise InstanceSemanticError(f"{path}.messages", str(exc)) from None
        clients = []
        for i, c in enumerate(_list(obj, "clients", path)):
            p = f"{path}.clients[{i}]"
            has = _list(c, "has", p)
            if not all(isinstance(h, str) for h in has):
                raise InstanceSyntaxError(f"{p}.has", "expected block names")
            wants = tuple(expr_from_dict(w, f"{p}.want[{j}]") for j, w in enumerate(_list(c, "want", p)))
            clients.append(Client(_get(c, "id", p, str), tuple(has), wants))
        problem = FicProblem(q, layout, tuple(clients))
        findings = validate_fic_problem(problem)
        if findings:
            raise InstanceSemanticError(path, "; ".join(map(str, findings)))
        return problem
    raise InstanceSyntaxError(f"{path}.type", f"unknown problem type {kind!r}")


def code_from_dict(obj: Any, problem, path: str = "$.code") -> NetCode | FicCode:
    decoders = {k: expr_from_dict(v, f"{path}.decoders.{k}") for k, v in _get(obj, "decoders", path, dict).items()}
    try:
        if isinstance(problem, NetProblem):
            kernels = {k: expr_from_dict(v, f"{path}.kernels.{k}") for k, v in _get(obj, "kernels", path, dict).items()}
            code = NetCode(kernels, decoders)
            check_code(problem, code)
        else:
            code = FicCode(_get(obj, "length", path, int), expr_from_dict(_get(obj, "encoder", path), f"{path}.encoder"), decoders)
            check_fic_code(problem, code)
    except InstanceSyntaxError:
        raise
    except NetficError as exc:
        raise InstanceSemanticError(path, f"{type(exc).__name__}: {exc}") from None
    return code


# ---------------------------------------------------------------------------
# Reduction maps
# ---------------------------------------------------------------------------


def map_to_dict(m: NcToFicMap | FicToNcMap) -> dict:
    if isinstance(m, NcToFicMap):
        return {
            "kind": "nc2fic",
            "source": problem_to_dict(m.source),
            "edge_order": list(m.edge_order),
            "x_blocks": dict(m.x_blocks),
            "y_blocks": dict(m.y_blocks),
            "edge_clients": dict(m.edge_clients),
            "sink_clients": dict(m.sink_clients),
            "all_client": m.all_client,
        }
    return {
        "kind": "fic2nc",
        "source": problem_to_dict(m.source),
        "length": m.length,
        "source_nodes": dict(m.source_nodes),
        "sink_nodes": dict(m.sink_nodes),
        "v_b": m.v_b,
        "v_b_out": m.v_b_out,
        "source_edges": dict(m.source_edges),
        "e1": [{"message": k, "client": c, "edge": e} for (k, c), e in m.e1.items()],
        "e2": dict(m.e2),
        "e3": dict(m.e3),
        "e_b": m.e_b,
    }


def map_from_dict(obj: Any, path: str = "$") -> NcToFicMap | FicToNcMap:
    kind = _get(obj, "kind", path, str)
    source = problem_from_dict(_get(obj, "source", path, dict), f"{path}.source")
    if kind == "nc2fic":
        return NcToFicMap(
            source,
            tuple(_list(obj, "edge_order", path)),
            dict(_get(obj, "x_blocks", path, dict)),
            dict(_get(obj, "y_blocks", path, dict)),
            dict(_get(obj, "edge_clients", path, dict)),
            dict(_get(obj, "sink_clients", path, dict)),
            _get(obj, "all_client", path, str),
        )
    if kind == "fic2nc":
        e1 = {}
        for i, item in enumerate(_list(obj, "e1", path)):
            p = f"{path}.e1[{i}]"
            e1[(_get(item, "message", p, str), _get(item, "client", p, str))] = _get(item, "edge", p, str)
        return FicToNcMap(
            source=source,
            length=_get(obj, "length", path, int),
            source_nodes=dict(_get(obj, "source_nodes", path, dict)),
            sink_nodes=dict(_get(obj, "sink_nodes", path, dict)),
            v_b=_get(obj, "v_b", path, str),
            v_b_out=_get(obj, "v_b_out", path, str),
            source_edges=dict(_get(obj, "source_edges", path, dict)),
            e1=e1,
            e2=dict(_get(obj, "e2", path, dict)),
            e3=dict(_get(obj, "e3", path, dict)),
            e_b=_get(obj, "e_b", path, str),
        )
    raise InstanceSyntaxError(f"{path}.kind", f"unknown reduction kind {kind!r}")


# ---------------------------------------------------------------------------
# Whole files
# ---------------------------------------------------------------------------


def instance_to_dict(inst: InstanceFile) -> dict:
    out = {"format": FORMAT, "version": VERSION}
    out.update(problem_to_dict(inst.problem))
    if inst.code is not None:
        out["code"] = code_to_dict(inst.code, inst.problem.q)
    if inst.meta:
        out["meta"] = inst.meta
    return out


def serialize_instance(inst: InstanceFile) -> str:
    return dumps(instance_to_dict(inst))


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def instance_from_dict(obj: Any) -> InstanceFile:
    if not isinstance(obj, dict):
        raise InstanceSyntaxError("$", "expected an object")
    version = obj.get("version", VERSION)
    if version != VERSION:
        raise InstanceSemanticError("$.version", f"unsupported schema version {version!r}")
    problem = problem_from_dict(obj, "$")
    code = code_from_dict(obj["code"], problem) if obj.get("code") is not None else None
    meta = obj.get("meta") or {}
    if not isinstance(meta, dict):
        raise InstanceSyntaxError("$.meta", "expected an object")
    inst = InstanceFile(problem_kind(problem), problem, code, dict(meta))
    if "reduction" in meta:
        inst.reduction()
    return inst


def parse_instance(text: str) -> InstanceFile:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceSyntaxError(f"$ (line {exc.lineno}, column {exc.colno})", exc.msg) from None
    return instance_from_dict(obj)


def problem_kind(p) -> str:
    return "netcomp" if isinstance(p, NetProblem) else "fic"
