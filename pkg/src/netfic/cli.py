"""Command-line workbench: validate, verify, reduce and convert instance files.

Exit status is 0 on pass, 1 on fail and 2 on usage or parse errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import __version__
from .algebra import DEFAULT_SAMPLES, SymbolVec, default_cap, format_expr, resolve_mode, simplify
from .errors import InstanceSemanticError, InstanceSyntaxError, NetficError
from .examples import BUILTINS, builtin
from .fic import FicCode, FicProblem, check_exclusive_law, min_length_bounds, verify_fic_code
from .instances import (
    InstanceFile,
    dumps,
    expr_to_dict,
    map_to_dict,
    parse_instance,
    serialize_instance,
)
from .netcomp import NetProblem, ancestral_order, derive_global_kernels, verify_net_code
from .reductions import (
    FicToNcMap,
    NcToFicMap,
    check_bijection,
    fic_code_to_nc_code,
    fic_code_to_nc_code_gadget,
    fic_to_nc,
    nc_code_to_fic_code,
    nc_code_to_fic_code_gadget,
    nc_to_fic,
)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# Input / output helpers
# ---------------------------------------------------------------------------


def _read_text(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    if source.startswith("example:"):
        name = source.removeprefix("example:")
        if name not in BUILTINS:
            raise UsageError(f"unknown example {name!r}; choose from {', '.join(BUILTINS)}")
        return serialize_instance(builtin(name))
    try:
        with open(source, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {source}: {exc.strerror}") from None


def load(source: str) -> InstanceFile:
    return parse_instance(_read_text(source))


def _emit(args, text: str, out) -> None:
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)


def _mode(args, width: int, q: int):
    samples = args.samples if args.samples is not None else DEFAULT_SAMPLES
    return resolve_mode(width, q, args.mode, cap=args.cap, samples=samples, seed=args.seed)


def _require_code(inst: InstanceFile, what: str):
    if inst.code is None:
        raise UsageError(f"{what} needs an instance with an embedded code")
    return inst.code


def _require_map(inst: InstanceFile, kind: type, what: str):
    mapping = inst.reduction()
    if not isinstance(mapping, kind):
        wanted = "nc2fic" if kind is NcToFicMap else "fic2nc"
        raise UsageError(f"{what} needs an instance produced by `reduce {wanted}` (meta.reduction missing)")
    return mapping


def _require_kind(inst: InstanceFile, kind: str, what: str):
    if inst.kind != kind:
        raise UsageError(f"{what} expects a {kind} instance, got {inst.kind}")


def _report_out(args, report, out) -> int:
    if args.json:
        _emit(args, dumps(report.to_dict(timing=args.timing)), out)
    else:
        text = report.summary()
        if args.timing and report.elapsed_ms is not None:
            text += f"\n  elapsed: {report.elapsed_ms:.1f} ms"
        _emit(args, text + "\n", out)
    return EXIT_PASS if report.passed else EXIT_FAIL


def _restriction_point(text: str | None, q: int, n: int) -> SymbolVec | None:
    if text is None:
        return None
    try:
        if q == 2:
            return SymbolVec.from_hex(text, n)
        values = tuple(int(v) for v in text.split(","))
    except (ValueError, NetficError) as exc:
        raise UsageError(f"--m: {exc}") from None
    if len(values) != n:
        raise UsageError(f"--m: expected {n} comma-separated symbols, got {len(values)}")
    try:
        return SymbolVec(q, values)
    except NetficError as exc:
        raise UsageError(f"--m: {exc}") from None


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_validate(args, out) -> int:
    text = _read_text(args.file)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceSyntaxError(f"$ (line {exc.lineno}, column {exc.colno})", exc.msg) from None
    findings: list[str] = []
    kind = None
    try:
        inst = parse_instance(text)
        kind = inst.kind
    except InstanceSemanticError as exc:
        findings.append(str(exc))
        if isinstance(obj, dict):
            kind = obj.get("type")
    valid = not findings
    if args.json:
        _emit(args, dumps({"valid": valid, "type": kind, "findings": findings}), out)
    else:
        lines = [f"{args.file}: {'valid' if valid else 'INVALID'} ({kind})"]
        lines += [f"  {f}" for f in findings]
        _emit(args, "\n".join(lines) + "\n", out)
    return EXIT_PASS if valid else EXIT_FAIL


def cmd_derive_global(args, out) -> int:
    inst = load(args.file)
    _require_kind(inst, "netcomp", "derive-global")
    code = _require_code(inst, "derive-global")
    p = inst.problem
    order = ancestral_order(p)
    F = derive_global_kernels(p, code, order)
    edge_order = [e for e in order if e in F]
    if args.json:
        doc = {
            "order": edge_order,
            "kernels": {e: expr_to_dict(simplify(F[e], p.q), p.q) for e in edge_order},
        }
        _emit(args, dumps(doc), out)
    else:
        lines = [f"{e}: {format_expr(simplify(F[e], p.q), p.q)}" for e in edge_order]
        _emit(args, "\n".join(lines) + "\n", out)
    return EXIT_PASS


def cmd_verify(args, out) -> int:
    inst = load(args.file)
    code = _require_code(inst, "verify")
    p = inst.problem
    if isinstance(p, NetProblem):
        if args.exclusive_law:
            raise UsageError("--exclusive-law applies to index-coding instances")
        report = verify_net_code(p, code, _mode(args, p.n_k, p.q))
    else:
        mode = _mode(args, p.n_k, p.q)
        report = check_exclusive_law(p, code, mode) if args.exclusive_law else verify_fic_code(p, code, mode)
    return _report_out(args, report, out)


def cmd_bijection(args, out) -> int:
    inst = load(args.file)
    _require_kind(inst, "fic", "bijection")
    code = _require_code(inst, "bijection")
    mapping = _require_map(inst, NcToFicMap, "bijection")
    cap = args.cap if args.cap is not None else default_cap()
    return _report_out(args, check_bijection(inst.problem, code, mapping, cap), out)


def cmd_bounds(args, out) -> int:
    inst = load(args.file)
    _require_kind(inst, "fic", "bounds")
    p: FicProblem = inst.problem
    bounds = min_length_bounds(p, args.cap)
    if args.emit_code:
        witness = InstanceFile("fic", p, bounds.code, {"title": f"coloring code for {inst.title}".strip()})
        with open(args.emit_code, "w", encoding="utf-8") as fh:
            fh.write(serialize_instance(witness))
    if args.json:
        _emit(args, dumps(bounds.to_dict()), out)
    else:
        chi = bounds.chromatic if bounds.chromatic is not None else "unknown"
        lines = [
            f"lower: {bounds.lower}",
            f"upper: {bounds.upper}",
            f"regime: {bounds.regime}",
            f"confusion graph: {bounds.n_vertices} vertices, {bounds.n_edges} edges",
            f"chromatic number: {chi} (clique {bounds.clique}, colors used {bounds.colors})",
        ]
        _emit(args, "\n".join(lines) + "\n", out)
    return EXIT_PASS


def _converted(args, problem, code, mapping, title: str, out) -> int:
    meta = {"title": title}
    if mapping is not None:
        meta["reduction"] = map_to_dict(mapping)
    _emit(args, serialize_instance(InstanceFile("netcomp" if isinstance(problem, NetProblem) else "fic", problem, code, meta)), out)
    return EXIT_PASS


def cmd_reduce(args, out) -> int:
    inst = load(args.file)
    if args.direction == "nc2fic":
        _require_kind(inst, "netcomp", "reduce nc2fic")
        p_fic, mapping = nc_to_fic(inst.problem)
        return _converted(args, p_fic, None, mapping, f"index-coding image of {inst.title}".strip(), out)
    _require_kind(inst, "fic", "reduce fic2nc")
    if args.len is None:
        raise UsageError("reduce fic2nc needs --len")
    p_nc, mapping = fic_to_nc(inst.problem, args.len)
    return _converted(args, p_nc, None, mapping, f"bottleneck network for {inst.title}".strip(), out)


def cmd_convert(args, out) -> int:
    inst = load(args.file)
    what = f"convert {args.direction}"
    if args.direction == "nc2fic":
        _require_kind(inst, "netcomp", what)
        code = _require_code(inst, what)
        p_fic, mapping = nc_to_fic(inst.problem)
        c_fic = nc_code_to_fic_code(inst.problem, code, mapping)
        return _converted(args, p_fic, c_fic, mapping, f"index-coding image of {inst.title}".strip(), out)
    if args.direction == "fic2nc":
        _require_kind(inst, "fic", what)
        code = _require_code(inst, what)
        mapping = _require_map(inst, NcToFicMap, what)
        m = _restriction_point(args.m, inst.problem.q, mapping.source.n_e)
        c_nc = fic_code_to_nc_code(inst.problem, code, mapping, m)
        return _converted(args, mapping.source, c_nc, None, f"network code recovered from {inst.title}".strip(), out)
    if args.direction == "gadget-fic2nc":
        _require_kind(inst, "fic", what)
        code: FicCode = _require_code(inst, what)
        p_nc, mapping = fic_to_nc(inst.problem, code.length)
        c_nc = fic_code_to_nc_code_gadget(inst.problem, code, mapping)
        return _converted(args, p_nc, c_nc, mapping, f"bottleneck network for {inst.title}".strip(), out)
    _require_kind(inst, "netcomp", what)
    code = _require_code(inst, what)
    mapping = _require_map(inst, FicToNcMap, what)
    c_fic = nc_code_to_fic_code_gadget(inst.problem, code, mapping)
    return _converted(args, mapping.source, c_fic, None, f"index code recovered from {inst.title}".strip(), out)


def cmd_example(args, out) -> int:
    if args.name not in BUILTINS:
        raise UsageError(f"unknown example {args.name!r}; choose from {', '.join(BUILTINS)}")
    _emit(args, serialize_instance(builtin(args.name)), out)
    return EXIT_PASS


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=("exhaustive", "sampled"), help="enumeration mode (default: exhaustive up to the cap)")
    common.add_argument("--cap", type=_positive, help="largest domain enumerated exhaustively (default 2^24 or $NETFIC_CAP)")
    common.add_argument("--samples", type=_positive, help="sample count in sampled mode (default 10^6)")
    common.add_argument("--seed", type=int, default=1, help="sampling seed (default 1)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--timing", action="store_true", help="include elapsed time in reports")
    common.add_argument("-o", "--output", help="write output to a file instead of stdout")

    parser = _Parser(prog="netfic", description="Network computation and functional index coding workbench.")
    parser.add_argument("--version", action="version", version=f"netfic {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        sp.set_defaults(func=func)
        return sp

    file_help = "instance file, '-' for stdin, or example:NAME"
    add("validate", cmd_validate, "check an instance file").add_argument("file", help=file_help)
    add("derive-global", cmd_derive_global, "print the global kernel of every edge").add_argument("file", help=file_help)

    sp = add("verify", cmd_verify, "verify the embedded code (network or index-coding, auto-detected)")
    sp.add_argument("file", help=file_help)
    sp.add_argument("--exclusive-law", action="store_true", help="check the exclusive law instead of decoding")

    add("bijection", cmd_bijection, "check that a converted index code is a bijection in the edge payloads").add_argument(
        "file", help=file_help
    )

    sp = add("bounds", cmd_bounds, "confusion-graph bounds on the minimum index-code length")
    sp.add_argument("file", help=file_help)
    sp.add_argument("--emit-code", metavar="PATH", help="write the coloring code achieving the upper bound")

    sp = add("reduce", cmd_reduce, "map a problem to its counterpart")
    sp.add_argument("direction", choices=("nc2fic", "fic2nc"))
    sp.add_argument("file", help=file_help)
    sp.add_argument("--len", type=_positive, help="bottleneck length for fic2nc")

    sp = add("convert", cmd_convert, "map a problem together with its code")
    sp.add_argument("direction", choices=("nc2fic", "fic2nc", "gadget-nc2fic", "gadget-fic2nc"))
    sp.add_argument("file", help=file_help)
    sp.add_argument("--m", metavar="HEX", help="restriction codeword for fic2nc (hex for q=2, comma-separated otherwise)")

    sp = add("example", cmd_example, "emit a built-in instance")
    sp.add_argument("name", choices=tuple(BUILTINS))
    return parser


def run_cli(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except (InstanceSyntaxError, InstanceSemanticError) as exc:
        print(f"parse error: {exc}", file=err)
        return EXIT_USAGE
    except NetficError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run_cli())
