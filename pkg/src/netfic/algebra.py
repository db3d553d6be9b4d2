"""Prime-field arithmetic, block layouts and the function-expression language.

Every map in the workbench (demands, kernels, encoders, decoders) is a
:class:`FuncExpr` tree.  Expressions are evaluated over *batches* of
realizations: an environment maps block names to ``(n, width)`` integer
arrays, and the result is an ``(n, output_width)`` array.  Evaluating one
vector is the ``n == 1`` case.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import CapExceeded, DomainViolation, UnknownBlock, WidthMismatch

DEFAULT_CAP = 2**24
DEFAULT_SAMPLES = 10**6
BATCH_SIZE = 2**16


def default_cap() -> int:
    """Enumeration cap, overridable with the ``NETFIC_CAP`` environment variable."""
    raw = os.environ.get("NETFIC_CAP")
    return int(raw, 0) if raw else DEFAULT_CAP


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


@dataclass(frozen=True)
class FieldSpec:
    q: int

    def __post_init__(self):
        if not isinstance(self.q, int) or not 2 <= self.q <= 251:
            raise ValueError(f"field size must be an integer in [2, 251], got {self.q!r}")
        if not _is_prime(self.q):
            raise ValueError(f"field size {self.q} is not prime")


@dataclass(frozen=True)
class SymbolVec:
    """A fixed-length vector over F_q."""

    q: int
    symbols: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        for s in self.symbols:
            if not 0 <= s < self.q:
                raise DomainViolation(f"symbol {s} outside [0, {self.q})")

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    @classmethod
    def zeros(cls, q: int, n: int) -> "SymbolVec":
        return cls(q, (0,) * n)

    @classmethod
    def ones(cls, q: int, n: int) -> "SymbolVec":
        return cls(q, (1,) * n)

    @classmethod
    def from_hex(cls, text: str, n: int) -> "SymbolVec":
        """Parse a binary vector of length ``n`` written in hex, first symbol most significant."""
        text = text.lower().removeprefix("0x") or "0"
        value = int(text, 16)
        if value >= 2**n:
            raise DomainViolation(f"hex value {text!r} does not fit in {n} bits")
        return cls(2, tuple((value >> (n - 1 - i)) & 1 for i in range(n)))

    def to_hex(self) -> str:
        if self.q != 2:
            raise DomainViolation("hex form is only defined for q = 2")
        value = 0
        for s in self.symbols:
            value = (value << 1) | s
        return format(value, "x").zfill(max(1, -(-len(self.symbols) // 4)))


@dataclass(frozen=True)
class BlockLayout:
    """Ordered named blocks; a realization is the concatenation of its blocks."""

    blocks: tuple[tuple[str, int], ...]

    def __post_init__(self):
        blocks = tuple((str(n), int(w)) for n, w in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        seen = set()
        for name, width in blocks:
            if name in seen:
                raise ValueError(f"duplicate block name {name!r}")
            if width < 0:
                raise ValueError(f"block {name!r} has negative width")
            seen.add(name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.blocks)

    @property
    def widths(self) -> dict[str, int]:
        return dict(self.blocks)

    @property
    def total_width(self) -> int:
        return sum(w for _, w in self.blocks)

    def offsets(self) -> dict[str, tuple[int, int]]:
        out, pos = {}, 0
        for name, width in self.blocks:
            out[name] = (pos, pos + width)
            pos += width
        return out

    def split(self, x: np.ndarray) -> dict[str, np.ndarray]:
        """Cut a ``(n, total_width)`` batch into a block environment."""
        x = np.atleast_2d(x)
        if x.shape[1] != self.total_width:
            raise WidthMismatch(f"realization has width {x.shape[1]}, layout needs {self.total_width}")
        return {name: x[:, a:b] for name, (a, b) in self.offsets().items()}

    def __add__(self, other: "BlockLayout") -> "BlockLayout":
        return BlockLayout(self.blocks + other.blocks)


# ---------------------------------------------------------------------------
# Expression tree
# ---------------------------------------------------------------------------


class FuncExpr:
    """Base class of expression nodes.  Nodes are immutable."""

    __slots__ = ()

    def __add__(self, other: "FuncExpr") -> "FuncExpr":
        left = self.args if isinstance(self, Add) else (self,)
        right = other.args if isinstance(other, Add) else (other,)
        return Add(left + right)

    def __neg__(self) -> "FuncExpr":
        return Neg(self)

    def __sub__(self, other: "FuncExpr") -> "FuncExpr":
        return self + Neg(other)

    def __getitem__(self, idx) -> "FuncExpr":
        if isinstance(idx, int):
            return Select(self, (idx,))
        if isinstance(idx, slice):
            if idx.stop is None or (idx.start or 0) < 0 or idx.stop < 0:
                raise ValueError("slices of expressions need explicit nonnegative bounds")
            return Select(self, tuple(range(idx.start or 0, idx.stop, idx.step or 1)))
        return Select(self, tuple(idx))

    def children(self) -> tuple["FuncExpr", ...]:
        return ()


@dataclass(frozen=True)
class Proj(FuncExpr):
    block: str


@dataclass(frozen=True)
class Const(FuncExpr):
    values: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))


@dataclass(frozen=True)
class Add(FuncExpr):
    args: tuple[FuncExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if not self.args:
            raise ValueError("Add needs at least one argument")

    def children(self):
        return self.args


@dataclass(frozen=True)
class Neg(FuncExpr):
    arg: FuncExpr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class MaxInt(FuncExpr):
    """Pairwise maximum of blocks read as base-q integers, first symbol most significant."""

    args: tuple[FuncExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if not self.args:
            raise ValueError("MaxInt needs at least one argument")

    def children(self):
        return self.args


@dataclass(frozen=True)
class Majority(FuncExpr):
    """ab + bc + ca over F_2."""

    args: tuple[FuncExpr, FuncExpr, FuncExpr]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != 3:
            raise ValueError("Majority takes exactly three arguments")

    def children(self):
        return self.args


@dataclass(frozen=True)
class Concat(FuncExpr):
    args: tuple[FuncExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def children(self):
        return self.args


@dataclass(frozen=True)
class Select(FuncExpr):
    """Pick symbols of ``arg`` by position."""

    arg: FuncExpr
    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Table(FuncExpr):
    """Lookup table over the named input blocks.

    Row ``i`` is the output for the ``i``-th input realization in lexicographic
    order of the concatenated inputs.
    """

    inputs: tuple[tuple[str, int], ...]
    rows: tuple[tuple[int, ...], ...]
    _array: np.ndarray = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple((str(n), int(w)) for n, w in self.inputs))
        object.__setattr__(self, "rows", tuple(tuple(int(v) for v in r) for r in self.rows))
        widths = {len(r) for r in self.rows}
        if len(widths) > 1:
            raise WidthMismatch("table rows have unequal widths")
        out_w = widths.pop() if widths else 0
        object.__setattr__(self, "_array", np.asarray(self.rows, dtype=np.int64).reshape(len(self.rows), out_w))

    @property
    def output_width(self) -> int:
        return self._array.shape[1]


@dataclass(frozen=True)
class Compose(FuncExpr):
    """Evaluate ``outer`` in an environment whose blocks are the ``bindings`` values."""

    outer: FuncExpr
    bindings: tuple[tuple[str, FuncExpr], ...]

    def __post_init__(self):
        items = self.bindings.items() if isinstance(self.bindings, Mapping) else self.bindings
        bound = tuple(sorted(((str(n), e) for n, e in items), key=lambda p: p[0]))
        if len({n for n, _ in bound}) != len(bound):
            raise ValueError("duplicate binding name in Compose")
        object.__setattr__(self, "bindings", bound)

    def children(self):
        return (self.outer,) + tuple(e for _, e in self.bindings)


def compose(outer: FuncExpr, bindings: Mapping[str, FuncExpr]) -> FuncExpr:
    """Build ``Compose`` but skip it when it would be a no-op.

    A bare projection is replaced by its binding, and bindings that are all
    identity projections leave ``outer`` unchanged.
    """
    if isinstance(outer, Proj) and outer.block in bindings:
        return bindings[outer.block]
    if all(isinstance(b, Proj) and b.block == name for name, b in bindings.items()):
        if blocks_used(outer) <= set(bindings):
            return outer
    return Compose(outer, dict(bindings))


def linear(matrix: Sequence[Sequence[int]], arg: FuncExpr, q: int) -> FuncExpr:
    """Expression for ``arg @ matrix.T``: output symbol ``i`` is sum_j matrix[i][j] * arg[j].

    Coefficients are realized by repeated addition, so only Add/Neg/Select appear.
    """
    rows = []
    for row in matrix:
        terms: list[FuncExpr] = []
        for j, c in enumerate(row):
            c %= q
            if c == 0:
                continue
            sym = Select(arg, (j,))
            if c == q - 1 and q > 2:
                terms.append(Neg(sym))
            else:
                terms.extend([sym] * c)
        rows.append(Add(tuple(terms)) if terms else Const((0,)))
    return Concat(tuple(rows))


# ---------------------------------------------------------------------------
# Width inference / validation
# ---------------------------------------------------------------------------


def output_width(expr: FuncExpr, widths: Mapping[str, int], q: int) -> int:
    """Check ``expr`` against the block ``widths`` and return its output width.

    Raises UnknownBlock, WidthMismatch or DomainViolation.
    """
    memo: dict[tuple[int, int], int] = {}
    envs: list[Mapping[str, int]] = []  # keeps inner environments alive so their ids stay unique

    def walk(e: FuncExpr, env: Mapping[str, int]) -> int:
        key = (id(e), id(env))
        if key in memo:
            return memo[key]
        if isinstance(e, Proj):
            if e.block not in env:
                raise UnknownBlock(e.block)
            w = env[e.block]
        elif isinstance(e, Const):
            for v in e.values:
                if not 0 <= v < q:
                    raise DomainViolation(f"constant symbol {v} outside [0, {q})")
            w = len(e.values)
        elif isinstance(e, (Add, MaxInt)):
            ws = {walk(a, env) for a in e.args}
            if len(ws) != 1:
                raise WidthMismatch(f"{type(e).__name__} arguments have widths {sorted(ws)}")
            w = ws.pop()
        elif isinstance(e, Neg):
            w = walk(e.arg, env)
        elif isinstance(e, Majority):
            if q != 2:
                raise DomainViolation("Majority is defined only for q = 2")
            for a in e.args:
                if walk(a, env) != 1:
                    raise WidthMismatch("Majority arguments must have width 1")
            w = 1
        elif isinstance(e, Concat):
            w = sum(walk(a, env) for a in e.args)
        elif isinstance(e, Select):
            inner = walk(e.arg, env)
            for i in e.indices:
                if not 0 <= i < inner:
                    raise WidthMismatch(f"select index {i} out of range for width {inner}")
            w = len(e.indices)
        elif isinstance(e, Table):
            in_w = 0
            for name, bw in e.inputs:
                if name not in env:
                    raise UnknownBlock(name)
                if env[name] != bw:
                    raise WidthMismatch(f"table input {name!r} declared width {bw}, layout has {env[name]}")
                in_w += bw
            if len(e.rows) != q**in_w:
                raise WidthMismatch(f"table has {len(e.rows)} rows, domain size is {q}^{in_w}")
            if e._array.size and (e._array.min() < 0 or e._array.max() >= q):
                raise DomainViolation(f"table entries outside [0, {q})")
            w = e.output_width
        elif isinstance(e, Compose):
            inner_env = {name: walk(b, env) for name, b in e.bindings}
            envs.append(inner_env)
            w = walk(e.outer, inner_env)
        else:
            raise TypeError(f"not a FuncExpr: {e!r}")
        memo[key] = w
        return w

    return walk(expr, dict(widths))


def blocks_used(expr: FuncExpr) -> set[str]:
    """Names an expression reads from its (outermost) environment."""
    out: set[str] = set()

    def walk(e):
        if isinstance(e, Proj):
            out.add(e.block)
        elif isinstance(e, Table):
            out.update(n for n, _ in e.inputs)
        elif isinstance(e, Compose):
            for _, b in e.bindings:
                walk(b)
        else:
            for c in e.children():
                walk(c)

    walk(expr)
    return out


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _max_pair(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] == 0:
        return a
    diff = a != b
    first = diff.argmax(axis=1)
    rows = np.arange(a.shape[0])
    a_wins = a[rows, first] > b[rows, first]
    return np.where(a_wins[:, None], a, b)


class _Evaluator:
    def __init__(self, env: Mapping[str, np.ndarray], q: int, n: int):
        self.env = env
        self.q = q
        self.n = n
        self.cache: dict[int, np.ndarray] = {}

    def __call__(self, e: FuncExpr) -> np.ndarray:
        hit = self.cache.get(id(e))
        if hit is not None:
            return hit
        out = self._eval(e)
        self.cache[id(e)] = out
        return out

    def _eval(self, e: FuncExpr) -> np.ndarray:
        q = self.q
        if isinstance(e, Proj):
            try:
                return self.env[e.block]
            except KeyError:
                raise UnknownBlock(e.block) from None
        if isinstance(e, Const):
            return np.broadcast_to(np.asarray(e.values, dtype=np.int64), (self.n, len(e.values)))
        if isinstance(e, Add):
            acc = self(e.args[0])
            for a in e.args[1:]:
                acc = acc + self(a)
            return acc % q if len(e.args) > 1 else acc
        if isinstance(e, Neg):
            return (-self(e.arg)) % q
        if isinstance(e, MaxInt):
            acc = self(e.args[0])
            for a in e.args[1:]:
                acc = _max_pair(acc, self(a))
            return acc
        if isinstance(e, Majority):
            a, b, c = (self(x) for x in e.args)
            return (a * b + b * c + c * a) % q
        if isinstance(e, Concat):
            if not e.args:
                return np.zeros((self.n, 0), dtype=np.int64)
            return np.concatenate([self(a) for a in e.args], axis=1)
        if isinstance(e, Select):
            return self(e.arg)[:, list(e.indices)]
        if isinstance(e, Table):
            index = np.zeros(self.n, dtype=np.int64)
            for name, _ in e.inputs:
                try:
                    block = self.env[name]
                except KeyError:
                    raise UnknownBlock(name) from None
                for j in range(block.shape[1]):
                    index = index * q + block[:, j]
            return e._array[index]
        if isinstance(e, Compose):
            inner = {name: self(b) for name, b in e.bindings}
            return _Evaluator(inner, q, self.n)(e.outer)
        raise TypeError(f"not a FuncExpr: {e!r}")


def evaluate_env(expr: FuncExpr, env: Mapping[str, np.ndarray], q: int, n: int | None = None) -> np.ndarray:
    """Evaluate ``expr`` on a batch given as a block environment."""
    if n is None:
        n = next(iter(env.values())).shape[0] if env else 1
    return np.ascontiguousarray(_Evaluator(env, q, n)(expr), dtype=np.int64)


def evaluate_batch(expr: FuncExpr, layout: BlockLayout, x: np.ndarray, q: int) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.int64))
    if x.size and (x.min() < 0 or x.max() >= q):
        raise DomainViolation(f"input symbols outside [0, {q})")
    return evaluate_env(expr, layout.split(x), q, x.shape[0])


def evaluate(expr: FuncExpr, layout: BlockLayout, x: SymbolVec | Sequence[int], q: int | None = None) -> SymbolVec:
    """f(x) for a single realization."""
    if isinstance(x, SymbolVec):
        q = x.q if q is None else q
        symbols = x.symbols
    else:
        if q is None:
            raise ValueError("q is required when x is a plain sequence")
        symbols = tuple(x)
    output_width(expr, layout.widths, q)
    out = evaluate_batch(expr, layout, np.asarray([symbols], dtype=np.int64).reshape(1, -1), q)
    return SymbolVec(q, tuple(out[0]))


def materialize(expr: FuncExpr, layout: BlockLayout, q: int, cap: int | None = None) -> Table:
    """Tabulate ``expr`` over every realization of ``layout``."""
    cap = default_cap() if cap is None else cap
    size = q**layout.total_width
    if size > cap:
        raise CapExceeded(size, cap)
    output_width(expr, layout.widths, q)
    chunks = [evaluate_batch(expr, layout, x, q) for x in iter_batches(layout.total_width, q, Exhaustive(cap))]
    rows = np.concatenate(chunks, axis=0) if chunks else np.zeros((0, 0), dtype=np.int64)
    return Table(layout.blocks, tuple(map(tuple, rows.tolist())))


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Exhaustive:
    cap: int = DEFAULT_CAP

    def describe(self) -> str:
        return "exhaustive"


@dataclass(frozen=True)
class Sampled:
    count: int = DEFAULT_SAMPLES
    seed: int = 1

    def describe(self) -> str:
        return "sampled"


EnumMode = Exhaustive | Sampled


def domain_size(width: int, q: int) -> int:
    return q**width


def index_to_vectors(indices: np.ndarray, width: int, q: int) -> np.ndarray:
    """Lexicographic index -> realization, first symbol most significant."""
    powers = q ** np.arange(width - 1, -1, -1, dtype=np.int64)
    return (indices[:, None] // powers[None, :]) % q


def vectors_to_index(x: np.ndarray, q: int) -> np.ndarray:
    idx = np.zeros(x.shape[0], dtype=np.int64)
    for j in range(x.shape[1]):
        idx = idx * q + x[:, j]
    return idx


def iter_batches(width: int, q: int, mode: EnumMode, batch_size: int = BATCH_SIZE) -> Iterator[np.ndarray]:
    """Stream realizations of F_q^width as ``(n, width)`` arrays."""
    if isinstance(mode, Exhaustive):
        size = q**width
        if size > mode.cap:
            raise CapExceeded(size, mode.cap)
        for start in range(0, size, batch_size):
            idx = np.arange(start, min(size, start + batch_size), dtype=np.int64)
            yield index_to_vectors(idx, width, q)
    elif isinstance(mode, Sampled):
        rng = np.random.default_rng(mode.seed)
        left = mode.count
        while left > 0:
            n = min(batch_size, left)
            yield rng.integers(0, q, size=(n, width), dtype=np.int64)
            left -= n
    else:
        raise TypeError(f"unknown enumeration mode {mode!r}")


def enumerate_domain(layout: BlockLayout, q: int, mode: EnumMode) -> Iterator[SymbolVec]:
    """Yield realizations one at a time (lexicographic when exhaustive)."""
    for batch in iter_batches(layout.total_width, q, mode):
        for row in batch.tolist():
            yield SymbolVec(q, tuple(row))


def resolve_mode(
    width: int,
    q: int,
    mode: str | None = None,
    cap: int | None = None,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 1,
) -> EnumMode:
    """Pick an enumeration mode; ``mode=None`` means exhaustive when it fits the cap."""
    cap = default_cap() if cap is None else cap
    if mode == "exhaustive":
        return Exhaustive(cap)
    if mode == "sampled":
        return Sampled(samples, seed)
    if mode is not None:
        raise ValueError(f"unknown mode {mode!r}")
    return Exhaustive(cap) if q**width <= cap else Sampled(samples, seed)


# ---------------------------------------------------------------------------
# Semantic equality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Equality:
    """Outcome of :func:`func_equal`: ``"equal"``, ``"differ"`` or ``"inconclusive"``."""

    status: str
    checked: int
    witness: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.status == "equal"


def func_equal(
    f: FuncExpr,
    g: FuncExpr,
    layout: BlockLayout,
    q: int,
    budget: int | None = None,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 1,
) -> Equality:
    """Pointwise comparison; exhaustive when q^width fits ``budget``, else seeded sampling."""
    budget = default_cap() if budget is None else budget
    wf = output_width(f, layout.widths, q)
    wg = output_width(g, layout.widths, q)
    if wf != wg:
        raise WidthMismatch(f"output widths differ: {wf} vs {wg}")
    exhaustive = q**layout.total_width <= budget
    mode = Exhaustive(budget) if exhaustive else Sampled(samples, seed)
    checked = 0
    for x in iter_batches(layout.total_width, q, mode):
        env = layout.split(x)
        bad = np.any(evaluate_env(f, env, q, len(x)) != evaluate_env(g, env, q, len(x)), axis=1)
        if bad.any():
            i = int(bad.argmax())
            return Equality("differ", checked + i + 1, tuple(int(v) for v in x[i]))
        checked += len(x)
    return Equality("equal" if exhaustive else "inconclusive", checked)


def iter_nodes(expr: FuncExpr) -> Iterable[FuncExpr]:
    seen = set()
    stack = [expr]
    while stack:
        e = stack.pop()
        if id(e) in seen:
            continue
        seen.add(id(e))
        yield e
        stack.extend(e.children())


def format_expr(expr: FuncExpr, q: int = 2) -> str:
    """Readable infix rendering; Compose bindings are substituted inline."""

    def fmt(e: FuncExpr, env: Mapping[str, str]) -> str:
        if isinstance(e, Proj):
            return env.get(e.block, e.block)
        if isinstance(e, Const):
            body = ",".join(map(str, e.values))
            return body if len(e.values) == 1 else f"({body})"
        if isinstance(e, Add):
            return " + ".join(_wrap(a, fmt(a, env)) for a in e.args)
        if isinstance(e, Neg):
            return f"-{_wrap(e.arg, fmt(e.arg, env))}"
        if isinstance(e, MaxInt):
            return "max{" + ", ".join(fmt(a, env) for a in e.args) + "}"
        if isinstance(e, Majority):
            return "Maj(" + ", ".join(fmt(a, env) for a in e.args) + ")"
        if isinstance(e, Concat):
            return "(" + ", ".join(fmt(a, env) for a in e.args) + ")"
        if isinstance(e, Select):
            idx = ",".join(map(str, e.indices))
            return f"{_wrap(e.arg, fmt(e.arg, env))}[{idx}]"
        if isinstance(e, Table):
            return "table(" + ", ".join(env.get(n, n) for n, _ in e.inputs) + ")"
        if isinstance(e, Compose):
            inner = {name: fmt(b, env) for name, b in e.bindings}
            return fmt(e.outer, inner)
        raise TypeError(f"not a FuncExpr: {e!r}")

    return fmt(expr, {})


def _wrap(e: FuncExpr, text: str) -> str:
    if isinstance(e, (Add,)) or (isinstance(e, Compose) and " + " in text):
        return f"({text})"
    return text


def simplify(expr: FuncExpr, q: int, widths: Mapping[str, int] | None = None) -> FuncExpr:
    """Constant folding plus inlining of ``Compose`` into table-free outers.

    Folds selections of constants, sums of constants, double negation and,
    for q = 2, negation itself.  Given the block ``widths``, selections from a
    ``Concat`` are narrowed to the parts they pick.  The result is pointwise
    equal to ``expr``.
    """
    memo: dict[int, tuple[FuncExpr, FuncExpr]] = {}  # holds the key node so its id is not reused

    def go(e: FuncExpr) -> FuncExpr:
        hit = memo.get(id(e))
        if hit is not None:
            return hit[1]
        out = _simplify_node(e, go, q, widths)
        memo[id(e)] = (e, out)
        return out

    return go(expr)


def _has_table(e: FuncExpr) -> bool:
    return any(isinstance(n, Table) for n in iter_nodes(e))


def _substitute(e: FuncExpr, bindings: Mapping[str, FuncExpr]) -> FuncExpr:
    if isinstance(e, Proj):
        return bindings[e.block]
    if isinstance(e, Const):
        return e
    if isinstance(e, Neg):
        return Neg(_substitute(e.arg, bindings))
    if isinstance(e, Select):
        return Select(_substitute(e.arg, bindings), e.indices)
    if isinstance(e, Compose):
        return Compose(e.outer, {n: _substitute(b, bindings) for n, b in e.bindings})
    return type(e)(tuple(_substitute(a, bindings) for a in e.args))


def _select_from_concat(c: Concat, indices: tuple[int, ...], widths: Mapping[str, int], q: int) -> FuncExpr:
    spans, start = [], 0
    for a in c.args:
        w = output_width(a, widths, q)
        spans.append((start, start + w, a))
        start += w
    picks = []
    for i in indices:
        lo, hi, a = next(s for s in spans if s[0] <= i < s[1])
        picks.append(a if hi - lo == 1 else Select(a, (i - lo,)))
    return picks[0] if len(picks) == 1 else Concat(tuple(picks))


def _simplify_node(e: FuncExpr, go, q: int, widths: Mapping[str, int] | None) -> FuncExpr:
    if isinstance(e, (Proj, Const, Table)):
        return e
    if isinstance(e, Neg):
        inner = go(e.arg)
        if q == 2:
            return inner
        if isinstance(inner, Neg):
            return inner.arg
        if isinstance(inner, Const):
            return Const(tuple((-v) % q for v in inner.values))
        return Neg(inner)
    if isinstance(e, Select):
        inner = go(e.arg)
        if isinstance(inner, Const):
            return Const(tuple(inner.values[i] for i in e.indices))
        if isinstance(inner, Select):
            return Select(inner.arg, tuple(inner.indices[i] for i in e.indices))
        if isinstance(inner, Concat) and widths is not None:
            return _select_from_concat(inner, e.indices, widths, q)
        return Select(inner, e.indices)
    if isinstance(e, Add):
        terms: list[FuncExpr] = []
        const = None
        for a in (go(x) for x in e.args):
            for t in a.args if isinstance(a, Add) else (a,):
                if isinstance(t, Const):
                    const = t.values if const is None else tuple((u + v) % q for u, v in zip(const, t.values))
                else:
                    terms.append(t)
        if const is not None and (any(const) or not terms):
            terms.append(Const(const))
        return terms[0] if len(terms) == 1 else Add(tuple(terms))
    if isinstance(e, Compose):
        bound = {n: go(b) for n, b in e.bindings}
        if not _has_table(e.outer):
            return go(_substitute(e.outer, bound))
        return Compose(e.outer, bound)
    args = tuple(go(a) for a in e.args)
    if isinstance(e, Concat) and len(args) == 1:
        return args[0]
    return type(e)(args)
