"""Boolean networks: expressions, evaluation and static analysis."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Union

from .bits import full_mask, iter_bits, submasks
from .errors import FanInError, ModelError

DEFAULT_FANIN_CAP = 24


# --- expressions -----------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Not:
    child: Expr


@dataclass(frozen=True)
class And:
    children: tuple


@dataclass(frozen=True)
class Or:
    children: tuple


Expr = Union[Const, Var, Not, And, Or]

TRUE = Const(1)
FALSE = Const(0)


def evaluate(expr: Expr, x: int) -> int:
    """Value of ``expr`` at configuration ``x`` (0 or 1)."""
    if isinstance(expr, Var):
        return x >> expr.index & 1
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Not):
        return 1 - evaluate(expr.child, x)
    if isinstance(expr, And):
        return int(all(evaluate(c, x) for c in expr.children))
    if isinstance(expr, Or):
        return int(any(evaluate(c, x) for c in expr.children))
    raise TypeError(f"not an expression: {expr!r}")


def support(expr: Expr) -> int:
    """Mask of the variables occurring syntactically in ``expr``."""
    if isinstance(expr, Var):
        return 1 << expr.index
    if isinstance(expr, Const):
        return 0
    if isinstance(expr, Not):
        return support(expr.child)
    mask = 0
    for c in expr.children:
        mask |= support(c)
    return mask


def _source(expr: Expr) -> str:
    if isinstance(expr, Var):
        return f"(x>>{expr.index}&1)"
    if isinstance(expr, Const):
        return str(expr.value)
    if isinstance(expr, Not):
        return f"(1^{_source(expr.child)})"
    op = "&" if isinstance(expr, And) else "|"
    if not expr.children:
        return "1" if isinstance(expr, And) else "0"
    return "(" + op.join(_source(c) for c in expr.children) + ")"


def compile_expr(expr: Expr) -> Callable[[int], int]:
    """Turn ``expr`` into a plain function of a configuration int.

    Same semantics as :func:`evaluate`, several times faster.
    """
    return eval(f"lambda x: {_source(expr)}", {})  # noqa: S307 - generated from a typed tree


def _max_index(expr: Expr) -> int:
    m = support(expr)
    return m.bit_length() - 1


# --- networks --------------------------------------------------------------


@dataclass(frozen=True)
class BooleanNetwork:
    """``n`` named components with one local function each.

    Immutable; derived data (compiled functions, influence graph) is cached
    on first use and safe to share between workers.
    """

    names: tuple
    functions: tuple
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "functions", tuple(self.functions))
        if len(self.names) != len(self.functions):
            raise ModelError("need exactly one local function per component")
        seen = set()
        for name in self.names:
            if not name:
                raise ModelError("empty component name")
            if name in seen:
                raise ModelError(f"duplicate component {name!r}")
            seen.add(name)
        n = len(self.names)
        for name, fn in zip(self.names, self.functions):
            top = _max_index(fn)
            if top >= n:
                raise ModelError(
                    f"local function of {name!r} refers to component {top} (n={n})"
                )

    def __hash__(self):
        return hash((self.names, self.functions))

    def __reduce__(self):
        # compiled lambdas in the cache do not pickle; workers rebuild them
        return (BooleanNetwork, (self.names, self.functions))

    @property
    def n(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._name_index()[name]
        except KeyError:
            raise ValueError(f"unknown component {name!r}") from None

    def _name_index(self) -> dict:
        if "names" not in self._cache:
            self._cache["names"] = {name: i for i, name in enumerate(self.names)}
        return self._cache["names"]

    @property
    def compiled(self) -> tuple:
        if "compiled" not in self._cache:
            self._cache["compiled"] = tuple(compile_expr(e) for e in self.functions)
        return self._cache["compiled"]

    @property
    def supports(self) -> tuple:
        if "supports" not in self._cache:
            self._cache["supports"] = tuple(support(e) for e in self.functions)
        return self._cache["supports"]

    def local(self, i: int, x: int) -> int:
        return self.compiled[i](x)

    def __call__(self, x: int) -> int:
        return apply(self, x)


def apply(f: BooleanNetwork, x: int) -> int:
    """Synchronous image f(x)."""
    y = 0
    for i, fn in enumerate(f.compiled):
        if fn(x):
            y |= 1 << i
    return y


# --- influence graph -------------------------------------------------------


@dataclass(frozen=True)
class InfluenceGraph:
    """Signed influences, plus per-target masks of positive/negative sources."""

    n: int
    edges: frozenset
    positive: tuple
    negative: tuple

    @property
    def is_locally_monotone(self) -> bool:
        return not any(p & q for p, q in zip(self.positive, self.negative))

    def unate(self, target: int) -> bool:
        return not (self.positive[target] & self.negative[target])


def influence_graph(f: BooleanNetwork, cap: int = DEFAULT_FANIN_CAP) -> InfluenceGraph:
    """Signed influence graph by enumeration over each function's support.

    Edges are ``(source, sign, target)`` with sign in {+1, -1}.
    """
    key = ("influence", cap)
    if key in f._cache:
        return f._cache[key]
    edges = set()
    positive = []
    negative = []
    for target, (fn, supp) in enumerate(zip(f.compiled, f.supports)):
        k = bin(supp).count("1")
        if k > cap:
            raise FanInError(
                f"fan-in too large: {f.names[target]!r} depends on {k} components (cap {cap})"
            )
        table = {z: fn(z) for z in submasks(supp)}
        pos = neg = 0
        for src in iter_bits(supp):
            bit = 1 << src
            for z, v in table.items():
                if z & bit:
                    continue
                d = table[z | bit] - v
                if d > 0:
                    pos |= bit
                elif d < 0:
                    neg |= bit
                if pos & neg & bit:
                    break
        for src in iter_bits(pos):
            edges.add((src, 1, target))
        for src in iter_bits(neg):
            edges.add((src, -1, target))
        positive.append(pos)
        negative.append(neg)
    graph = InfluenceGraph(f.n, frozenset(edges), tuple(positive), tuple(negative))
    f._cache[key] = graph
    return graph


def is_locally_monotone(f: BooleanNetwork, cap: int = DEFAULT_FANIN_CAP) -> bool:
    return influence_graph(f, cap).is_locally_monotone


# --- mutations -------------------------------------------------------------


@dataclass(frozen=True)
class Mutation:
    component: int
    value: int


def apply_mutations(f: BooleanNetwork, mutations: Iterable[Mutation]) -> BooleanNetwork:
    """Copy of ``f`` whose mutated components have constant local functions."""
    functions = list(f.functions)
    seen = set()
    for m in mutations:
        if not 0 <= m.component < f.n:
            raise ValueError(f"mutation of unknown component {m.component}")
        if m.value not in (0, 1):
            raise ValueError(f"mutation value must be 0 or 1, got {m.value!r}")
        if m.component in seen:
            raise ValueError(f"component {f.names[m.component]!r} mutated twice")
        seen.add(m.component)
        functions[m.component] = Const(m.value)
    if not seen:
        return f
    return BooleanNetwork(f.names, functions)


def parse_mutation(text: str, f: BooleanNetwork) -> Mutation:
    """``NAME=0`` or ``NAME=1``."""
    name, sep, value = text.partition("=")
    if not sep or value.strip() not in ("0", "1"):
        raise ValueError(f"bad mutation {text!r}, expected NAME=0 or NAME=1")
    return Mutation(f.index(name.strip()), int(value))


def all_configurations(n: int) -> range:
    return range(full_mask(n) + 1)
