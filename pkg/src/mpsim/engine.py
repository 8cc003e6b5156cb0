"""Sub-hypercube reasoning for most permissive transitions.

Everything here is anchored at a configuration ``x`` and works on component
masks. A *space* ``(x, H, L)`` stands for the transitions from ``x`` that flip
every component of ``L`` plus any subset of ``H \\ L``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import comb
from typing import Iterator

from .bits import Subhypercube, full_mask, iter_bits, popcount, submasks
from .errors import SpaceExplosionError
from .model import BooleanNetwork, influence_graph

DEFAULT_SPACE_CAP = 1 << 20

MIN = "min"
MAX = "max"


class FlipOracle:
    """Answers "can component i take value v somewhere in (x with H free)".

    Unate local functions use the extreme configurations built from influence
    signs. Other local functions are decided by enumerating the free part of
    their support; :meth:`range_of` is the hook a solver-backed subclass would
    override.
    """

    def __init__(self, f: BooleanNetwork):
        self.f = f
        graph = influence_graph(f)
        self.functions = f.compiled
        self.supports = f.supports
        self.positive = graph.positive
        self.negative = graph.negative
        self.unate = tuple(not (p & q) for p, q in zip(graph.positive, graph.negative))
        readers = [0] * f.n
        for i, supp in enumerate(f.supports):
            for j in iter_bits(supp):
                readers[j] |= 1 << i
        self.readers = tuple(readers)  # bit i of readers[j]: f_i depends on j

    def extreme(self, x: int, i: int, free: int, polarity: str) -> int:
        if not self.unate[i]:
            raise ValueError(
                f"local function of {self.f.names[i]!r} is not unate; no extreme configuration"
            )
        pos = self.positive[i] & free
        neg = self.negative[i] & free
        z = x & ~(pos | neg)
        return z | (neg if polarity == MIN else pos)

    def range_of(self, x: int, i: int, free: int) -> tuple:
        """(min, max) of f_i over the vertices of x with ``free`` free."""
        fn = self.functions[i]
        if self.unate[i]:
            pos = self.positive[i] & free
            neg = self.negative[i] & free
            base = x & ~(pos | neg)
            return fn(base | neg), fn(base | pos)
        part = self.supports[i] & free
        base = x & ~part
        lo, hi = 1, 0
        for sub in submasks(part):
            v = fn(base | sub)
            if v:
                hi = 1
            else:
                lo = 0
            if lo == 0 and hi == 1:
                break
        return lo, hi

    def can_flip(self, x: int, i: int, free: int, v: int) -> bool:
        """True iff some vertex z of (x with ``free`` free) has f_i(z) != v."""
        fn = self.functions[i]
        if self.unate[i]:
            pos = self.positive[i] & free
            neg = self.negative[i] & free
            base = x & ~(pos | neg)
            # v = 1: look at the minimum; v = 0: look at the maximum
            return fn(base | (neg if v else pos)) != v
        lo, hi = self.range_of(x, i, free)
        return (lo if v else hi) != v


def flip_oracle(f: BooleanNetwork) -> FlipOracle:
    oracle = f._cache.get("flip_oracle")
    if oracle is None:
        oracle = f._cache["flip_oracle"] = FlipOracle(f)
    return oracle


def extreme_configuration(f: BooleanNetwork, x: int, i: int, free: int, polarity: str) -> int:
    """Vertex of (x with ``free`` free) minimising or maximising f_i.

    Requires f_i to be unate; raises ``ValueError`` otherwise.
    """
    if polarity not in (MIN, MAX):
        raise ValueError(f"polarity must be 'min' or 'max', got {polarity!r}")
    return flip_oracle(f).extreme(x, i, free, polarity)


def can_flip(f: BooleanNetwork, x: int, i: int, free: int, v: int) -> bool:
    return flip_oracle(f).can_flip(x, i, free, v)


def _spread(oracle: FlipOracle, x: int, K: int, d: int, bound: int = -1) -> int:
    """Closure rounds; ``bound`` is a known superset of the answer (spread is monotone in K)."""
    readers = oracle.readers
    fns = oracle.functions
    pos = oracle.positive
    neg = oracle.negative
    unate = oracle.unate
    can = oracle.can_flip
    H = 0
    todo = K & bound
    for _ in range(d):
        new = 0
        while todo:
            low = todo & -todo
            todo ^= low
            i = low.bit_length() - 1
            v = x >> i & 1
            if unate[i]:
                p = pos[i] & H
                q = neg[i] & H
                base = x & ~(p | q)
                # v = 1: look at the minimum; v = 0: look at the maximum
                if fns[i](base | (q if v else p)) != v:
                    new |= low
            elif can(x, i, H, v):
                new |= low
        if not new:
            break  # later iterations would see the same H
        H |= new
        K &= ~new
        # only components reading a newly freed one can change their answer
        for j in iter_bits(new):
            todo |= readers[j]
        todo &= K & bound
    return H


def spread(f: BooleanNetwork, x: int, K: int, d: int) -> int:
    """Components of ``K`` that can flip within ``d`` closure iterations."""
    if not 1 <= d <= max(f.n, 1):
        raise ValueError(f"depth must be in 1..{f.n}, got {d}")
    return _spread(flip_oracle(f), x, K, d)


def _irreversible(oracle: FlipOracle, x: int, H: int) -> int:
    fns = oracle.functions
    pos = oracle.positive
    neg = oracle.negative
    unate = oracle.unate
    L = 0
    rest = H
    while rest:
        low = rest & -rest
        rest ^= low
        i = low.bit_length() - 1
        v = 1 - (x >> i & 1)
        if unate[i]:
            p = pos[i] & H
            q = neg[i] & H
            base = x & ~(p | q)
            stuck = fns[i](base | (q if v else p)) == v
        else:
            stuck = not oracle.can_flip(x, i, H, v)
        if stuck:
            L |= low
    return L


def irreversible(f: BooleanNetwork, x: int, H: int) -> int:
    """Components of ``H`` whose local function never returns to x_i."""
    return _irreversible(flip_oracle(f), x, H)


@dataclass(frozen=True)
class Space:
    x: int
    H: int
    L: int

    @property
    def J(self) -> int:
        return self.H & ~self.L

    def counts(self) -> dict:
        return transition_counts(self.H, self.L)

    def transitions(self) -> TransitionSet:
        return TransitionSet(self.x, self.H, self.L)


@dataclass(frozen=True)
class SpaceSet:
    """Spaces of one anchor, keyed by their closure set K, in discovery order."""

    x: int
    n: int
    depth: int
    entries: tuple  # ((K, H, L), ...)

    def __len__(self):
        return len(self.entries)

    def __iter__(self) -> Iterator[Space]:
        for _, H, L in self.entries:
            yield Space(self.x, H, L)

    def as_dict(self) -> dict:
        return {K: (H, L) for K, H, L in self.entries}


def _reachable_spaces(oracle: FlipOracle, n: int, x: int, d: int, cap: int) -> tuple:
    start = full_mask(n)
    queue = deque([(start, start)])
    seen = {start}
    entries = []
    while queue:
        K, bound = queue.popleft()
        H = _spread(oracle, x, K, d, bound)
        L = _irreversible(oracle, x, H) if d > 1 else 0
        if L:
            M = L
            while M:  # nonzero submasks of L, largest first
                J = K & ~M
                M = (M - 1) & L
                if J not in seen:
                    seen.add(J)
                    queue.append((J, H))
                    if len(seen) > cap:
                        raise SpaceExplosionError(
                            f"more than {cap} spaces from one configuration "
                            f"(last irreversible set has {popcount(L)} components)"
                        )
        entries.append((K, H, L))
    return tuple(entries)


def reachable_spaces(f: BooleanNetwork, x: int, d: int, cap: int = DEFAULT_SPACE_CAP) -> SpaceSet:
    """Worklist over closure sets K, starting from all components."""
    if not 1 <= d <= max(f.n, 1):
        raise ValueError(f"depth must be in 1..{f.n}, got {d}")
    entries = _reachable_spaces(flip_oracle(f), f.n, x, d, cap)
    return SpaceSet(x, f.n, d, entries)


def transition_counts(H: int, L: int) -> dict:
    """Number of transitions of the space, by number of flipped components."""
    h = popcount(H)
    l = popcount(L)
    free = h - l
    return {m: comb(free, m - l) for m in range(max(1, l), h + 1)}


@dataclass(frozen=True)
class TransitionSet:
    """Configurations y with L <= delta(x, y) <= H, excluding y == x.

    Never materialised by the sampler; :meth:`members` exists for tests and
    small debug listings.
    """

    x: int
    H: int
    L: int

    def count(self, m: int) -> int:
        h = popcount(self.H)
        l = popcount(self.L)
        if not max(1, l) <= m <= h:
            raise ValueError(f"flip size {m} outside {max(1, l)}..{h}")
        return comb(h - l, m - l)

    def counts(self) -> dict:
        return transition_counts(self.H, self.L)

    def __len__(self):
        return sum(self.counts().values())

    def sample(self, m: int, rng) -> int:
        """Flip L and a uniform (m - |L|)-subset of H \\ L."""
        self.count(m)
        rest = list(iter_bits(self.H & ~self.L))
        y = self.x ^ self.L
        for i in rng.sample(rest, m - popcount(self.L)):
            y ^= 1 << i
        return y

    def members(self) -> set:
        out = set()
        for sub in submasks(self.H & ~self.L):
            y = self.x ^ self.L ^ sub
            if y != self.x:
                out.add(y)
        return out


def tr(space: Space) -> TransitionSet:
    return TransitionSet(space.x, space.H, space.L)


def space_cube(x: int, H: int, n: int) -> Subhypercube:
    return Subhypercube.around(x, H, n)
