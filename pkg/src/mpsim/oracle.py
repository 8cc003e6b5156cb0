"""Brute-force reference semantics for small networks.

Nothing here uses the engine: local functions are tabulated with the
tree-walking evaluator, and every sub-hypercube question is answered by
looking at all of its vertices. Intended for n up to about 10.
"""

from __future__ import annotations

import numpy as np

from .bits import format_config
from .errors import CapExceededError
from .model import BooleanNetwork, evaluate

RELATION_CAP = 14
TRAP_CAP = 10
EXACT_CAP = 10


class Tables:
    """Truth tables of a network as bitsets over all 2^n configurations."""

    def __init__(self, f: BooleanNetwork, cap: int = RELATION_CAP):
        if f.n > cap:
            raise CapExceededError(f"brute force limited to n <= {cap}, got n = {f.n}")
        self.f = f
        self.n = n = f.n
        self.size = 1 << n
        self.everything = (1 << self.size) - 1
        self.ones = []
        for expr in f.functions:
            bits = 0
            for z in range(self.size):
                if evaluate(expr, z):
                    bits |= 1 << z
            self.ones.append(bits)
        self._cubes = {}

    def cube(self, x: int, free: int) -> int:
        """Bitset of the vertices of x with ``free`` free."""
        key = (x & ~free, free)
        got = self._cubes.get(key)
        if got is None:
            if free == 0:
                got = 1 << key[0]
            else:
                j = free & -free
                got = self.cube(key[0], free ^ j) | self.cube(key[0] | j, free ^ j)
            self._cubes[key] = got
        return got

    def values_on(self, i: int, cube: int) -> set:
        """Values taken by f_i on a vertex bitset."""
        out = set()
        if cube & self.ones[i]:
            out.add(1)
        if cube & ~self.ones[i] & self.everything:
            out.add(0)
        return out

    def vertices(self, cube: int) -> list:
        return [z for z in range(self.size) if cube >> z & 1]


def smallest_closed(t: Tables, x: int, K: int) -> int:
    """Free set of the smallest K-closed sub-hypercube containing x.

    Frees one offending component at a time until nothing in K can leave
    its anchor value.
    """
    free = 0
    while True:
        cube = t.cube(x, free)
        for i in range(t.n):
            bit = 1 << i
            if K & bit and not free & bit:
                if (1 - (x >> i & 1)) in t.values_on(i, cube):
                    free |= bit
                    break
        else:
            return free


def mp_successors_bruteforce(f: BooleanNetwork, x: int, tables: Tables = None) -> set:
    """All y with x ->MP y, self-loop included, straight from the definition."""
    t = tables or Tables(f)
    out = set()
    done = set()
    for K in range(1 << t.n):
        free = smallest_closed(t, x, K)
        if (free, K & ~free) in done:
            continue
        done.add((free, K & ~free))
        cube = t.cube(x, free)
        witnesses = {i: t.values_on(i, cube) for i in range(t.n) if K >> i & 1}
        for y in t.vertices(cube):
            if all((y >> i & 1) in vals for i, vals in witnesses.items()):
                out.add(y)
    return out


def async_successors(f: BooleanNetwork, x: int) -> set:
    """General asynchronous successors: flip any nonempty set of unstable components."""
    unstable = [i for i, e in enumerate(f.functions) if evaluate(e, x) != (x >> i & 1)]
    out = set()
    for r in range(1, 1 << len(unstable)):
        y = x
        for pos, i in enumerate(unstable):
            if r >> pos & 1:
                y ^= 1 << i
        out.add(y)
    return out


def fully_async_successors(f: BooleanNetwork, x: int) -> set:
    return {
        x ^ (1 << i) for i, e in enumerate(f.functions) if evaluate(e, x) != (x >> i & 1)
    }


def mp_relation(f: BooleanNetwork) -> set:
    t = Tables(f)
    return {(x, y) for x in range(t.size) for y in mp_successors_bruteforce(f, x, t)}


def format_relation(pairs, n: int) -> str:
    lines = [f"{format_config(a, n)} -> {format_config(b, n)}" for a, b in sorted(pairs)]
    return "\n".join(lines) + ("\n" if lines else "")


def _cube_string(n, fixed, values):
    return "".join(
        ("1" if values >> i & 1 else "0") if fixed >> i & 1 else "*" for i in range(n)
    )


def trap_spaces_bruteforce(f: BooleanNetwork, cap: int = TRAP_CAP) -> list:
    """Inclusion-minimal closed sub-hypercubes, as sorted {0,1,*} strings."""
    if f.n > cap:
        raise CapExceededError(f"trap space brute force limited to n <= {cap}, got n = {f.n}")
    t = Tables(f, cap)
    n = t.n
    closed = []
    for code in range(3**n):
        fixed = values = 0
        c = code
        for i in range(n):
            c, digit = divmod(c, 3)
            if digit < 2:
                fixed |= 1 << i
                values |= digit << i
        cube = t.cube(values, ~fixed & ((1 << n) - 1))
        ok = True
        for i in range(n):
            if fixed >> i & 1:
                want = values >> i & 1
                if t.values_on(i, cube) != {want}:
                    ok = False
                    break
        if ok:
            closed.append((fixed, values, cube))
    closed.sort(key=lambda item: bin(item[2]).count("1"))
    kept = []
    for fixed, values, cube in closed:
        if not any(other & cube == other for _, _, other in kept):
            kept.append((fixed, values, cube))
    return sorted(_cube_string(n, fixed, values) for fixed, values, _ in kept)


# --- exact propensities ------------------------------------------------------


def _bounded_spaces(t: Tables, x: int, d: int) -> list:
    """Spaces (H, L) for one anchor and depth, by exhaustive vertex checks."""
    n = t.n

    def bounded(K):
        free = 0
        for _ in range(d):
            cube = t.cube(x, free)
            grow = 0
            for i in range(n):
                if K >> i & 1 and (1 - (x >> i & 1)) in t.values_on(i, cube):
                    grow |= 1 << i
            free |= grow
            K &= ~grow
        return free

    def stuck(H):
        cube = t.cube(x, H)
        return sum(
            1 << i for i in range(n) if H >> i & 1 and (x >> i & 1) not in t.values_on(i, cube)
        )

    full = (1 << n) - 1
    table = {}
    pending = [full]
    while pending:
        K = pending.pop()
        if K in table:
            continue
        H = bounded(K)
        L = stuck(H) if d > 1 else 0
        table[K] = (H, L)
        for M in range(1, L + 1):
            if M & L == M:
                pending.append(K & ~M)
    return list(table.values())


def step_distribution(f: BooleanNetwork, x: int, params, tables: Tables = None) -> dict:
    """Exact law of one sampling step from x, as {y: probability}."""
    t = tables or Tables(f)
    W = params.weights.values
    listing = params.l_row_mode == "listing"
    out = {}
    for d, pd in enumerate(params.depth.probabilities, start=1):
        if pd == 0:
            continue
        weighted = {}
        for H, L in _bounded_spaces(t, x, d):
            nl = bin(L).count("1")
            rest = [i for i in range(t.n) if (H & ~L) >> i & 1]
            for r in range(1 << len(rest)):
                y = x ^ L
                for pos, i in enumerate(rest):
                    if r >> pos & 1:
                        y ^= 1 << i
                if y == x:
                    continue
                m = bin(x ^ y).count("1")
                # a row's rate is shared equally by its C(|H\L|, m-|L|) members
                w = W[m - 1] * (nl if listing and m == nl else 1)
                weighted[y] = weighted.get(y, 0.0) + w
        total = sum(weighted.values())
        if total == 0:
            out[x] = out.get(x, 0.0) + pd
            continue
        for y, w in weighted.items():
            out[y] = out.get(y, 0.0) + pd * w / total
    return out


def exact_propensities(f: BooleanNetwork, x0: int, params, cap: int = EXACT_CAP) -> dict:
    """Absorption probabilities of the sampling walk into each attractor.

    A configuration is absorbing once the MP relation lets it reach exactly
    one minimal trap space.
    """
    if f.n > cap:
        raise CapExceededError(f"exact propensities limited to n <= {cap}, got n = {f.n}")
    t = Tables(f)
    attractors = trap_spaces_bruteforce(f)
    cubes = {}
    for a in attractors:
        fixed = sum(1 << i for i, c in enumerate(a) if c != "*")
        values = sum(1 << i for i, c in enumerate(a) if c == "1")
        cubes[a] = t.cube(values, ~fixed & ((1 << t.n) - 1))

    def target(x):
        reach = 0
        for y in mp_successors_bruteforce(f, x, t):
            reach |= 1 << y
        hits = [a for a, cube in cubes.items() if cube & reach]
        return hits[0] if len(hits) == 1 else None

    absorbed = {}
    transient = []
    kernel = {}
    queue = [x0]
    seen = {x0}
    while queue:
        x = queue.pop()
        a = target(x)
        if a is not None:
            absorbed[x] = a
            continue
        transient.append(x)
        kernel[x] = step_distribution(f, x, params, t)
        for y in kernel[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)

    if x0 in absorbed:
        return {a: (1.0 if a == absorbed[x0] else 0.0) for a in attractors}

    index = {x: k for k, x in enumerate(transient)}
    col = {a: k for k, a in enumerate(attractors)}
    Q = np.zeros((len(transient), len(transient)))
    R = np.zeros((len(transient), len(attractors)))
    for x in transient:
        for y, p in kernel[x].items():
            if y in index:
                Q[index[x], index[y]] += p
            else:
                R[index[x], col[absorbed[y]]] += p
    A = np.eye(len(transient)) - Q
    if np.linalg.matrix_rank(A) < len(transient):
        raise RuntimeError("walk has a closed class that never reaches a strong basin")
    B = np.linalg.solve(A, R)
    row = B[index[x0]]
    return {a: float(row[col[a]]) for a in attractors}

