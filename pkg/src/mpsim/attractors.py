"""Minimal trap spaces and attractor-aware sampling loops."""

from __future__ import annotations

import warnings
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .bits import Subhypercube, full_mask, iter_bits
from .engine import _spread, flip_oracle
from .errors import BudgetExceededError
from .model import BooleanNetwork
from .sampler import (
    ATTRACTOR,
    MAX_STEPS,
    STRONG_BASIN,
    SimulationParams,
    Stepper,
    Trajectory,
    random_stream,
)

DEFAULT_NODE_BUDGET = 2_000_000


def is_trap_space(f: BooleanNetwork, h: Subhypercube) -> bool:
    """True iff every fixed component's local function is constant and equal to it on h."""
    oracle = flip_oracle(f)
    free = h.free
    for i in iter_bits(h.fixed):
        v = h.values >> i & 1
        if oracle.range_of(h.values, i, free) != (v, v):
            return False
    return True


def minimal_trap_spaces(f: BooleanNetwork, budget: int = DEFAULT_NODE_BUDGET) -> tuple:
    """All inclusion-minimal trap spaces, sorted by their {0,1,*} string.

    Branch-and-percolate over three-valued assignments: every component has
    a domain within {0, 1, free}. A component fixed to v needs its local
    function constantly v on the trap space; a free one needs it to take both
    values (otherwise fixing it would give a smaller trap space, so such
    cubes are never minimal). Domains are narrowed until stable, then the
    search branches on the smallest open domain, trying fixed values first.
    Leaves are certified trap spaces; the minimal ones among them are kept.
    """
    search = _TrapSearch(f)
    candidates = search.run(budget)
    candidates.sort(key=lambda h: h.rank)
    minimal = []
    for h in candidates:
        if not any(m.is_smaller_than(h) for m in minimal):
            minimal.append(h)
    return tuple(sorted(minimal, key=str))


class _TrapSearch:
    """Domains are three masks: bit j of ``c0``/``c1``/``cf`` allows 0/1/free."""

    def __init__(self, f: BooleanNetwork):
        oracle = flip_oracle(f)
        self.n = f.n
        self.full = full_mask(f.n)
        self.functions = oracle.functions
        self.positive = oracle.positive
        self.negative = oracle.negative
        self.unate = oracle.unate
        self.range_of = oracle.range_of
        self.supports = f.supports
        # constraints to revisit when component j's domain shrinks
        self.readers = [0] * f.n
        for i, supp in enumerate(f.supports):
            for j in iter_bits(supp):
                self.readers[j] |= 1 << i

    def allows(self, i, v, c0, c1, cf):
        """Whether component i may take v (0, 1 or 2 = free) given the other domains."""
        bit = 1 << i
        c0 &= ~bit
        c1 &= ~bit
        cf &= ~bit
        if v == 0:
            c0 |= bit
        elif v == 1:
            c1 |= bit
        else:
            cf |= bit
        fn = self.functions[i]
        if self.unate[i]:
            pos = self.positive[i]
            neg = self.negative[i]
            # best case per influencer: one reading keeps the constraint alive
            if v == 1:
                return fn((pos & c1) | (neg & ~c0)) == 1
            if v == 0:
                return fn((pos & ~c0) | (neg & c1)) == 0
            low = (pos & ~(c0 | cf)) | (neg & (c1 | cf))
            high = (pos & (c1 | cf)) | (neg & ~(c0 | cf))
            return fn(low) == 0 and fn(high) == 1
        ones = c1 & ~c0 & ~cf
        fixed = (c0 ^ c1) & ~cf & (c0 | c1)
        lo, hi = self.range_of(ones, i, self.full & ~fixed)
        if v == 1:
            return hi == 1
        if v == 0:
            return lo == 0
        return lo == 0 and hi == 1

    def propagate(self, c0, c1, cf):
        """Narrow domains to a fixpoint; None when some domain empties."""
        todo = self.full
        while todo:
            i = (todo & -todo).bit_length() - 1
            todo &= todo - 1
            bit = 1 << i
            before = (c0 & bit, c1 & bit, cf & bit)
            if c0 & bit and not self.allows(i, 0, c0, c1, cf):
                c0 &= ~bit
            if c1 & bit and not self.allows(i, 1, c0, c1, cf):
                c1 &= ~bit
            if cf & bit and not self.allows(i, 2, c0, c1, cf):
                cf &= ~bit
            if not (c0 | c1 | cf) & bit:
                return None
            if (c0 & bit, c1 & bit, cf & bit) != before:
                todo |= self.readers[i]
            # a decided constraint can also narrow the components it reads
            if (bool(c0 & bit) + bool(c1 & bit) + bool(cf & bit)) == 1:
                v = 0 if c0 & bit else 1 if c1 & bit else 2
                for j in iter_bits(self.supports[i] & ~bit):
                    jb = 1 << j
                    changed = False
                    for w, mask in ((0, c0), (1, c1), (2, cf)):
                        if not mask & jb:
                            continue
                        t0, t1, tf = c0 & ~jb, c1 & ~jb, cf & ~jb
                        if w == 0:
                            t0 |= jb
                        elif w == 1:
                            t1 |= jb
                        else:
                            tf |= jb
                        if not self.allows(i, v, t0, t1, tf):
                            if w == 0:
                                c0 &= ~jb
                            elif w == 1:
                                c1 &= ~jb
                            else:
                                cf &= ~jb
                            changed = True
                    if changed:
                        if not (c0 | c1 | cf) & jb:
                            return None
                        todo |= self.readers[j] | jb
        return c0, c1, cf

    def run(self, budget):
        full = self.full
        found = []
        stack = [(full, full, full)]
        nodes = 0
        while stack:
            nodes += 1
            if nodes > budget:
                raise BudgetExceededError(
                    f"trap space enumeration budget of {budget} nodes exceeded"
                )
            state = self.propagate(*stack.pop())
            if state is None:
                continue
            c0, c1, cf = state
            open_ = (c0 & c1) | (c0 & cf) | (c1 & cf)
            if not open_:
                h = Subhypercube(self.n, c0 | c1, c1)
                if self.certify(h):
                    found.append(h)
                continue
            j = self.pick(open_, c0, c1, cf)
            jb = 1 << j
            # pushed in reverse so that 0 is tried first, free last
            if cf & jb:
                stack.append((c0 & ~jb, c1 & ~jb, cf))
            if c1 & jb:
                stack.append((c0 & ~jb, c1, cf & ~jb))
            if c0 & jb:
                stack.append((c0, c1 & ~jb, cf & ~jb))
        return found

    def pick(self, open_, c0, c1, cf):
        best = None
        for j in iter_bits(open_):
            jb = 1 << j
            size = bool(c0 & jb) + bool(c1 & jb) + bool(cf & jb)
            key = (size, -bin(self.readers[j]).count("1"), j)
            if best is None or key < best[0]:
                best = (key, j)
        return best[1]

    def certify(self, h):
        free = h.free
        for i in range(self.n):
            lo, hi = self.range_of(h.values, i, free)
            if free >> i & 1:
                if lo == hi:
                    return False
            elif lo != hi or lo != (h.values >> i & 1):
                return False
        return True


def filter_reachable_attractors(attractors, f: BooleanNetwork, x: int) -> tuple:
    """Members of ``attractors`` lying inside the full closure of ``x``."""
    H = _spread(flip_oracle(f), x, full_mask(f.n), max(f.n, 1))
    fixed = full_mask(f.n) & ~H
    want = x & fixed
    return tuple(a for a in attractors if (a.fixed & fixed) == fixed and (a.values & fixed) == want)


def in_attractor(x: int, attractors) -> bool:
    return any(a.contains(x) for a in attractors)


def attractor_of(x: int, attractors) -> Optional[Subhypercube]:
    for a in attractors:
        if a.contains(x):
            return a
    return None


def full_support(params: SimulationParams, n: int) -> bool:
    """Depth n has positive probability and every weight is positive."""
    probs = params.depth.probabilities
    return len(probs) == n and probs[-1] > 0 and all(w > 0 for w in params.weights.values)


def check_attractor_assumption(params: SimulationParams, attractors, n: int) -> bool:
    """Warn when sampled attractors may not match minimal trap spaces."""
    if full_support(params, n) or all(a.rank == 0 for a in attractors):
        return True
    warnings.warn(
        "restricted depth/weights with cyclic minimal trap spaces: attractors of the "
        "sampled dynamics may not match minimal trap spaces one-to-one",
        stacklevel=2,
    )
    return False


def run_walk(stepper: Stepper, x0: int, rng, attractors=None, record: bool = True) -> Trajectory:
    """Sampling loop shared by every stopping policy."""
    p = stepper.params
    f = stepper.f
    if attractors is None and p.stop != MAX_STEPS:
        attractors = minimal_trap_spaces(f)
    k = p.check_interval
    x = x0
    path = [x0] if record else None
    step = 0

    if p.stop == MAX_STEPS:
        while step < p.max_steps:
            x = stepper.step(x, rng)
            step += 1
            if record:
                path.append(x)
        found = attractor_of(x, attractors) if attractors is not None else None
        return Trajectory(path or [x], MAX_STEPS, found, step)

    if p.stop == ATTRACTOR:
        while True:
            if step % k == 0 or step == p.max_steps:
                found = attractor_of(x, attractors)
                if found is not None:
                    return Trajectory(path or [x], ATTRACTOR, found, step)
            if step >= p.max_steps:
                return Trajectory(path or [x], MAX_STEPS, None, step)
            x = stepper.step(x, rng)
            step += 1
            if record:
                path.append(x)

    remaining = filter_reachable_attractors(attractors, f, x)
    while True:
        if step % k == 0 or step == p.max_steps:
            if step:
                remaining = filter_reachable_attractors(remaining, f, x)
            if not remaining:
                raise RuntimeError(
                    "no minimal trap space left in the closure of the current configuration"
                )
            if len(remaining) == 1:
                return Trajectory(path or [x], STRONG_BASIN, remaining[0], step)
        if step >= p.max_steps:
            return Trajectory(path or [x], MAX_STEPS, None, step)
        x = stepper.step(x, rng)
        step += 1
        if record:
            path.append(x)


def _with_stop(params: SimulationParams, stop: str) -> SimulationParams:
    if params.stop == stop:
        return params
    return SimulationParams(
        depth=params.depth,
        weights=params.weights,
        seed=params.seed,
        max_steps=params.max_steps,
        check_interval=params.check_interval,
        stop=stop,
        l_row_mode=params.l_row_mode,
        space_cap=params.space_cap,
    )


def sample_reachable_attractor(f, x0, params, rng, attractors=None) -> Optional[Subhypercube]:
    """Walk until the configuration is in a minimal trap space; None if max steps run out."""
    stepper = Stepper(f, _with_stop(params, ATTRACTOR))
    return run_walk(stepper, x0, rng, attractors, record=False).attractor


def sample_reachable_attractor_bis(f, x0, params, rng, attractors=None) -> Optional[Subhypercube]:
    """Walk until only one minimal trap space remains reachable; None if max steps run out."""
    stepper = Stepper(f, _with_stop(params, STRONG_BASIN))
    return run_walk(stepper, x0, rng, attractors, record=False).attractor


# --- propensity estimation ---------------------------------------------------


@dataclass
class PropensityEstimate:
    runs: int
    counts: dict = field(default_factory=dict)  # attractor id -> count
    non_converged: int = 0
    total_steps: int = 0

    @property
    def converged(self) -> int:
        return self.runs - self.non_converged

    def fraction(self, attractor_id: str) -> float:
        if not self.converged:
            return 0.0
        return self.counts.get(attractor_id, 0) / self.converged

    def rows(self) -> list:
        """(id, count, fraction) sorted by descending count, then id."""
        items = sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return [(a, c, c / self.converged) for a, c in items]


def _run_chunk(f, x0, params, attractors, seed, start, stop):
    stepper = Stepper(f, params)
    counts = Counter()
    lost = 0
    steps = 0
    for index in range(start, stop):
        t = run_walk(stepper, x0, random_stream(seed, index), attractors, record=False)
        steps += t.steps
        if t.attractor is None:
            lost += 1
        else:
            counts[str(t.attractor)] += 1
    return counts, lost, steps


def estimate_propensities(
    f: BooleanNetwork,
    x0: int,
    params: SimulationParams,
    runs: int,
    seed: Optional[int] = None,
    workers: int = 1,
    attractors=None,
) -> PropensityEstimate:
    """Run ``runs`` independent walks and count the attractor each one ends in.

    Run ``i`` draws from ``random_stream(seed, i)``, so results do not depend
    on ``workers``.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    params.validate_for(f)
    seed = params.seed if seed is None else seed
    if attractors is None:
        attractors = minimal_trap_spaces(f)
    attractors = tuple(attractors)

    if workers <= 1 or runs < 2:
        parts = [_run_chunk(f, x0, params, attractors, seed, 0, runs)]
    else:
        size = -(-runs // (workers * 4))
        bounds = [(a, min(a + size, runs)) for a in range(0, runs, size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_chunk, f, x0, params, attractors, seed, a, b) for a, b in bounds
            ]
            parts = [fut.result() for fut in futures]

    total = Counter()
    lost = steps = 0
    for counts, l, s in parts:
        total.update(counts)
        lost += l
        steps += s
    return PropensityEstimate(runs, dict(total), lost, steps)
