"""Variable-depth random walks along most permissive transitions."""

from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass
from itertools import accumulate
from math import comb
from typing import Optional, Sequence

import numpy as np

from .bits import iter_bits, popcount
from .engine import DEFAULT_SPACE_CAP, SpaceSet, _reachable_spaces, flip_oracle
from .errors import CapExceededError
from .model import BooleanNetwork

LISTING = "listing"
COUNT = "count"
_INT64_MAX = (1 << 63) - 1
STEP_CACHE_SIZE = 1 << 16


# --- depth distributions ----------------------------------------------------


class DepthDistribution:
    """Distribution over permissive depths 1..n."""

    probabilities: tuple  # index d - 1 holds P(d)

    def _setup(self, probabilities):
        probs = tuple(float(p) for p in probabilities)
        if not probs:
            raise ValueError("empty depth distribution")
        if any(p < 0 for p in probs):
            raise ValueError("depth probabilities must be nonnegative")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError(f"depth probabilities sum to {sum(probs)!r}, not 1")
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "_cumulative", tuple(accumulate(probs)))

    @property
    def max_depth(self) -> int:
        return len(self.probabilities)

    def support(self) -> list:
        return [d for d, p in enumerate(self.probabilities, start=1) if p > 0]

    def draw(self, rng: random.Random) -> int:
        r = rng.random() * self._cumulative[-1]
        d = min(bisect_right(self._cumulative, r) + 1, len(self.probabilities))
        # rounding can land r on the top edge; step back to a bin with mass
        while self.probabilities[d - 1] == 0:
            d -= 1
        return d


@dataclass(frozen=True)
class Constant(DepthDistribution):
    depth: int

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        self._setup([0.0] * (self.depth - 1) + [1.0])

    def draw(self, rng: random.Random) -> int:
        return self.depth


@dataclass(frozen=True)
class ExponentialDecay(DepthDistribution):
    """P(d) proportional to 2^-d on 1..n."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("ExponentialDecay needs n >= 1")
        norm = sum(2.0**-i for i in range(1, self.n + 1))
        self._setup([2.0**-d / norm for d in range(1, self.n + 1)])


@dataclass(frozen=True)
class Custom(DepthDistribution):
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        self._setup(self.weights)


# --- weights and rates -------------------------------------------------------


@dataclass(frozen=True)
class WeightVector:
    """W[m - 1] weighs a transition flipping m components."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(w) for w in self.values)
        if not vals:
            raise ValueError("empty weight vector")
        if any(w < 0 for w in vals):
            raise ValueError("weights must be nonnegative")
        if not any(w > 0 for w in vals):
            raise ValueError("at least one weight must be positive")
        object.__setattr__(self, "values", vals)

    @classmethod
    def uniform(cls, n: int) -> WeightVector:
        return cls((1.0,) * n)

    @classmethod
    def single(cls, n: int) -> WeightVector:
        return cls((1.0,) + (0.0,) * (n - 1))

    def __len__(self):
        return len(self.values)

    def __getitem__(self, m: int) -> float:
        """Weight of an m-flip transition (1-based)."""
        return self.values[m - 1]


def _binom(a: int, b: int) -> int:
    c = comb(a, b)
    if c > _INT64_MAX:
        raise CapExceededError(f"binomial coefficient C({a},{b}) overflows 64 bits")
    return c


def _rate_entries(entries, W: Sequence[float], l_row_mode: str):
    """Yield (space index, m, rate) for nonzero rates, by space then ascending m."""
    for s, (_, H, L) in enumerate(entries):
        h = popcount(H)
        l = popcount(L)
        free = h - l
        if l:
            w = W[l - 1]
            if w:
                yield s, l, (l if l_row_mode == LISTING else 1) * w
        for j in range(1, free + 1):
            w = W[l + j - 1]
            if w:
                yield s, l + j, _binom(free, j) * w


def transition_rates(spaces: SpaceSet, W: WeightVector, l_row_mode: str = LISTING) -> np.ndarray:
    """|spaces| x n matrix; column m - 1 is the apparent rate of m-flip transitions."""
    _check_mode(l_row_mode)
    if len(W) < spaces.n:
        raise ValueError(f"weight vector has length {len(W)}, network has {spaces.n}")
    R = np.zeros((len(spaces), spaces.n))
    for s, m, rate in _rate_entries(spaces.entries, W.values, l_row_mode):
        R[s, m - 1] = rate
    return R


def _check_mode(mode):
    if mode not in (LISTING, COUNT):
        raise ValueError(f"l-row mode must be 'listing' or 'count', got {mode!r}")


# --- randomness ---------------------------------------------------------------


def random_stream(master_seed: int, index: int = 0) -> random.Random:
    """Independent generator for run ``index``, reproducible across processes."""
    state = np.random.SeedSequence([master_seed, index]).generate_state(4, dtype=np.uint32)
    return random.Random(int.from_bytes(state.tobytes(), "little"))


# --- simulation -----------------------------------------------------------------

ATTRACTOR = "attractor"
STRONG_BASIN = "strong-basin"
MAX_STEPS = "max-steps"
STOP_POLICIES = (ATTRACTOR, STRONG_BASIN, MAX_STEPS)


def default_check_interval(n: int) -> int:
    return 1 if n <= 16 else 10


@dataclass(frozen=True)
class SimulationParams:
    depth: DepthDistribution
    weights: WeightVector
    seed: int = 0
    max_steps: int = 100_000
    check_interval: int = 1
    stop: str = STRONG_BASIN
    l_row_mode: str = LISTING
    space_cap: int = DEFAULT_SPACE_CAP

    def __post_init__(self):
        if self.check_interval < 1:
            raise ValueError("check interval must be >= 1")
        if self.max_steps < 1:
            raise ValueError("max steps must be >= 1")
        if self.stop not in STOP_POLICIES:
            raise ValueError(f"unknown stopping policy {self.stop!r}")
        _check_mode(self.l_row_mode)

    def validate_for(self, f: BooleanNetwork):
        if self.depth.max_depth > f.n:
            raise ValueError(f"depth distribution reaches {self.depth.max_depth} > n = {f.n}")
        if len(self.weights) != f.n:
            raise ValueError(f"weight vector has length {len(self.weights)}, expected {f.n}")

    @classmethod
    def uniform(cls, f: BooleanNetwork, depth: DepthDistribution, **kw) -> SimulationParams:
        kw.setdefault("check_interval", default_check_interval(f.n))
        return cls(depth=depth, weights=WeightVector.uniform(f.n), **kw)


class Stepper:
    """Per-network state for sampling: flip oracle and parameters resolved once."""

    def __init__(self, f: BooleanNetwork, params: SimulationParams):
        params.validate_for(f)
        self.f = f
        self.n = f.n
        self.params = params
        self.oracle = flip_oracle(f)
        self.W = params.weights.values
        self._cache = {}

    def _rates(self, x: int, d: int):
        # walks revisit configurations a lot; spaces only depend on (x, d)
        key = (x, d)
        got = self._cache.get(key)
        if got is None:
            p = self.params
            entries = _reachable_spaces(self.oracle, self.n, x, d, p.space_cap)
            rates = list(_rate_entries(entries, self.W, p.l_row_mode))
            total = 0.0
            for _, _, rate in rates:
                total += rate
            if len(self._cache) >= STEP_CACHE_SIZE:
                self._cache.clear()
            got = self._cache[key] = (entries, rates, total)
        return got

    def step(self, x: int, rng: random.Random) -> int:
        d = self.params.depth.draw(rng)
        entries, rates, total = self._rates(x, d)
        if not rates:
            return x
        r = rng.random() * total
        acc = 0.0
        chosen = rates[-1]
        for item in rates:
            acc += item[2]
            if acc > r:
                chosen = item
                break
        s, m, _ = chosen
        _, H, L = entries[s]
        rest = list(iter_bits(H & ~L))
        y = x ^ L
        for i in rng.sample(rest, m - popcount(L)):
            y ^= 1 << i
        return y


def sample_next_configuration(f: BooleanNetwork, x: int, params: SimulationParams, rng) -> int:
    return Stepper(f, params).step(x, rng)


@dataclass
class Trajectory:
    configurations: list
    stop_reason: str
    attractor: Optional[object] = None  # Subhypercube once converged
    steps: int = 0


def simulate_trajectory(
    f: BooleanNetwork,
    x0: int,
    params: SimulationParams,
    rng: random.Random,
    attractors=None,
    record: bool = True,
) -> Trajectory:
    """Walk from ``x0`` until ``params.stop`` fires or ``params.max_steps`` steps.

    ``attractors`` is the minimal trap space list; it is computed when needed
    and not given.
    """
    from .attractors import run_walk

    return run_walk(Stepper(f, params), x0, rng, attractors, record)
