"""Bit-level helpers shared by every module.

Configurations and component sets are plain Python ints. Bit ``i`` stands for
component ``i`` (0-based); in text form, character ``i`` of a bitstring is
component ``i``, so ``"100"`` means component 0 is active.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of set bits in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def to_mask(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def to_set(mask: int) -> frozenset[int]:
    return frozenset(iter_bits(mask))


def submasks(mask: int) -> Iterator[int]:
    """Yield every subset of ``mask``, including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def full_mask(n: int) -> int:
    return (1 << n) - 1


def format_config(x: int, n: int) -> str:
    return "".join("1" if x >> i & 1 else "0" for i in range(n))


def parse_bits(text: str) -> int:
    x = 0
    for i, c in enumerate(text):
        if c == "1":
            x |= 1 << i
        elif c != "0":
            raise ValueError(f"not a bitstring: {text!r}")
    return x


def delta(x: int, y: int) -> int:
    """Components on which two configurations differ, as a mask."""
    return x ^ y


@dataclass(frozen=True, order=True)
class Subhypercube:
    """Vector over {0, 1, *}.

    ``fixed`` marks the fixed cells and ``values`` holds their states; bits of
    ``values`` outside ``fixed`` are always zero so that equal cubes compare
    equal.
    """

    n: int
    fixed: int
    values: int

    def __post_init__(self):
        object.__setattr__(self, "values", self.values & self.fixed)

    @classmethod
    def from_string(cls, text: str) -> Subhypercube:
        fixed = values = 0
        for i, c in enumerate(text):
            if c == "1":
                fixed |= 1 << i
                values |= 1 << i
            elif c == "0":
                fixed |= 1 << i
            elif c != "*":
                raise ValueError(f"not a sub-hypercube: {text!r}")
        return cls(len(text), fixed, values)

    @classmethod
    def around(cls, x: int, free: int, n: int) -> Subhypercube:
        """The cube with anchor ``x`` and the components of ``free`` free."""
        fixed = full_mask(n) & ~free
        return cls(n, fixed, x & fixed)

    @property
    def free(self) -> int:
        return full_mask(self.n) & ~self.fixed

    @property
    def rank(self) -> int:
        return popcount(self.free)

    def contains(self, x: int) -> bool:
        return (x & self.fixed) == self.values

    def is_smaller_than(self, other: Subhypercube) -> bool:
        """True when every fixed cell of ``other`` is fixed the same way here."""
        return (self.fixed & other.fixed) == other.fixed and (
            self.values & other.fixed
        ) == other.values

    def vertices(self) -> Iterator[int]:
        for sub in submasks(self.free):
            yield self.values | sub

    def __str__(self) -> str:
        out = []
        for i in range(self.n):
            if not self.fixed >> i & 1:
                out.append("*")
            else:
                out.append("1" if self.values >> i & 1 else "0")
        return "".join(out)
