"""Deterministic hash families mapping 64-bit identifiers to ring positions.

Two interchangeable constructions are provided:

* ``Poly5`` — a degree-4 polynomial over GF(2^61 - 1), giving 5-independence.
* ``SimpleTabulation`` — 8 byte-indexed tables of 64-bit entries XORed together.

Both reduce to the range [0, 2^range_bits) by keeping the high-order bits of
the underlying value, and both derive all their random material from a single
64-bit seed through the splitmix64 generator below, so families built from the
same (kind, seed, range_bits) are identical everywhere.
"""

from __future__ import annotations

from enum import Enum
from typing import Final

MASK64: Final[int] = (1 << 64) - 1

# Mersenne prime field for the polynomial family. 61 bits keeps products
# within native int comfort and the reduction branch-free.
FIELD_PRIME: Final[int] = (1 << 61) - 1


class HashKind(Enum):
    POLY5 = "poly5"
    TABULATION = "tab"


class SplitMix64:
    """The fixed seed-expansion generator (splitmix64, Steele et al. constants).

    Every table entry and polynomial coefficient in this module comes from
    successive outputs of this generator, so seed expansion is reproducible
    from the documented algorithm alone.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = seed & MASK64

    def next(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform draw in [0, bound) by top-bits rejection."""
        bits = (bound - 1).bit_length() if bound > 1 else 1
        while True:
            v = self.next() >> (64 - bits)
            if v < bound:
                return v


class HashFamily:
    """A concrete hash function h: 64-bit key -> [0, 2^range_bits)."""

    kind: HashKind
    seed: int
    range_bits: int

    def hash(self, key: int) -> int:
        raise NotImplementedError

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"{type(self).__name__}(seed={self.seed}, range_bits={self.range_bits})"


class Poly5Family(HashFamily):
    """Degree-4 polynomial over a prime field; 5-independent over the field.

    Coefficients are stored highest-degree first, so ``(0, 0, 0, 0, a0)``
    is the constant polynomial a0. ``_coeffs`` and ``_prime`` are injectable
    for the toy-prime independence tests; production use always runs over
    FIELD_PRIME.
    """

    __slots__ = ("kind", "seed", "range_bits", "_coeffs", "_prime", "_value_bits")

    def __init__(
        self,
        seed: int,
        range_bits: int,
        _coeffs: tuple[int, ...] | None = None,
        _prime: int = FIELD_PRIME,
    ) -> None:
        self.kind = HashKind.POLY5
        self.seed = seed & MASK64
        self.range_bits = range_bits
        self._prime = _prime
        self._value_bits = _prime.bit_length()
        if _coeffs is None:
            sm = SplitMix64(self.seed)
            _coeffs = tuple(sm.below(_prime) for _ in range(5))
        if len(_coeffs) != 5:
            raise ValueError("exactly 5 coefficients required")
        self._coeffs = tuple(c % _prime for c in _coeffs)

    @property
    def coefficients(self) -> tuple[int, ...]:
        return self._coeffs

    def field_value(self, key: int) -> int:
        """Polynomial value in [0, prime) before range reduction."""
        p = self._prime
        x = (key & MASK64) % p
        acc = 0
        for a in self._coeffs:
            acc = (acc * x + a) % p
        return acc

    def hash(self, key: int) -> int:
        shift = self._value_bits - self.range_bits
        v = self.field_value(key)
        # range_bits can exceed the field width (61); pad with low zero bits
        # rather than reject, keeping the documented 1..63 contract.
        return v >> shift if shift >= 0 else v << -shift


class TabulationFamily(HashFamily):
    """Simple tabulation: XOR of 8 byte-indexed 64-bit table lookups.

    Tables are filled table-major (all 256 entries of table 0, then table 1,
    ...) from the splitmix64 stream of the seed.
    """

    __slots__ = ("kind", "seed", "range_bits", "_tables")

    def __init__(self, seed: int, range_bits: int) -> None:
        self.kind = HashKind.TABULATION
        self.seed = seed & MASK64
        self.range_bits = range_bits
        sm = SplitMix64(self.seed)
        self._tables = [[sm.next() for _ in range(256)] for _ in range(8)]

    @property
    def tables(self) -> list[list[int]]:
        return self._tables

    def hash(self, key: int) -> int:
        k = key & MASK64
        t = self._tables
        x = (
            t[0][k & 0xFF]
            ^ t[1][(k >> 8) & 0xFF]
            ^ t[2][(k >> 16) & 0xFF]
            ^ t[3][(k >> 24) & 0xFF]
            ^ t[4][(k >> 32) & 0xFF]
            ^ t[5][(k >> 40) & 0xFF]
            ^ t[6][(k >> 48) & 0xFF]
            ^ t[7][(k >> 56) & 0xFF]
        )
        return x >> (64 - self.range_bits)


def new_family(kind: HashKind, seed: int, range_bits: int) -> HashFamily:
    """Construct a hash family; range_bits must lie in [1, 63]."""
    if not isinstance(range_bits, int) or isinstance(range_bits, bool):
        raise ValueError(f"range_bits must be an int, got {range_bits!r}")
    if not 1 <= range_bits <= 63:
        raise ValueError(f"range_bits must be in [1, 63], got {range_bits}")
    if kind is HashKind.POLY5:
        return Poly5Family(seed, range_bits)
    if kind is HashKind.TABULATION:
        return TabulationFamily(seed, range_bits)
    raise ValueError(f"unknown hash kind: {kind!r}")
