"""Exact arithmetic core: scalars in a localization Z[1/b], 2x2 unimodular
matrices over Q, and freely reduced group words with matrix evaluation.

Everything here is exact; no floating point is used anywhere.  Scalars are
`fractions.Fraction` values kept fully reduced, so equality is structural.
Membership in a localization Z[1/b] is a constructor-time validation against
a supplied base, not a separate numeric type.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Optional, Sequence, Tuple

Scalar = Fraction

_ENTRY_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def prime_factors(n: int) -> list[int]:
    """Distinct prime divisors of |n|, in increasing order."""
    n = abs(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def in_localization(q: Fraction, base: int) -> bool:
    """True iff q lies in Z[1/base], i.e. every prime of the denominator
    divides base.  Denominator 1 is valid for any base."""
    den = q.denominator
    if den == 1:
        return True
    if base <= 1:
        return False
    for p in prime_factors(den):
        if base % p != 0:
            return False
    return True


def check_localized(q: Fraction, base: int) -> Fraction:
    """Validate q in Z[1/base]; returns q unchanged or raises ValueError."""
    if not in_localization(q, base):
        raise ValueError(f"{q} is not an element of Z[1/{base}]")
    return q


@dataclass(frozen=True)
class UniModularMatrix:
    """2x2 matrix over Q with determinant exactly 1.

    Immutable and hashable; arithmetic returns new instances.
    """

    e11: Fraction
    e12: Fraction
    e21: Fraction
    e22: Fraction

    def __post_init__(self):
        for name in ("e11", "e12", "e21", "e22"):
            v = getattr(self, name)
            if not isinstance(v, Fraction):
                object.__setattr__(self, name, Fraction(v))
        if self.e11 * self.e22 - self.e12 * self.e21 != 1:
            raise ValueError(f"determinant is not 1: {self.rows()}")

    # -- construction ------------------------------------------------------

    @staticmethod
    def identity() -> "UniModularMatrix":
        return _IDENTITY

    @staticmethod
    def from_rows(rows: Sequence[Sequence]) -> "UniModularMatrix":
        (a, b), (c, d) = rows
        return UniModularMatrix(Fraction(a), Fraction(b), Fraction(c), Fraction(d))

    def rows(self) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
        return ((self.e11, self.e12), (self.e21, self.e22))

    # -- arithmetic --------------------------------------------------------

    def __mul__(self, other: "UniModularMatrix") -> "UniModularMatrix":
        return UniModularMatrix(
            self.e11 * other.e11 + self.e12 * other.e21,
            self.e11 * other.e12 + self.e12 * other.e22,
            self.e21 * other.e11 + self.e22 * other.e21,
            self.e21 * other.e12 + self.e22 * other.e22,
        )

    def inv(self) -> "UniModularMatrix":
        # det = 1, so the adjugate is the inverse
        return UniModularMatrix(self.e22, -self.e12, -self.e21, self.e11)

    def __neg__(self) -> "UniModularMatrix":
        return UniModularMatrix(-self.e11, -self.e12, -self.e21, -self.e22)

    def pow(self, k: int) -> "UniModularMatrix":
        """Binary exponentiation; unipotent matrices short-circuit since
        [[1,x],[0,1]]^k = [[1,kx],[0,1]] (and the lower triangular twin)."""
        if k == 0:
            return _IDENTITY
        if k < 0:
            return self.inv().pow(-k)
        one = Fraction(1)
        if self.e11 == one and self.e22 == one:
            if self.e21 == 0:
                return UniModularMatrix(one, k * self.e12, Fraction(0), one)
            if self.e12 == 0:
                return UniModularMatrix(one, Fraction(0), k * self.e21, one)
        if self == _IDENTITY:
            return _IDENTITY
        if self == _NEG_IDENTITY:
            return _IDENTITY if k % 2 == 0 else _NEG_IDENTITY
        base = self
        acc = _IDENTITY
        while k:
            if k & 1:
                acc = acc * base
            k >>= 1
            if k:
                base = base * base
        return acc

    __pow__ = pow

    def trace(self) -> Fraction:
        return self.e11 + self.e22

    # -- predicates --------------------------------------------------------

    def is_identity(self) -> bool:
        return self == _IDENTITY

    def is_integral(self) -> bool:
        return all(e.denominator == 1 for e in
                   (self.e11, self.e12, self.e21, self.e22))

    def denominator_primes(self) -> set[int]:
        out: set[int] = set()
        for e in (self.e11, self.e12, self.e21, self.e22):
            out.update(prime_factors(e.denominator))
        return out

    def __str__(self) -> str:
        return format_matrix(self)


_IDENTITY = UniModularMatrix(Fraction(1), Fraction(0), Fraction(0), Fraction(1))
_NEG_IDENTITY = UniModularMatrix(Fraction(-1), Fraction(0), Fraction(0), Fraction(-1))


# -- spec-level operation names ---------------------------------------------

def mat_mul(m: UniModularMatrix, n: UniModularMatrix) -> UniModularMatrix:
    return m * n


def mat_inv(m: UniModularMatrix) -> UniModularMatrix:
    return m.inv()


def mat_pow(m: UniModularMatrix, k: int) -> UniModularMatrix:
    return m.pow(k)


def trace(m: UniModularMatrix) -> Fraction:
    return m.trace()


def make_moebius_generators(a: int, b: int) -> tuple[UniModularMatrix, UniModularMatrix]:
    """The parabolic pair A(a/b) = [[1,a/b],[0,1]], B(a/b) = [[1,0],[a/b,1]].

    Requires a > 0, b > 1 and gcd(a, b) = 1.
    """
    if a <= 0:
        raise ValueError(f"numerator must be positive, got {a}")
    if b <= 1:
        raise ValueError(f"denominator must exceed 1, got {b}")
    if gcd(a, b) != 1:
        raise ValueError(f"gcd({a}, {b}) != 1")
    m = Fraction(a, b)
    one, zero = Fraction(1), Fraction(0)
    return (UniModularMatrix(one, m, zero, one),
            UniModularMatrix(one, zero, m, one))


def is_finite_order(m: UniModularMatrix) -> Optional[int]:
    """Order of m if finite, else None.

    In SL(2, Q) an element has finite order iff it is +-1 or its trace lies
    in {-1, 0, 1}; possible orders divide 12, so a bounded multiplication
    loop confirms the order exactly.
    """
    if m == _IDENTITY:
        return 1
    if m == _NEG_IDENTITY:
        return 2
    if m.trace() not in (-1, 0, 1):
        return None
    acc = m
    for k in range(2, 13):
        acc = acc * m
        if acc == _IDENTITY:
            return k
    raise AssertionError(f"trace criterion violated for {m}")


# -- group words -------------------------------------------------------------

Syllable = Tuple[str, int]


def _reduce_syllables(syllables: Iterable[Syllable]) -> tuple[Syllable, ...]:
    stack: list[list] = []
    for sym, exp in syllables:
        if exp == 0:
            continue
        if stack and stack[-1][0] == sym:
            stack[-1][1] += exp
            if stack[-1][1] == 0:
                stack.pop()
        else:
            stack.append([sym, exp])
    return tuple((s, e) for s, e in stack)


@dataclass(frozen=True)
class GroupWord:
    """Freely reduced word over abstract generator symbols.

    Syllables are (symbol, exponent) pairs with nonzero integer exponents
    and distinct adjacent symbols.  Use `word()` to build one from raw
    syllables; the constructor trusts its input.
    """

    syllables: tuple[Syllable, ...] = ()

    def __post_init__(self):
        for i, (sym, exp) in enumerate(self.syllables):
            if exp == 0:
                raise ValueError("zero exponent in word")
            if i and self.syllables[i - 1][0] == sym:
                raise ValueError("word is not freely reduced")

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        # only the seam needs re-reduction
        return GroupWord(_reduce_syllables(self.syllables + other.syllables))

    def inv(self) -> "GroupWord":
        return GroupWord(tuple((s, -e) for s, e in reversed(self.syllables)))

    def __pow__(self, k: int) -> "GroupWord":
        if k == 0:
            return GroupWord()
        base = self if k > 0 else self.inv()
        out = base
        for _ in range(abs(k) - 1):
            out = out * base
        return out

    def is_empty(self) -> bool:
        return not self.syllables

    @property
    def length(self) -> int:
        """Number of syllables."""
        return len(self.syllables)

    @property
    def weight(self) -> int:
        """Total of absolute exponents."""
        return sum(abs(e) for _, e in self.syllables)

    def symbols(self) -> set[str]:
        return {s for s, _ in self.syllables}

    def exponent_sum(self, sym: str) -> int:
        return sum(e for s, e in self.syllables if s == sym)

    def cyclically_reduced(self) -> "GroupWord":
        syl = list(self.syllables)
        while len(syl) >= 2 and syl[0][0] == syl[-1][0]:
            merged = syl[0][1] + syl[-1][1]
            if merged == 0:
                syl = syl[1:-1]
            else:
                syl = [(syl[0][0], merged)] + syl[1:-1]
                break
        return GroupWord(_reduce_syllables(syl))

    def rotated_to(self, sym: str) -> "GroupWord":
        """Cyclic rotation placing a syllable of `sym` first, if present."""
        for i, (s, _) in enumerate(self.syllables):
            if s == sym:
                return GroupWord(_reduce_syllables(
                    self.syllables[i:] + self.syllables[:i]))
        return self

    def __str__(self) -> str:
        return format_word(self)


def word(syllables: Iterable[Syllable]) -> GroupWord:
    """Build a freely reduced GroupWord from raw syllables."""
    return GroupWord(_reduce_syllables(syllables))


def format_word(w: GroupWord) -> str:
    """Render as space-separated syllables, `g` or `g^k` (k != 1)."""
    if w.is_empty():
        return "1"
    parts = []
    for sym, exp in w.syllables:
        parts.append(sym if exp == 1 else f"{sym}^{exp}")
    return " ".join(parts)


def parse_word(text: str) -> GroupWord:
    """Inverse of format_word; accepts `1` for the empty word."""
    text = text.strip()
    if text in ("", "1"):
        return GroupWord()
    syllables = []
    for tok in text.split():
        if "^" in tok:
            sym, _, exp = tok.partition("^")
            if not re.fullmatch(r"[+-]?\d+", exp):
                raise ValueError(f"bad exponent in token {tok!r}")
            syllables.append((sym, int(exp)))
        else:
            syllables.append((tok, 1))
    for sym, _ in syllables:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", sym):
            raise ValueError(f"bad generator symbol {sym!r}")
    return word(syllables)


GeneratorAssignment = Mapping[str, UniModularMatrix]


def evaluate_word(w: GroupWord, asg: GeneratorAssignment) -> UniModularMatrix:
    """Left-to-right product of assigned matrices raised to the syllable
    exponents; the empty word evaluates to the identity."""
    out = UniModularMatrix.identity()
    for sym, exp in w.syllables:
        try:
            m = asg[sym]
        except KeyError:
            raise ValueError(f"no matrix assigned to symbol {sym!r}") from None
        out = out * m.pow(exp)
    return out


# -- exact matrix literals ----------------------------------------------------

def parse_matrix(text: str) -> UniModularMatrix:
    """Parse `[[p/q,r/s],[t/u,v/w]]` with optional integer shorthand.

    Parsing is exact; anything that looks like floating point is rejected.
    """
    stripped = re.sub(r"\s+", "", text)
    m = re.fullmatch(
        r"\[\[([^,\[\]]+),([^,\[\]]+)\],\[([^,\[\]]+),([^,\[\]]+)\]\]", stripped)
    if not m:
        raise ValueError(f"not a 2x2 matrix literal: {text!r}")
    entries = []
    for tok in m.groups():
        if not _ENTRY_RE.match(tok):
            raise ValueError(f"bad exact entry {tok!r} (floats are not accepted)")
        entries.append(Fraction(tok))
    return UniModularMatrix(*entries)


def format_matrix(m: UniModularMatrix) -> str:
    def fmt(e: Fraction) -> str:
        return str(e)
    return (f"[[{fmt(m.e11)},{fmt(m.e12)}],"
            f"[{fmt(m.e21)},{fmt(m.e22)}]]")
