"""Truncated Magnus expansion into F_p<<X_1,...,X_d>> and what it certifies.

The free group embeds into noncommutative power series via x_i |-> 1 + X_i.
Working with series truncated beyond a small degree cap is enough to

- read off each relator's leading monomial and certify (quadratic) mildness,
- extract the quadratic coefficient matrix of a Frattini relator, which is
  the trace form evaluating cup products on relators.

Series are dictionaries monomial -> coefficient with monomials as tuples of
1-based generator indices.  Binomial coefficients C(e, k) mod p only depend on
e mod p^cap for k <= cap (Lucas), so exponents of any size are reduced before
expansion; this is what lets a Demushkin parameter of cryptographic size
through.

For p = 2 squares contribute diagonal terms C(e_i, 2) X_i^2 to the quadratic
form; that is the correct F_2 Magnus algebra but the downstream theory is
stated for odd p, so mildness checks and cup values flag the convention with
a Char2Warning.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .presentations import Presentation, Word

__all__ = [
    "Char2Warning",
    "NonFrattiniRelatorError",
    "ZeroSeriesError",
    "TruncSeries",
    "MonomialOrder",
    "MildCertificate",
    "Rejection",
    "binom_mod",
    "magnus_expand",
    "leading_term",
    "check_mild",
    "quadratic_coeffs",
    "cup_value",
]


class Char2Warning(UserWarning):
    """p = 2 uses the F_2 Magnus conventions (diagonal quadratic terms)."""


class NonFrattiniRelatorError(ValueError):
    """A relator with nonzero degree-1 part: the presentation is not minimal."""


class ZeroSeriesError(ValueError):
    """The zero series has no leading term."""


def binom_mod(e: int, k: int, p: int, cap: int) -> int:
    """C(e, k) mod p for an arbitrary integer e, with k <= cap.

    e is reduced mod p^cap first, which is exact by Lucas' theorem.
    """
    if k > cap:
        raise ValueError("k exceeds the reduction cap")
    if 0 <= e <= p**cap:
        return math.comb(e, k) % p
    return math.comb(e % p**cap, k) % p


@dataclass(frozen=True)
class TruncSeries:
    """Element of F_p<<X_1..X_d>> truncated beyond degree cap.

    coeffs maps monomials (tuples of generator indices, 1-based) to nonzero
    residues mod p; the empty tuple is the constant term.
    """

    p: int
    d: int
    cap: int
    coeffs: tuple  # sorted tuple of (monomial, coefficient)

    @staticmethod
    def make(p: int, d: int, cap: int, raw: dict) -> "TruncSeries":
        cleaned = {}
        for mono, c in raw.items():
            c %= p
            if c and len(mono) <= cap:
                cleaned[tuple(mono)] = c
        return TruncSeries(p, d, cap, tuple(sorted(cleaned.items())))

    @staticmethod
    def one(p: int, d: int, cap: int) -> "TruncSeries":
        return TruncSeries.make(p, d, cap, {(): 1})

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        if (self.p, self.d, self.cap) != (other.p, other.d, other.cap):
            raise ValueError("series parameters mismatch")
        out = {}
        for m1, c1 in self.coeffs:
            for m2, c2 in other.coeffs:
                if len(m1) + len(m2) > self.cap:
                    continue
                mono = m1 + m2
                out[mono] = (out.get(mono, 0) + c1 * c2) % self.p
        return TruncSeries.make(self.p, self.d, self.cap, out)

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        out = self.as_dict()
        for mono, c in other.coeffs:
            out[mono] = (out.get(mono, 0) - c) % self.p
        return TruncSeries.make(self.p, self.d, self.cap, out)

    def minus_one(self) -> "TruncSeries":
        return self - TruncSeries.one(self.p, self.d, self.cap)


def magnus_expand(word: Word, d: int, cap: int, p: int) -> TruncSeries:
    """Image of a free-group word under x_i |-> 1 + X_i, truncated at `cap`."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    out = TruncSeries.one(p, d, cap)
    for g, e in word:
        if not 0 <= g < d:
            raise ValueError(f"generator index {g} out of range")
        letter = {(): 1}
        for k in range(1, cap + 1):
            c = binom_mod(e, k, p, cap)
            if c:
                letter[(g + 1,) * k] = c
        out = out * TruncSeries.make(p, d, cap, letter)
    return out


@dataclass(frozen=True)
class MonomialOrder:
    """Degree first, then left-lexicographic on generator precedence.

    ranks[i] is the precedence of generator i+1; higher rank means greater.
    The default exactly realises X_d > X_{d-1} > ... > X_1.
    """

    ranks: tuple

    def __post_init__(self):
        if sorted(self.ranks) != list(range(1, len(self.ranks) + 1)):
            raise ValueError("ranks must be a permutation of 1..d")

    @staticmethod
    def default(d: int) -> "MonomialOrder":
        return MonomialOrder(tuple(range(1, d + 1)))

    def key(self, mono: tuple):
        """Sort key under which the leading monomial is the maximum."""
        return (-len(mono), tuple(self.ranks[g - 1] for g in mono))


def leading_term(series: TruncSeries, order: MonomialOrder):
    """The greatest nonzero term: lowest degree, then largest left-lex."""
    if series.is_zero():
        raise ZeroSeriesError("zero series has no leading term")
    mono = max((m for m, _ in series.coeffs), key=order.key)
    return mono, dict(series.coeffs)[mono]


@dataclass(frozen=True)
class MildCertificate:
    """Quadratic leading terms X_head X_tail with disjoint head and tail sets."""

    leading: tuple        # per relator: (head, tail) generator indices, 1-based
    heads: frozenset
    tails: frozenset
    order: MonomialOrder
    char2: bool = False


@dataclass(frozen=True)
class Rejection:
    relator_index: int
    reason: str
    leading: Optional[tuple] = None     # (monomial, coefficient)
    inconclusive: bool = False
    char2: bool = False


def check_mild(pres: Presentation, order: Optional[MonomialOrder] = None, depth: int = 3):
    """Certify the presentation quadratic-mild, or reject with the culprit.

    A relator whose expansion is trivial up to `depth` is rejected as
    inconclusive at truncation, which is distinct from being non-mild.
    """
    if not 2 <= depth <= 6:
        raise ValueError("depth must be between 2 and 6")
    d = pres.h1
    if order is None:
        order = MonomialOrder.default(d)
    if len(order.ranks) != d:
        raise ValueError("order size does not match generator count")
    char2 = pres.p == 2
    if char2:
        warnings.warn("p = 2: quadratic terms follow the F_2 convention", Char2Warning)
    leading = []
    for idx, rel in enumerate(pres.relators):
        if not rel:
            raise ValueError(f"relator {idx} is the empty word")
        series = magnus_expand(rel, d, depth, pres.p).minus_one()
        if series.is_zero():
            return Rejection(idx, "inconclusive at truncation", inconclusive=True, char2=char2)
        mono, coeff = leading_term(series, order)
        if len(mono) != 2:
            return Rejection(
                idx,
                f"leading term has degree {len(mono)}",
                leading=(mono, coeff),
                char2=char2,
            )
        head, tail = mono
        if head == tail or order.ranks[head - 1] <= order.ranks[tail - 1]:
            return Rejection(
                idx,
                "quadratic leading term is not greater*lesser",
                leading=(mono, coeff),
                char2=char2,
            )
        leading.append((head, tail))
    heads = frozenset(h for h, _ in leading)
    tails = frozenset(t for _, t in leading)
    overlap = heads & tails
    if overlap:
        for idx, (head, tail) in enumerate(leading):
            if head in overlap or tail in overlap:
                return Rejection(
                    idx,
                    "head letters meet tail letters",
                    leading=((leading[idx][0], leading[idx][1]), None),
                    char2=char2,
                )
    return MildCertificate(tuple(leading), heads, tails, order, char2)


def quadratic_coeffs(relator: Word, d: int, p: int) -> np.ndarray:
    """eps[i][j] = coefficient of X_{i+1} X_{j+1} in the expansion minus 1.

    Requires the degree-1 part to vanish (a Frattini relator); otherwise the
    presentation is not minimal and NonFrattiniRelatorError is raised.
    """
    series = magnus_expand(relator, d, 2, p).minus_one()
    eps = np.zeros((d, d), dtype=np.int64)
    for mono, c in series.coeffs:
        if len(mono) == 1:
            raise NonFrattiniRelatorError(
                f"degree-1 coefficient {c} at X_{mono[0]}; relator is not Frattini"
            )
        i, j = mono
        eps[i - 1, j - 1] = c
    return eps


def cup_value(chi_a, chi_b, pres: Presentation) -> tuple:
    """The relator-indexed pairing sum eps_k[i][j] chi_a(x_i) chi_b(x_j) mod p.

    The cup product chi_a U chi_b vanishes iff every component is zero; only
    that zero-test is contractual, the sign convention is fixed as stated.
    """
    d = pres.h1
    p = pres.p
    if p == 2:
        warnings.warn("p = 2: cup pairing follows the F_2 convention", Char2Warning)
    a = np.asarray(chi_a, dtype=np.int64) % p
    b = np.asarray(chi_b, dtype=np.int64) % p
    if a.shape != (d,) or b.shape != (d,):
        raise ValueError("character vectors must have one value per generator")
    out = []
    for rel in pres.relators:
        eps = quadratic_coeffs(rel, d, p)
        out.append(int(a @ eps @ b % p))
    return tuple(out)
