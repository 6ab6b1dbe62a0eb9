"""The arithmetic layer: signatures, splitting data, tame scans, rank formula.

Number fields enter as monic irreducible integer polynomials.  Everything a
scan needs is computed from scratch here: Sturm sequences over exact
rationals for the signature, distinct-degree factorization mod ell for
residue degrees, p-adic valuations of norms for tame levels.  sympy is used
only for the polynomial discriminant and the irreducibility check.

A rational prime ell is m-tame for (f, p) when some prime above it has norm
ell^f_i = 1 (mod p^m).  Primes dividing disc(f) are reported but flagged
untrusted instead of running a maximal-order algorithm; the scans skip them.

The finite-level abelianization check compares the p-part of
(Z/(p^B * prod ell_i))^x, computed by counting p-power roots of unity
elementwise (a hot kernel), against the predicted
Z/p^(B-1) x prod Z/p^(v_p(ell_i - 1)).
"""

from __future__ import annotations

import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
import sympy

from . import _kernels
from .rings import is_prime, valuation

__all__ = [
    "NotSquarefreeError",
    "NumberField",
    "ResidueDegrees",
    "TamePrimeReport",
    "RankReport",
    "QRayStructure",
    "parse_poly",
    "poly_to_string",
    "signature",
    "residue_degrees",
    "tame_level",
    "scan_tame",
    "rank_report",
    "q_ray_structure",
    "multiquadratic_residue_degree",
    "wieferich_test",
    "wieferich_scan",
    "primes_up_to",
]


class NotSquarefreeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# dense polynomials, coefficients ascending: coeffs[i] is the x^i coefficient
# ---------------------------------------------------------------------------

_TERM = re.compile(r"^([+-]?)(\d+)?(?:\*?x(?:\^(\d+))?)?$")


def parse_poly(text) -> tuple:
    """Parse 'x^8-32*x^6+344*x^4-512*x^2+1936' (or a coefficient list,
    ascending) into an ascending coefficient tuple."""
    if isinstance(text, (list, tuple)):
        coeffs = [int(c) for c in text]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        return tuple(coeffs)
    s = str(text).replace(" ", "").replace("**", "^").lower()
    if not s:
        raise ValueError("empty polynomial")
    terms = re.findall(r"[+-]?[^+-]+", s)
    if "".join(terms) != s:
        raise ValueError(f"cannot parse polynomial {text!r}")
    coeffs: dict = {}
    for term in terms:
        m = _TERM.match(term)
        if not m or term in ("", "+", "-"):
            raise ValueError(f"cannot parse term {term!r}")
        sign = -1 if m.group(1) == "-" else 1
        digits = m.group(2)
        has_x = "x" in term
        if digits is None and not has_x:
            raise ValueError(f"cannot parse term {term!r}")
        coeff = sign * int(digits) if digits is not None else sign
        exp = int(m.group(3)) if m.group(3) else (1 if has_x else 0)
        coeffs[exp] = coeffs.get(exp, 0) + coeff
    degree = max(coeffs)
    return tuple(coeffs.get(i, 0) for i in range(degree + 1))


def poly_to_string(coeffs: Sequence[int]) -> str:
    parts = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if c == 0:
            continue
        mag = abs(c)
        if i == 0:
            body = str(mag)
        elif i == 1:
            body = "x" if mag == 1 else f"{mag}*x"
        else:
            body = f"x^{i}" if mag == 1 else f"{mag}*x^{i}"
        parts.append(("-" if c < 0 else "+", body))
    if not parts:
        return "0"
    sign, body = parts[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        out += sign + body
    return out


def _deg(a) -> int:
    for i in range(len(a) - 1, -1, -1):
        if a[i] != 0:
            return i
    return -1


def _derivative(a):
    return [i * a[i] for i in range(1, len(a))] or [0]


def _eval_fraction(a, x: Fraction) -> Fraction:
    out = Fraction(0)
    for c in reversed(a):
        out = out * x + c
    return out


def _frac_divmod(a, b):
    a = [Fraction(c) for c in a]
    b = [Fraction(c) for c in b]
    db = _deg(b)
    if db < 0:
        raise ZeroDivisionError
    q = [Fraction(0)] * max(1, len(a) - db)
    r = a[:]
    while _deg(r) >= db:
        dr = _deg(r)
        f = r[dr] / b[db]
        q[dr - db] = f
        for i in range(db + 1):
            r[dr - db + i] -= f * b[i]
    return q, r


def _frac_gcd_degree(a, b) -> int:
    """Degree of gcd(a, b) over Q."""
    a = [Fraction(c) for c in a]
    b = [Fraction(c) for c in b]
    while _deg(b) >= 0:
        _, r = _frac_divmod(a, b)
        a, b = b, r
    return _deg(a)


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def _sign_changes(signs) -> int:
    signs = [s for s in signs if s != 0]
    return sum(1 for s, t in zip(signs, signs[1:]) if s * t < 0)


def signature(f) -> tuple:
    """(r1, r2) by Sturm's theorem with exact rational arithmetic.

    The Sturm chain is evaluated at minus and plus infinity via leading
    coefficients, so no root bound is needed.
    """
    coeffs = f.coeffs if isinstance(f, NumberField) else parse_poly(f)
    d = _deg(coeffs)
    if d < 1:
        raise ValueError("constant polynomial has no signature")
    if _frac_gcd_degree(coeffs, _derivative(coeffs)) > 0:
        raise NotSquarefreeError("polynomial is not squarefree")
    chain = [[Fraction(c) for c in coeffs], [Fraction(c) for c in _derivative(coeffs)]]
    while _deg(chain[-1]) > 0:
        _, r = _frac_divmod(chain[-2], chain[-1])
        r = [-c for c in r]
        if _deg(r) < 0:
            break
        chain.append(r)
    at_plus = [_sign(pol[_deg(pol)]) for pol in chain if _deg(pol) >= 0]
    at_minus = [
        _sign(pol[_deg(pol)]) * (-1) ** _deg(pol) for pol in chain if _deg(pol) >= 0
    ]
    r1 = _sign_changes(at_minus) - _sign_changes(at_plus)
    if (d - r1) % 2:
        raise AssertionError("parity violation in root count")
    return r1, (d - r1) // 2


# ---------------------------------------------------------------------------
# polynomials over F_ell
# ---------------------------------------------------------------------------


def _pmod(a, l):
    a = [c % l for c in a]
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def _pmul(a, b, l):
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] = (out[i + j] + ca * cb) % l
    return _pmod(out, l)


def _pdivmod(a, b, l):
    a = _pmod(a, l)
    b = _pmod(b, l)
    db = _deg(b)
    inv = pow(b[db], -1, l)
    q = [0] * max(1, len(a) - db)
    r = a[:]
    while _deg(r) >= db:
        dr = _deg(r)
        fq = r[dr] * inv % l
        q[dr - db] = fq
        for i in range(db + 1):
            r[dr - db + i] = (r[dr - db + i] - fq * b[i]) % l
        r = _pmod(r, l)
    return _pmod(q, l), r


def _pgcd(a, b, l):
    a, b = _pmod(a, l), _pmod(b, l)
    while _deg(b) >= 0:
        _, r = _pdivmod(a, b, l)
        a, b = b, r
    da = _deg(a)
    if da < 0:
        return a
    inv = pow(a[da], -1, l)
    return _pmod([c * inv for c in a], l)


def _ppowmod(base, e, mod_poly, l):
    out = [1]
    base = _pdivmod(base, mod_poly, l)[1]
    while e > 0:
        if e & 1:
            out = _pdivmod(_pmul(out, base, l), mod_poly, l)[1]
        base = _pdivmod(_pmul(base, base, l), mod_poly, l)[1]
        e >>= 1
    return out


def _squarefree_decomposition(f, l):
    """[(multiplicity, squarefree factor-product)], characteristic-aware."""
    out = []
    e = 1
    f = _pmod(f, l)
    lead_inv = pow(f[_deg(f)], -1, l)
    f = _pmod([c * lead_inv for c in f], l)
    while _deg(f) > 0:
        d = _pmod(_derivative(f), l)
        if _deg(d) < 0:
            # f = g(x^l) = g(x)^l over the prime field
            f = _pmod([f[i] for i in range(0, len(f), l)], l)
            e *= l
            continue
        c = _pgcd(f, d, l)
        w = _pdivmod(f, c, l)[0]
        i = 1
        while _deg(w) > 0:
            y = _pgcd(w, c, l)
            z = _pdivmod(w, y, l)[0]
            if _deg(z) > 0:
                out.append((i * e, z))
            w = y
            c = _pdivmod(c, y, l)[0]
            i += 1
        f = c
    return out


def _distinct_degree_factorization(s, l):
    """[(d, product of all irreducible factors of degree d)] for squarefree s."""
    out = []
    v = _pmod(s, l)
    h = [0, 1]
    d = 0
    x = [0, 1]
    while _deg(v) >= 2 * (d + 1):
        d += 1
        h = _ppowmod(h, l, v, l)
        diff = _pmod([(a - b) % l for a, b in zip(h + [0] * len(x), x + [0] * len(h))], l)
        g = _pgcd(diff, v, l)
        if _deg(g) > 0:
            out.append((d, g))
            v = _pdivmod(v, g, l)[0]
            h = _pdivmod(h, v, l)[1] if _deg(v) > 0 else [0]
    if _deg(v) > 0:
        out.append((_deg(v), v))
    return out


@dataclass(frozen=True)
class ResidueDegrees:
    degrees: tuple          # sorted multiset of residue degrees
    squarefree: bool        # f mod ell squarefree
    untrusted: bool         # ell divides disc(f): Z[theta] may be non-maximal


def residue_degrees(f, ell: int) -> ResidueDegrees:
    """Degrees of the irreducible factors of f mod ell, with multiplicity."""
    field = f if isinstance(f, NumberField) else NumberField.create(f)
    if not is_prime(ell):
        raise ValueError(f"{ell} is not prime")
    coeffs = _pmod(list(field.coeffs), ell)
    degrees = []
    for mult, s in _squarefree_decomposition(coeffs, ell):
        for d, g in _distinct_degree_factorization(s, ell):
            degrees.extend([d] * (mult * (_deg(g) // d)))
    fbar = coeffs
    deriv = _pmod(_derivative(fbar), ell)
    squarefree = _deg(_pgcd(fbar, deriv, ell)) == 0
    return ResidueDegrees(
        tuple(sorted(degrees)), squarefree, field.discriminant % ell == 0
    )


def tame_level(ell: int, f_deg: int, p: int) -> int:
    """v_p(ell^f_deg - 1), the tame level of a degree-f_deg prime above ell."""
    if ell == p:
        raise ValueError("ell must differ from p")
    if f_deg < 1:
        raise ValueError("residue degree must be >= 1")
    n = ell**f_deg - 1
    if n % p:
        return 0
    return valuation(n, p)


@dataclass(frozen=True)
class TamePrimeReport:
    ell: int
    degrees: tuple       # residue degrees of the primes above ell
    norms: tuple         # ell^f per prime
    levels: tuple        # v_p(norm - 1) per prime
    max_level: int
    divides_disc: bool
    ramified_in_f: bool  # f mod ell not squarefree


def _tame_report(field: "NumberField", ell: int, p: int) -> TamePrimeReport:
    rd = residue_degrees(field, ell)
    norms = tuple(ell**d for d in rd.degrees)
    levels = tuple(0 if (n - 1) % p else valuation(n - 1, p) for n in norms)
    return TamePrimeReport(
        ell,
        rd.degrees,
        norms,
        levels,
        max(levels) if levels else 0,
        rd.untrusted,
        not rd.squarefree,
    )


def primes_up_to(bound: int) -> list:
    if bound < 2:
        return []
    sieve = np.ones(bound + 1, dtype=bool)
    sieve[:2] = False
    for q in range(2, int(bound**0.5) + 1):
        if sieve[q]:
            sieve[q * q :: q] = False
    return [int(q) for q in np.nonzero(sieve)[0]]


def _thread_count() -> int:
    env = os.environ.get("PPG_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _sharded(fn, items):
    """Map fn over shards of items on worker threads; order-preserving."""
    workers = _thread_count()
    if workers <= 1 or len(items) < 32:
        return [fn(chunk) for chunk in [items]] if items else []
    size = -(-len(items) // workers)
    chunks = [items[i : i + size] for i in range(0, len(items), size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


def scan_tame(f, p: int, m: int, bound: int) -> list:
    """All ell <= bound, coprime to p*disc(f), with an m-tame prime above.

    Output is ascending in ell and identical for any worker count.
    """
    field = f if isinstance(f, NumberField) else NumberField.create(f)
    if bound < 2:
        raise ValueError("bound must be >= 2")
    disc = field.discriminant
    candidates = [
        ell for ell in primes_up_to(bound) if ell != p and (disc % ell if disc else True)
    ]

    def work(chunk):
        out = []
        for ell in chunk:
            report = _tame_report(field, ell, p)
            if report.max_level >= m:
                out.append(report)
        return out

    results = []
    for part in _sharded(work, candidates):
        results.extend(part)
    return results


@dataclass(frozen=True)
class RankReport:
    p: int
    delta_s: int
    t_size: int
    rank: int            # delta_S - (r1 + r2 - 1 + |T|)
    unipotent_size: int  # 2*rank + 1
    signature: tuple


def rank_report(f, p: int, s_mode: str = "all", t_size: int = 0, chosen=None) -> RankReport:
    """The free-rank formula for the maximal pro-p quotient.

    s_mode 'all' takes every p-adic place (delta_S = deg f); 'subset' sums the
    local degrees selected by `chosen` (indices into the sorted residue-degree
    multiset at p), requiring p coprime to disc(f).
    """
    field = f if isinstance(f, NumberField) else NumberField.create(f)
    r1, r2 = field.signature
    if s_mode == "all":
        delta = field.degree
    elif s_mode == "subset":
        if field.discriminant % p == 0:
            raise ValueError("subset mode needs p coprime to disc(f)")
        degrees = residue_degrees(field, p).degrees
        if chosen is None:
            chosen = range(len(degrees))
        delta = sum(degrees[i] for i in chosen)
    else:
        raise ValueError("s_mode must be 'all' or 'subset'")
    if t_size < 0:
        raise ValueError("t_size must be >= 0")
    rank = delta - (r1 + r2 - 1 + t_size)
    return RankReport(p, delta, t_size, rank, 2 * rank + 1, (r1, r2))


@dataclass(frozen=True)
class QRayStructure:
    p: int
    tame_primes: tuple
    exponents: tuple     # n_i = v_p(ell_i - 1)
    truncation: int      # B
    computed: tuple      # cyclic orders of the p-part, ascending
    predicted: tuple
    match: bool


def q_ray_structure(p: int, tame_primes: Sequence[int], B: int) -> QRayStructure:
    """p-part of (Z/(p^B prod ell_i))^x, counted elementwise, vs the predicted
    Z/p^(B-1) x prod Z/p^(v_p(ell_i - 1)).

    Rational field only; p odd.
    """
    if p == 2:
        raise ValueError("p must be odd")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if B < 1:
        raise ValueError("B must be >= 1")
    ells = [int(l) for l in tame_primes]
    for ell in ells:
        if not is_prime(ell) or ell == p or ell % p != 1:
            raise ValueError(f"{ell} is not a tame prime for p={p}")
    exponents = tuple(valuation(ell - 1, p) for ell in ells)
    modulus = p**B
    for ell in ells:
        modulus *= ell
    kmax = (B - 1) + max(exponents, default=0) + 1
    counts = _kernels.count_pk_roots(modulus, p, kmax)
    # counts[k] = p^(sum of min(k, a_i)); peel the invariant factors off
    exps = []
    for k in range(kmax + 1):
        c = int(counts[k])
        e = 0
        while p**e < c:
            e += 1
        if p**e != c:
            raise AssertionError("root count is not a p-power")
        exps.append(e)
    ge_counts = [exps[k] - exps[k - 1] for k in range(1, kmax + 1)]
    computed = []
    for j in range(1, kmax + 1):
        following = ge_counts[j] if j < kmax else 0
        computed.extend([p**j] * (ge_counts[j - 1] - following))
    predicted = [p**n for n in exponents]
    if B >= 2:
        predicted.append(p ** (B - 1))
    computed_t = tuple(sorted(computed))
    predicted_t = tuple(sorted(predicted))
    return QRayStructure(
        p,
        tuple(ells),
        exponents,
        B,
        computed_t,
        predicted_t,
        computed_t == predicted_t,
    )


def _squarefree_int(n: int) -> bool:
    n = abs(n)
    q = 2
    while q * q <= n:
        if n % (q * q) == 0:
            return False
        q += 1
    return True


def multiquadratic_residue_degree(d_list: Sequence[int], ell: int) -> tuple:
    """Residue degree (1 or 2) of primes above ell in Q(sqrt(d_1), ...).

    f = 1 exactly when every d_i is a quadratic residue mod ell; ramified when
    ell divides some d_i.  Frobenius lives in (Z/2)^k, so f never exceeds 2.
    """
    if ell == 2:
        raise ValueError("ell = 2 is unsupported")
    if not is_prime(ell):
        raise ValueError(f"{ell} is not prime")
    ds = [int(d) for d in d_list]
    if not ds:
        raise ValueError("empty d_list")
    for d in ds:
        if d in (0, 1) or not _squarefree_int(d):
            raise ValueError(f"{d} is not admissible (must be squarefree, not 0 or 1)")
    for i in range(len(ds)):
        for j in range(i + 1, len(ds)):
            prod = ds[i] * ds[j]
            root = int(round(abs(prod) ** 0.5))
            if prod > 0 and root * root == prod:
                raise ValueError(f"{ds[i]} and {ds[j]} agree mod squares")
    ramified = any(d % ell == 0 for d in ds)
    fdeg = 1
    for d in ds:
        if d % ell == 0:
            continue
        if pow(d % ell, (ell - 1) // 2, ell) != 1:
            fdeg = 2
            break
    return fdeg, ramified


def wieferich_test(ell: int, p: int) -> bool:
    """ell^(p-1) = 1 (mod p^2)?"""
    if ell < 2:
        raise ValueError("base must be >= 2")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if ell % p == 0:
        raise ValueError("p divides the base")
    return pow(ell, p - 1, p * p) == 1


def wieferich_scan(ell: int, p_bound: int) -> list:
    """All primes p <= p_bound with ell^(p-1) = 1 (mod p^2)."""
    if ell < 2:
        raise ValueError("base must be >= 2")
    candidates = [p for p in primes_up_to(p_bound) if ell % p]

    def work(chunk):
        return [p for p in chunk if pow(ell, p - 1, p * p) == 1]

    out = []
    for part in _sharded(work, candidates):
        out.extend(part)
    return out


class NumberField:
    """A number field by monic irreducible defining polynomial."""

    def __init__(self, coeffs: tuple):
        self.coeffs = tuple(int(c) for c in coeffs)
        self.degree = _deg(self.coeffs)
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        if self.coeffs[self.degree] != 1:
            raise ValueError("defining polynomial must be monic")
        if len(self.coeffs) != self.degree + 1:
            self.coeffs = self.coeffs[: self.degree + 1]
        if not self._irreducible():
            raise ValueError("defining polynomial is reducible")

    @classmethod
    def create(cls, f) -> "NumberField":
        if isinstance(f, NumberField):
            return f
        return cls(parse_poly(f))

    def _irreducible(self) -> bool:
        if self.degree == 1:
            return True
        x = sympy.Symbol("x")
        poly = sympy.Poly(
            sum(c * x**i for i, c in enumerate(self.coeffs)), x, domain="ZZ"
        )
        return poly.is_irreducible

    @cached_property
    def discriminant(self) -> int:
        if self.degree == 1:
            return 1
        x = sympy.Symbol("x")
        poly = sympy.Poly(
            sum(c * x**i for i, c in enumerate(self.coeffs)), x, domain="ZZ"
        )
        return int(sympy.discriminant(poly, x))

    @cached_property
    def signature(self) -> tuple:
        return signature(self)

    def __repr__(self):
        return f"NumberField({poly_to_string(self.coeffs)})"
