"""Exact arithmetic and linear algebra over Z/p^m and F_p.

Everything downstream (matrix groups, the lifting solver, the scans) sits on
top of this module.  Values are immutable and all operations are pure, so they
are safe to share across worker threads.

The linear solver works over the chain ring Z/p^m: a matrix is reduced to
diagonal form diag(p^(v_1), ..., p^(v_r), 0, ...) by row/column operations,
pivoting on the entry of minimal p-adic valuation.  From that form one reads
off a particular solution and a generating set of the kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PrimePower",
    "ZMod",
    "LinSystem",
    "Solution",
    "is_prime",
    "valuation",
    "solve_affine",
    "fp_rank",
]

# Deterministic Miller-Rabin witness set, valid for all n < 2^64.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic primality test for n < 2^64."""
    if n < 2:
        return False
    if n >= 1 << 64:
        raise ValueError("primality test limited to n < 2^64")
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def valuation(x, p: int) -> int:
    """Largest e with p^e | x.

    For a ZMod that is zero in Z/p^m, returns the saturation value m (this
    keeps pivot selection total).  A plain integer 0 has no finite valuation
    and is rejected.
    """
    if isinstance(x, ZMod):
        if x.value == 0:
            return x.ring.m
        return min(valuation(x.value, p), x.ring.m)
    if not isinstance(x, int):
        raise TypeError(f"expected int or ZMod, got {type(x).__name__}")
    if x == 0:
        raise ValueError("valuation of integer 0 is infinite; use a ZMod for the saturated convention")
    if p < 2 or not is_prime(p):
        raise ValueError(f"{p} is not prime")
    x = abs(x)
    e = 0
    while x % p == 0:
        x //= p
        e += 1
    return e


@dataclass(frozen=True)
class PrimePower:
    """The ring Z/p^m, with p prime and m >= 1.

    The modulus p^m must fit in 64 bits so that intermediate products stay
    within 128 bits; larger moduli are rejected at construction.
    """

    p: int
    m: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.m < 1:
            raise ValueError("exponent m must be >= 1")
        if self.p ** self.m > 1 << 64:
            raise ValueError("modulus p^m exceeds 64 bits")

    @property
    def modulus(self) -> int:
        return self.p ** self.m

    def element(self, value: int) -> "ZMod":
        return ZMod(value % self.modulus, self)

    @property
    def zero(self) -> "ZMod":
        return self.element(0)

    @property
    def one(self) -> "ZMod":
        return self.element(1)

    def __repr__(self):
        return f"Z/{self.p}^{self.m}" if self.m > 1 else f"F_{self.p}"


@dataclass(frozen=True)
class ZMod:
    """Canonical residue in [0, p^m)."""

    value: int
    ring: PrimePower

    def __post_init__(self):
        if not 0 <= self.value < self.ring.modulus:
            raise ValueError("residue out of range; use PrimePower.element to reduce")

    def _coerce(self, other) -> "ZMod":
        if isinstance(other, ZMod):
            if other.ring != self.ring:
                raise ValueError("mixed rings")
            return other
        if isinstance(other, int):
            return self.ring.element(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.ring.element(self.value + o.value)

    __radd__ = __add__

    def __neg__(self):
        return self.ring.element(-self.value)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.ring.element(self.value - o.value)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.ring.element(self.value * o.value)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return self.ring.element(pow(self.value, e, self.ring.modulus))

    @property
    def val(self) -> int:
        """p-adic valuation, saturated at m for the zero residue."""
        return valuation(self, self.ring.p)

    def is_unit(self) -> bool:
        return self.value % self.ring.p != 0

    def inverse(self) -> "ZMod":
        if not self.is_unit():
            raise ZeroDivisionError(f"{self.value} is not a unit in {self.ring}")
        return self.ring.element(pow(self.value, -1, self.ring.modulus))

    def __repr__(self):
        return f"{self.value} (mod {self.ring.modulus})"


@dataclass(frozen=True)
class LinSystem:
    """An affine system  matrix * x = rhs  over a single Z/p^m."""

    matrix: tuple
    rhs: tuple
    ring: PrimePower

    @staticmethod
    def build(matrix: Sequence[Sequence], rhs: Sequence, ring: PrimePower) -> "LinSystem":
        rows = tuple(tuple(_as_int(e, ring) for e in row) for row in matrix)
        b = tuple(_as_int(e, ring) for e in rhs)
        if len(rows) != len(b):
            raise ValueError("matrix/rhs row count mismatch")
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged matrix")
        return LinSystem(rows, b, ring)


@dataclass(frozen=True)
class Solution:
    """One particular solution plus a generating set of the homogeneous kernel."""

    particular: tuple
    kernel_basis: tuple
    ring: PrimePower

    def span(self) -> Iterable[tuple]:
        """Enumerate the full solution set (intended for small systems only)."""
        mod = self.ring.modulus
        n = len(self.particular)
        seen = {self.particular}
        frontier = [self.particular]
        while frontier:
            nxt = []
            for x in frontier:
                for g in self.kernel_basis:
                    y = tuple((a + b) % mod for a, b in zip(x, g))
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return sorted(seen)


def _as_int(e, ring: PrimePower) -> int:
    if isinstance(e, ZMod):
        if e.ring != ring:
            raise ValueError("mixed rings")
        return e.value
    return int(e) % ring.modulus


def _val(x: int, p: int, m: int) -> int:
    if x == 0:
        return m
    v = 0
    while x % p == 0 and v < m:
        x //= p
        v += 1
    return v


def _local_smith(matrix: list, ring: PrimePower):
    """Diagonalize over Z/p^m by row and column operations.

    Returns (diag_vals, U, V, rank) with U*M*V = diag(p^v_1, ..., p^v_r, 0...).
    Pivots are the entries of minimal valuation remaining, ties broken by
    lowest column then lowest row index, which makes the reduction
    deterministic.
    """
    p, m, mod = ring.p, ring.m, ring.modulus
    A = [row[:] for row in matrix]
    nr = len(A)
    nc = len(A[0]) if nr else 0
    U = [[1 if i == j else 0 for j in range(nr)] for i in range(nr)]
    V = [[1 if i == j else 0 for j in range(nc)] for i in range(nc)]
    diag = []
    k = 0
    while k < min(nr, nc):
        best = None
        for c in range(k, nc):
            for r in range(k, nr):
                v = _val(A[r][c], p, m)
                if v < m and (best is None or v < best[0]):
                    best = (v, c, r)
        if best is None:
            break
        v, c, r = best
        if r != k:
            A[k], A[r] = A[r], A[k]
            U[k], U[r] = U[r], U[k]
        if c != k:
            for row in A:
                row[k], row[c] = row[c], row[k]
            for row in V:
                row[k], row[c] = row[c], row[k]
        unit = A[k][k] // p ** v
        inv = pow(unit, -1, mod)
        A[k] = [x * inv % mod for x in A[k]]
        U[k] = [x * inv % mod for x in U[k]]
        piv = p ** v
        for r2 in range(nr):
            if r2 == k or A[r2][k] == 0:
                continue
            mult = A[r2][k] // piv
            A[r2] = [(x - mult * y) % mod for x, y in zip(A[r2], A[k])]
            U[r2] = [(x - mult * y) % mod for x, y in zip(U[r2], U[k])]
        for c2 in range(nc):
            if c2 == k or A[k][c2] == 0:
                continue
            mult = A[k][c2] // piv
            for row in A:
                row[c2] = (row[c2] - mult * row[k]) % mod
            for row in V:
                row[c2] = (row[c2] - mult * row[k]) % mod
        diag.append(v)
        k += 1
    return diag, U, V, k


def solve_affine(sys: LinSystem):
    """Solve matrix * x = rhs over Z/p^m.

    Returns a Solution (particular + kernel generators) or None when the
    system is inconsistent.  Inconsistency is a value, not an error.
    """
    ring = sys.ring
    p, m, mod = ring.p, ring.m, ring.modulus
    nr = len(sys.matrix)
    nc = len(sys.matrix[0]) if nr else 0
    if nc == 0:
        if any(b % mod for b in sys.rhs):
            return None
        return Solution((), (), ring)
    diag, U, V, rank = _local_smith([list(r) for r in sys.matrix], ring)
    ub = [sum(U[i][j] * sys.rhs[j] for j in range(nr)) % mod for i in range(nr)]
    y = [0] * nc
    for i in range(rank):
        piv = p ** diag[i]
        if ub[i] % piv:
            return None
        y[i] = ub[i] // piv
    for i in range(rank, nr):
        if ub[i] % mod:
            return None
    particular = tuple(
        sum(V[i][j] * y[j] for j in range(nc)) % mod for i in range(nc)
    )
    kernel = []
    for i in range(rank):
        if diag[i] > 0:
            scale = p ** (m - diag[i])
            kernel.append(tuple(V[r][i] * scale % mod for r in range(nc)))
    for j in range(rank, nc):
        kernel.append(tuple(V[r][j] % mod for r in range(nc)))
    return Solution(particular, tuple(kernel), ring)


def fp_rank(matrix, p: int) -> int:
    """Row rank over the field with p elements."""
    A = np.array(matrix, dtype=np.int64) % p
    if A.size == 0:
        return 0
    if A.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    nr, nc = A.shape
    rank = 0
    row = 0
    for col in range(nc):
        piv = None
        for r in range(row, nr):
            if A[r, col] % p:
                piv = r
                break
        if piv is None:
            continue
        if piv != row:
            A[[row, piv]] = A[[piv, row]]
        inv = pow(int(A[row, col]), -1, p)
        A[row] = A[row] * inv % p
        for r in range(nr):
            if r != row and A[r, col]:
                A[r] = (A[r] - A[r, col] * A[row]) % p
        row += 1
        rank += 1
        if row == nr:
            break
    return rank
