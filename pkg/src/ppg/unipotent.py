"""The groups U_{n+1}(Z/p^m): upper unitriangular matrices over Z/p^m.

Matrices are stored as read-only (n+1)x(n+1) numpy arrays with ones on the
diagonal.  When the modulus is small enough for exact int64 products the
arrays are int64; otherwise they fall back to Python-integer (object) arrays,
so arithmetic stays exact for any modulus the ring accepts.

phi_m is the mod-p superdiagonal map onto F_p^n.  Its kernel is the Frattini
subgroup, so a set of matrices generates the whole group exactly when the
phi_m images span F_p^n (Burnside basis argument).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._kernels import int64_safe
from .rings import PrimePower, fp_rank

__all__ = [
    "UniShape",
    "UniMatrix",
    "QuotientUniMatrix",
    "compose",
    "invert",
    "power",
    "commutator",
    "phi_m",
    "is_generating",
    "project_quotient",
    "exponent_bound",
    "enumerate_group",
]

MAX_N = 32


@dataclass(frozen=True)
class UniShape:
    """Size parameter n and coefficient ring: matrices are (n+1)x(n+1)."""

    n: int
    ring: PrimePower

    def __post_init__(self):
        if not 1 <= self.n <= MAX_N:
            raise ValueError(f"n must be in [1, {MAX_N}]")

    @property
    def size(self) -> int:
        return self.n + 1

    @property
    def dtype(self):
        return np.int64 if int64_safe(self.ring.modulus, self.size) else object

    def __repr__(self):
        return f"U_{self.size}({self.ring!r})"


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class UniMatrix:
    """An element of U_{n+1}(Z/p^m); immutable."""

    __slots__ = ("shape", "array", "_key")

    def __init__(self, shape: UniShape, array: np.ndarray):
        size, mod = shape.size, shape.ring.modulus
        arr = np.array(array, dtype=shape.dtype) % mod
        if arr.shape != (size, size):
            raise ValueError("array size does not match shape")
        for i in range(size):
            if arr[i, i] != 1:
                raise ValueError("diagonal must be 1")
            for j in range(i):
                if arr[i, j] != 0:
                    raise ValueError("below-diagonal entries must be 0")
        self.shape = shape
        self.array = _freeze(arr)
        self._key = (shape, arr.tobytes() if arr.dtype == np.int64 else tuple(arr.ravel()))

    @classmethod
    def identity(cls, shape: UniShape) -> "UniMatrix":
        return cls(shape, np.eye(shape.size, dtype=np.int64))

    @classmethod
    def from_entries(cls, shape: UniShape, entries: dict) -> "UniMatrix":
        """Build I plus the given strictly-upper entries, keys 1-based (i, j)."""
        arr = np.eye(shape.size, dtype=object)
        for (i, j), v in entries.items():
            if not 1 <= i < j <= shape.size:
                raise ValueError(f"({i}, {j}) is not strictly upper")
            arr[i - 1, j - 1] = int(v)
        return cls(shape, arr)

    @classmethod
    def elementary(cls, shape: UniShape, i: int, j: int, v: int = 1) -> "UniMatrix":
        """I + v * E_{i,j}, indices 1-based."""
        return cls.from_entries(shape, {(i, j): v})

    @classmethod
    def from_strict_upper(cls, shape: UniShape, flat) -> "UniMatrix":
        """Row-major strictly-upper entries, the JSON wire format."""
        size = shape.size
        expected = size * (size - 1) // 2
        flat = list(flat)
        if len(flat) != expected:
            raise ValueError(f"expected {expected} entries, got {len(flat)}")
        entries = {}
        pos = 0
        for i in range(1, size + 1):
            for j in range(i + 1, size + 1):
                entries[(i, j)] = int(flat[pos])
                pos += 1
        return cls.from_entries(shape, entries)

    def strict_upper(self) -> list:
        """Row-major strictly-upper entries as plain ints."""
        size = self.shape.size
        return [
            int(self.array[i, j]) for i in range(size) for j in range(i + 1, size)
        ]

    def entry(self, i: int, j: int) -> int:
        """Entry at 1-based position (i, j)."""
        return int(self.array[i - 1, j - 1])

    def __eq__(self, other):
        return isinstance(other, UniMatrix) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __mul__(self, other):
        return compose(self, other)

    def __repr__(self):
        return f"UniMatrix({self.shape!r}, {self.array.tolist()})"


def _check_same_shape(a: UniMatrix, b: UniMatrix):
    if a.shape != b.shape:
        raise ValueError("shape mismatch")


def compose(a: UniMatrix, b: UniMatrix) -> UniMatrix:
    """Matrix product in U_{n+1}(Z/p^m)."""
    _check_same_shape(a, b)
    return UniMatrix(a.shape, (a.array @ b.array) % a.shape.ring.modulus)


def invert(a: UniMatrix) -> UniMatrix:
    """Inverse via the Neumann series of the nilpotent part."""
    shape = a.shape
    mod = shape.ring.modulus
    size = shape.size
    eye = np.eye(size, dtype=a.array.dtype)
    nil = (a.array - eye) % mod
    out = eye.copy()
    term = eye.copy()
    for _ in range(size - 1):
        term = (-(term @ nil)) % mod
        out = (out + term) % mod
    return UniMatrix(shape, out)


def exponent_bound(shape: UniShape) -> int:
    """p^(m + ceil(log_p n)): the group exponent divides this."""
    p, m, n = shape.ring.p, shape.ring.m, shape.n
    extra = 0
    while p**extra < n:
        extra += 1
    return p ** (m + extra)


def power(a: UniMatrix, e: int) -> UniMatrix:
    """a^e by binary exponentiation; e may be negative or very large.

    Exponents are reduced modulo the group exponent bound, which leaves the
    result unchanged.
    """
    bound = exponent_bound(a.shape)
    e %= bound
    result = UniMatrix.identity(a.shape)
    base = a
    while e > 0:
        if e & 1:
            result = compose(result, base)
        base = compose(base, base)
        e >>= 1
    return result


def commutator(a: UniMatrix, b: UniMatrix) -> UniMatrix:
    """a b a^-1 b^-1."""
    _check_same_shape(a, b)
    return compose(compose(a, b), compose(invert(a), invert(b)))


def phi_m(a: UniMatrix) -> tuple:
    """The superdiagonal (M_{1,2}, ..., M_{n,n+1}) reduced mod p."""
    p = a.shape.ring.p
    return tuple(int(a.array[i, i + 1]) % p for i in range(a.shape.n))


def is_generating(gens) -> bool:
    """True iff the phi_m images span F_p^n (iff the set generates the group)."""
    gens = list(gens)
    if not gens:
        return False
    shape = gens[0].shape
    for g in gens:
        if g.shape != shape:
            raise ValueError("shape mismatch")
    rows = [phi_m(g) for g in gens]
    return fp_rank(rows, shape.ring.p) == shape.n


class QuotientUniMatrix:
    """An element of U_{n+1}(F_p) / Z_{n+1}: the (1, n+1) entry is dropped.

    Only provided over F_p, which covers every use of the quotient here.
    """

    __slots__ = ("shape", "array", "_key")

    def __init__(self, shape: UniShape, array: np.ndarray):
        if shape.ring.m != 1:
            raise ValueError("quotient matrices are only defined over F_p")
        arr = np.array(array, dtype=np.int64) % shape.ring.p
        arr[0, shape.size - 1] = 0
        rep = UniMatrix(shape, arr)  # validates triangular form
        self.shape = shape
        self.array = rep.array
        self._key = (shape, self.array.tobytes())

    def __eq__(self, other):
        return isinstance(other, QuotientUniMatrix) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __mul__(self, other):
        if not isinstance(other, QuotientUniMatrix) or other.shape != self.shape:
            raise ValueError("shape mismatch")
        return QuotientUniMatrix(self.shape, (self.array @ other.array) % self.shape.ring.p)

    def __repr__(self):
        return f"QuotientUniMatrix({self.shape!r}, {self.array.tolist()})"


def project_quotient(a: UniMatrix) -> QuotientUniMatrix:
    """The canonical surjection U_{n+1}(F_p) -> U_{n+1}(F_p)/Z_{n+1}."""
    if a.shape.ring.m != 1:
        raise ValueError("project_quotient requires the ring F_p")
    return QuotientUniMatrix(a.shape, a.array)


def enumerate_group(shape: UniShape, limit: int = 2_000_000):
    """All elements of U_{n+1}(Z/p^m), for desk-scale shapes only."""
    mod = shape.ring.modulus
    size = shape.size
    positions = [(i, j) for i in range(size) for j in range(i + 1, size)]
    total = mod ** len(positions)
    if total > limit:
        raise ValueError(f"group of order {total} too large to enumerate")
    out = []
    for values in itertools.product(range(mod), repeat=len(positions)):
        arr = np.eye(size, dtype=np.int64)
        for (i, j), v in zip(positions, values):
            arr[i, j] = v
        out.append(UniMatrix(shape, arr))
    return out
