"""Hot numeric kernels: numba-jitted loops with a pure-numpy fallback.

The jitted path is the default.  Set PPG_NUMBA=0 to select the vectorised
numpy fallback (benchmarks/bench_kernels.py compares the two).  Both paths do
exact int64 arithmetic; callers must keep the modulus small enough that
N * (mod-1)^2 fits in an int64 (see int64_safe).

Kernels:

- relator_table(As, Bs, q, mod): for stacked unipotent matrices, a boolean
  table of which pairs satisfy A B A^-1 B^-q = I.  Backs the brute-force
  enumeration oracle and the exhaustive solver fallback.
- count_pk_roots(modulus, p, kmax): counts solutions of x^(p^k) = 1 in Z/modulus
  for k = 0..kmax.  Backs the abelianization structure check.
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("PPG_NUMBA", "1") != "0"

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


def int64_safe(mod: int, size: int) -> bool:
    """True when size x size products of residues mod `mod` cannot overflow."""
    return size * (mod - 1) ** 2 < 2**63


# ---------------------------------------------------------------------------
# jitted path
# ---------------------------------------------------------------------------

if USE_NUMBA:

    @njit(cache=True)
    def _mm(a, b, mod):
        n = a.shape[0]
        out = np.empty((n, n), dtype=np.int64)
        for i in range(n):
            for j in range(n):
                s = 0
                for k in range(n):
                    s += a[i, k] * b[k, j]
                out[i, j] = s % mod
        return out

    @njit(cache=True)
    def _inv_unipotent(a, mod):
        # Neumann series: (I + N)^-1 = I - N + N^2 - ... with N nilpotent.
        n = a.shape[0]
        nil = a.copy()
        for i in range(n):
            nil[i, i] = 0
        out = np.eye(n, dtype=np.int64)
        term = np.eye(n, dtype=np.int64)
        for _ in range(n - 1):
            term = _mm(term, nil, mod)
            for i in range(n):
                for j in range(n):
                    term[i, j] = (mod - term[i, j]) % mod
            out = (out + term) % mod
        return out % mod

    @njit(cache=True)
    def _pow(a, e, mod):
        n = a.shape[0]
        out = np.eye(n, dtype=np.int64)
        base = a.copy()
        k = e
        while k > 0:
            if k & 1:
                out = _mm(out, base, mod)
            base = _mm(base, base, mod)
            k >>= 1
        return out

    @njit(cache=True)
    def _relator_table_jit(As, Bs, q, mod):
        nA, nB, n = As.shape[0], Bs.shape[0], As.shape[1]
        out = np.zeros((nA, nB), dtype=np.bool_)
        Ainvs = np.empty_like(As)
        for ia in range(nA):
            Ainvs[ia] = _inv_unipotent(As[ia], mod)
        eye = np.eye(n, dtype=np.int64)
        for ib in range(nB):
            bqi = _inv_unipotent(_pow(Bs[ib], q, mod), mod)
            for ia in range(nA):
                w = _mm(_mm(_mm(As[ia], Bs[ib], mod), Ainvs[ia], mod), bqi, mod)
                ok = True
                for i in range(n):
                    for j in range(n):
                        if w[i, j] != eye[i, j]:
                            ok = False
                out[ia, ib] = ok
        return out

    @njit(cache=True)
    def _count_pk_roots_jit(modulus, p, kmax):
        counts = np.zeros(kmax + 1, dtype=np.int64)
        counts[0] = 1
        for x in range(1, modulus):
            y = x
            for k in range(1, kmax + 1):
                # y <- y^p mod modulus, square-and-multiply on the exponent p
                acc = 1
                base = y
                e = p
                while e > 0:
                    if e & 1:
                        acc = acc * base % modulus
                    base = base * base % modulus
                    e >>= 1
                y = acc
                if y == 1:
                    counts[k] += 1
        return counts


# ---------------------------------------------------------------------------
# pure-numpy fallback path
# ---------------------------------------------------------------------------


def _inv_unipotent_np(stack, mod):
    n = stack.shape[-1]
    eye = np.eye(n, dtype=np.int64)
    nil = (stack - eye) % mod
    out = np.broadcast_to(eye, stack.shape).copy()
    term = out.copy()
    for _ in range(n - 1):
        term = (-(term @ nil)) % mod
        out = (out + term) % mod
    return out


def _pow_np(stack, e, mod):
    n = stack.shape[-1]
    eye = np.eye(n, dtype=np.int64)
    out = np.broadcast_to(eye, stack.shape).copy()
    base = stack % mod
    k = e
    while k > 0:
        if k & 1:
            out = (out @ base) % mod
        base = (base @ base) % mod
        k >>= 1
    return out


def _relator_table_np(As, Bs, q, mod):
    n = As.shape[-1]
    Ainv = _inv_unipotent_np(As, mod)
    BqInv = _inv_unipotent_np(_pow_np(Bs, q, mod), mod)
    AB = (As[:, None] @ Bs[None, :]) % mod
    W = (AB @ Ainv[:, None]) % mod
    W = (W @ BqInv[None, :]) % mod
    eye = np.eye(n, dtype=np.int64)
    return (W == eye).all(axis=(2, 3))


def _count_pk_roots_np(modulus, p, kmax):
    counts = np.zeros(kmax + 1, dtype=np.int64)
    counts[0] = 1
    y = np.arange(1, modulus, dtype=np.int64)
    for k in range(1, kmax + 1):
        acc = np.ones_like(y)
        base = y
        e = p
        while e > 0:
            if e & 1:
                acc = acc * base % modulus
            base = base * base % modulus
            e >>= 1
        y = acc
        counts[k] = int((y == 1).sum())
    return counts


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def relator_table(As: np.ndarray, Bs: np.ndarray, q: int, mod: int) -> np.ndarray:
    """Boolean table T[i, j] = (As[i] Bs[j] As[i]^-1 Bs[j]^-q == I) mod `mod`.

    q must already be reduced to a nonnegative exponent.
    """
    As = np.ascontiguousarray(As, dtype=np.int64)
    Bs = np.ascontiguousarray(Bs, dtype=np.int64)
    if not int64_safe(mod, As.shape[-1]):
        raise ValueError("modulus too large for the int64 kernel path")
    if USE_NUMBA:
        return _relator_table_jit(As, Bs, q, mod)
    return _relator_table_np(As, Bs, q, mod)


def count_pk_roots(modulus: int, p: int, kmax: int) -> np.ndarray:
    """counts[k] = #(x in Z/modulus with x^(p^k) = 1), for k = 0..kmax."""
    if not int64_safe(modulus, 1):
        raise ValueError("modulus too large for the int64 kernel path")
    if USE_NUMBA:
        return _count_pk_roots_jit(modulus, p, kmax)
    return _count_pk_roots_np(modulus, p, kmax)
