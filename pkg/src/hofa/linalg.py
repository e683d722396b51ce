"""Gaussian elimination over F_p and over Z_{p^j} (unit pivots only)."""

from __future__ import annotations

import numpy as np


def _as_object(a) -> np.ndarray:
    return np.array(a, dtype=object, copy=True)


def row_reduce_mod_p(A, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of A over F_p and the pivot columns."""
    A = _as_object(A) % p
    if A.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    m, ncols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == m:
            break
        piv = next((i for i in range(r, m) if A[i, c] % p), None)
        if piv is None:
            continue
        if piv != r:
            A[[r, piv], :] = A[[piv, r], :]
        A[r, :] = (A[r, :] * pow(int(A[r, c]), -1, p)) % p
        for i in range(m):
            if i != r and A[i, c] % p:
                A[i, :] = (A[i, :] - A[i, c] * A[r, :]) % p
        pivots.append(c)
        r += 1
    return A, pivots


def rank_mod_p(A, p: int) -> int:
    A = np.asarray(A)
    if A.size == 0:
        return 0
    return len(row_reduce_mod_p(A, p)[1])


def kernel_mod_p(A, p: int) -> list[list[int]]:
    """Basis of the right kernel {v : A v = 0} over F_p."""
    A = np.asarray(A)
    ncols = A.shape[1]
    R, pivots = row_reduce_mod_p(A, p)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for r, c in enumerate(pivots):
            v[c] = int(-R[r, f]) % p
        basis.append(v)
    return basis


def in_span_mod_p(vectors, target, p: int) -> bool:
    """Whether target lies in the F_p-span of the given vectors."""
    vectors = [list(v) for v in vectors]
    if not vectors:
        return all(int(t) % p == 0 for t in target)
    base = rank_mod_p(vectors, p)
    return rank_mod_p(vectors + [list(target)], p) == base


def inverse_mod_prime_power(A, p: int, exponent: int) -> np.ndarray:
    """Inverse of a square matrix over Z_{p^exponent}; its determinant must be a unit."""
    q = p**exponent
    A = _as_object(A) % q
    n = A.shape[0]
    aug = np.concatenate([A, np.eye(n, dtype=object)], axis=1)
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i, c] % p), None)
        if piv is None:
            raise ValueError("matrix is not invertible modulo p")
        if piv != c:
            aug[[c, piv], :] = aug[[piv, c], :]
        aug[c, :] = (aug[c, :] * pow(int(aug[c, c]), -1, q)) % q
        for i in range(n):
            if i != c and aug[i, c] % q:
                aug[i, :] = (aug[i, :] - aug[i, c] * aug[c, :]) % q
    return aug[:, n:]
