"""Indexing helpers for the finite vector spaces F_p^n.

Points are flattened to integers in C order (x1 most significant), so a
function on F_p^n is a length-p^n array.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch


class FpSpace:
    """F_p^n with cached point lists and addition tables."""

    def __init__(self, p: int, n: int):
        self.p = p
        self.n = n
        self.size = p**n
        grids = np.indices((p,) * n).reshape(n, -1).T if n else np.zeros((1, 0), dtype=np.int64)
        self.points = np.ascontiguousarray(grids, dtype=np.int64)
        self.points.setflags(write=False)
        self._weights = p ** np.arange(n - 1, -1, -1, dtype=np.int64)

    def index(self, pts) -> np.ndarray | int:
        """Flatten point coordinates (last axis of length n) to indices."""
        arr = np.asarray(pts, dtype=np.int64) % self.p
        if arr.shape[-1:] != (self.n,):
            raise DimensionMismatch(f"points must have {self.n} coordinates, got shape {arr.shape}")
        out = arr @ self._weights
        return int(out) if out.ndim == 0 else out

    def point(self, idx: int) -> tuple[int, ...]:
        return tuple(int(c) for c in self.points[idx])

    @property
    def add_table(self) -> np.ndarray:
        return _add_table(self.p, self.n)

    def scaled(self, c: int) -> np.ndarray:
        """Index map x -> c*x."""
        return self.index(self.points * c)

    def linear_images(self, coeffs, ell: int | None = None) -> np.ndarray:
        """Indices of L(X) = sum_j coeffs[j] * x_j for all X in (F^n)^ell, X enumerated in C order."""
        coeffs = [int(c) for c in coeffs]
        ell = len(coeffs) if ell is None else ell
        N = self.size
        total = np.zeros((N,) * ell + (self.n,), dtype=np.int64)
        for j, c in enumerate(coeffs):
            if c % self.p == 0:
                continue
            shape = [1] * ell + [self.n]
            shape[j] = N
            total = total + c * self.points.reshape(shape)
        return self.index(total % self.p).reshape(-1)


@lru_cache(maxsize=64)
def fp_space(p: int, n: int) -> FpSpace:
    return FpSpace(p, n)


@lru_cache(maxsize=32)
def _add_table(p: int, n: int) -> np.ndarray:
    sp = fp_space(p, n)
    table = sp.index((sp.points[:, None, :] + sp.points[None, :, :]) % p)
    table.setflags(write=False)
    return table
