"""Exact Smith normal form over the integers.

Matrices are numpy arrays of dtype ``object`` holding Python ints, so entries
never overflow. The reduction also tracks the inverses of the transforms,
which the homology code needs to change bases in both directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def int_matrix(data, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce nested lists (or an array) to an object array of Python ints."""
    a = np.array(data, dtype=object)
    if a.size == 0:
        r = rows if rows is not None else (a.shape[0] if a.ndim >= 1 else 0)
        c = cols if cols is not None else (a.shape[1] if a.ndim == 2 else 0)
        return np.zeros((r, c), dtype=object)
    if a.ndim != 2:
        raise ValueError("expected a 2D matrix")
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        iv = int(v)
        if iv != v:
            raise ValueError(f"non-integer entry {v!r}")
        out[idx] = iv
    return out


def identity(n: int) -> np.ndarray:
    out = np.zeros((n, n), dtype=object)
    for i in range(n):
        out[i, i] = 1
    return out


@dataclass
class SNF:
    """``U @ A @ V == D`` with ``U``, ``V`` unimodular.

    ``U_inv`` and ``V_inv`` are the exact inverses; ``diagonal`` lists the
    nonzero invariant factors, each dividing the next.
    """

    U: np.ndarray
    D: np.ndarray
    V: np.ndarray
    U_inv: np.ndarray
    V_inv: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.diagonal)

    @property
    def diagonal(self) -> list[int]:
        out = []
        for i in range(min(self.D.shape)):
            if self.D[i, i] == 0:
                break
            out.append(int(self.D[i, i]))
        return out


class _Reducer:
    def __init__(self, a: np.ndarray):
        m, n = a.shape
        self.A = a.copy()
        self.U, self.Ui = identity(m), identity(m)
        self.V, self.Vi = identity(n), identity(n)

    # row ops act on A and U from the left; U_inv gets the inverse column op
    def swap_rows(self, i, j):
        if i == j:
            return
        for M in (self.A, self.U):
            M[[i, j], :] = M[[j, i], :]
        self.Ui[:, [i, j]] = self.Ui[:, [j, i]]

    def add_row(self, src, dst, q):
        """row_dst += q * row_src"""
        self.A[dst, :] = self.A[dst, :] + q * self.A[src, :]
        self.U[dst, :] = self.U[dst, :] + q * self.U[src, :]
        self.Ui[:, src] = self.Ui[:, src] - q * self.Ui[:, dst]

    def negate_row(self, i):
        self.A[i, :] = -self.A[i, :]
        self.U[i, :] = -self.U[i, :]
        self.Ui[:, i] = -self.Ui[:, i]

    def swap_cols(self, i, j):
        if i == j:
            return
        for M in (self.A, self.V):
            M[:, [i, j]] = M[:, [j, i]]
        self.Vi[[i, j], :] = self.Vi[[j, i], :]

    def add_col(self, src, dst, q):
        """col_dst += q * col_src"""
        self.A[:, dst] = self.A[:, dst] + q * self.A[:, src]
        self.V[:, dst] = self.V[:, dst] + q * self.V[:, src]
        self.Vi[src, :] = self.Vi[src, :] - q * self.Vi[dst, :]

    def _min_pivot(self, t):
        sub = self.A[t:, t:]
        best = None
        for (i, j), v in np.ndenumerate(sub):
            if v != 0 and (best is None or abs(v) < best[0]):
                best = (abs(v), i + t, j + t)
                if best[0] == 1:
                    break
        return best

    def run(self) -> SNF:
        A = self.A
        m, n = A.shape
        for t in range(min(m, n)):
            piv = self._min_pivot(t)
            if piv is None:
                break
            _, i, j = piv
            self.swap_rows(t, i)
            self.swap_cols(t, j)
            while True:
                dirty = False
                for i in range(t + 1, m):
                    if A[i, t] != 0:
                        q = A[i, t] // A[t, t]
                        self.add_row(t, i, -q)
                        if A[i, t] != 0:
                            dirty = True
                for j in range(t + 1, n):
                    if A[t, j] != 0:
                        q = A[t, j] // A[t, t]
                        self.add_col(t, j, -q)
                        if A[t, j] != 0:
                            dirty = True
                if dirty:
                    # a smaller remainder appeared in row or column t: move it to the pivot
                    best = (abs(A[t, t]), t, t)
                    for i in range(t + 1, m):
                        if A[i, t] != 0 and abs(A[i, t]) < best[0]:
                            best = (abs(A[i, t]), i, t)
                    for j in range(t + 1, n):
                        if A[t, j] != 0 and abs(A[t, j]) < best[0]:
                            best = (abs(A[t, j]), t, j)
                    self.swap_rows(t, best[1])
                    self.swap_cols(t, best[2])
                    continue
                # divisibility: fold an offending row into row t and go again
                p = A[t, t]
                bad = None
                for (i, j), v in np.ndenumerate(A[t + 1:, t + 1:]):
                    if v % p != 0:
                        bad = i + t + 1
                        break
                if bad is None:
                    break
                self.add_row(bad, t, 1)
            if A[t, t] < 0:
                self.negate_row(t)
        return SNF(self.U, self.A, self.V, self.Ui, self.Vi)


def snf(a) -> SNF:
    """Full Smith decomposition with inverse transforms."""
    return _Reducer(int_matrix(a)).run()


def smith_normal_form(a):
    """Return ``(U, D, V)`` with ``U A V = D``."""
    r = snf(a)
    return r.U, r.D, r.V


def invariant_factors(a) -> list[int]:
    return snf(a).diagonal


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact product of object matrices, safe for empty shapes."""
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    if a.shape[1] == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=object)
    return a.dot(b)
