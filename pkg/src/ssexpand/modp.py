"""Row reduction, rank, span membership and nullspaces over Z_p (p prime)."""
from __future__ import annotations

import numpy as np


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def require_prime(p: int, what: str = "this operation") -> None:
    if not is_prime(p):
        raise ValueError(f"{what} needs a prime local dimension, got d={p}")


def rref(mat: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod p. Returns (nonzero rows, pivot columns)."""
    a = np.array(mat, dtype=np.int64) % p
    if a.ndim != 2:
        raise ValueError("rref expects a 2-d array")
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r] = (a[r] * inv) % p
        others = np.flatnonzero(a[:, c])
        others = others[others != r]
        if others.size:
            a[others] = (a[others] - np.outer(a[others, c], a[r])) % p
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank(mat: np.ndarray, p: int) -> int:
    if np.size(mat) == 0:
        return 0
    return len(rref(mat, p)[1])


def nullspace(mat: np.ndarray, p: int) -> np.ndarray:
    """Basis (as rows) of ``{v : mat @ v = 0 mod p}``."""
    mat = np.atleast_2d(np.array(mat, dtype=np.int64))
    cols = mat.shape[1]
    if mat.shape[0] == 0:
        return np.eye(cols, dtype=np.int64)
    red, pivots = rref(mat, p)
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, pc in enumerate(pivots):
            basis[i, pc] = (-red[r, f]) % p
    return basis


class SpanTester:
    """Vectorised membership test for the row span of a matrix mod p.

    ``v`` lies in the row span iff ``v @ K.T == 0`` where the rows of ``K``
    span the nullspace of the matrix.
    """

    def __init__(self, mat: np.ndarray, p: int):
        mat = np.atleast_2d(np.array(mat, dtype=np.int64)) % p
        self.p = p
        self.dim = mat.shape[1]
        self.rank = rank(mat, p) if mat.shape[0] else 0
        self.kernel = nullspace(mat, p).T if mat.shape[0] else np.eye(self.dim, dtype=np.int64)

    def signature(self, vecs: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(vecs) @ self.kernel) % self.p

    def contains(self, vecs: np.ndarray) -> np.ndarray:
        vecs = np.atleast_2d(np.asarray(vecs, dtype=np.int64))
        return ~np.any(self.signature(vecs), axis=1)
