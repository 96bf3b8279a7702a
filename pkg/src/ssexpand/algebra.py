"""Block structure of a pair of commuting matrix algebras on one qudit.

Given generators of two mutually commuting *-algebras A (left) and B (right)
on C^D, find orthogonal blocks C^D = (+)_b K_b (x) W_b on which B acts as
I (x) M(W_b) and A acts inside M(K_b) (x) I. Blocks are the ranges of the
minimal central projections of B; inside a block the full-matrix-algebra
structure of B is recovered from a minimal projection and matrix units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TAU_NUM = 1e-8
MAX_RESAMPLES = 5


class DecompositionError(RuntimeError):
    pass


@dataclass(frozen=True)
class Block:
    isometry: np.ndarray  # (D, d_left * d_right); column a*d_right + j <-> |a>_left |j>_right
    d_left: int
    d_right: int

    @property
    def dim(self) -> int:
        return self.d_left * self.d_right


@dataclass(frozen=True)
class QuditDecomposition:
    qudit: int
    blocks: tuple[Block, ...]

    @property
    def dim(self) -> int:
        return sum(b.dim for b in self.blocks)


def _orth_add(basis: list[np.ndarray], vec: np.ndarray, tol: float) -> bool:
    v = vec.astype(complex)
    for _ in range(2):
        for b in basis:
            v = v - np.vdot(b, v) * b
    nv = np.linalg.norm(v)
    if nv > tol:
        basis.append(v / nv)
        return True
    return False


def span_basis(mats, dim: int, tol: float = TAU_NUM) -> list[np.ndarray]:
    """Orthonormal (Frobenius) basis of the linear span of ``mats``."""
    basis: list[np.ndarray] = []
    for M in mats:
        M = np.asarray(M, dtype=complex)
        nm = np.linalg.norm(M)
        if nm > tol:
            _orth_add(basis, (M / nm).reshape(-1), tol)
    return [b.reshape(dim, dim) for b in basis]


def algebra_basis(gens, dim: int, tol: float = TAU_NUM) -> list[np.ndarray]:
    """Basis of the unital *-algebra generated by ``gens``."""
    seeds = [np.eye(dim, dtype=complex)]
    for g in gens:
        g = np.asarray(g, dtype=complex)
        seeds += [g, g.conj().T]
    vecs = [b.reshape(-1) for b in span_basis(seeds, dim, tol)]
    frontier = list(range(len(vecs)))
    while frontier:
        new = []
        mats = [v.reshape(dim, dim) for v in vecs]
        for i in frontier:
            for j in range(len(mats)):
                for P in (mats[i] @ mats[j], mats[j] @ mats[i]):
                    nP = np.linalg.norm(P)
                    if nP > tol and _orth_add(vecs, (P / nP).reshape(-1), tol):
                        new.append(len(vecs) - 1)
            if len(vecs) >= dim * dim:
                break
        frontier = new if len(vecs) < dim * dim else []
    return [v.reshape(dim, dim) for v in vecs]


def center_basis(basis: list[np.ndarray], tol: float = TAU_NUM, gens: list[np.ndarray] | None = None) -> list[np.ndarray]:
    """Elements of span(basis) commuting with every element of ``gens`` (default: the basis).

    ``gens`` must generate the algebra; commuting with generators then equals
    commuting with the whole algebra, and the linear system stays
    (len(gens)·dim²) × len(basis) instead of quadratic in the basis size.
    """
    r = len(basis)
    if r == 0:
        return []
    gens = basis if gens is None else [np.asarray(g, dtype=complex) for g in gens]
    if not gens:  # the algebra is generated by the identity alone
        return list(basis)
    cols = []
    for bj in basis:
        cols.append(np.concatenate([(bj @ g - g @ bj).reshape(-1) for g in gens]))
    A = np.stack(cols, axis=1)
    _, s, vh = np.linalg.svd(A, full_matrices=True) if A.shape[0] < r else np.linalg.svd(A, full_matrices=False)
    scale = max(1.0, float(s[0])) if len(s) else 1.0
    null = [vh[i].conj() for i in range(r) if i >= len(s) or s[i] <= tol * scale * 10]
    return [sum(c * b for c, b in zip(vec, basis)) for vec in null]


def _cluster(evals: np.ndarray, tol: float) -> list[list[int]] | None:
    """Group sorted eigenvalues; None when some gap is neither clearly zero nor clearly open."""
    split = math.sqrt(tol)
    groups = [[0]]
    for i in range(1, len(evals)):
        gap = evals[i] - evals[i - 1]
        if gap > split:
            groups.append([i])
        elif gap > 100 * tol:
            return None
        else:
            groups[-1].append(i)
    return groups


def _random_hermitian(elems: list[np.ndarray], rng: np.random.Generator) -> np.ndarray:
    h = np.zeros_like(elems[0])
    for z in elems:
        a, b = rng.standard_normal(2)
        h = h + a * (z + z.conj().T) + b * 1j * (z - z.conj().T)
    nh = np.linalg.norm(h)
    return h / nh if nh > 0 else h


def _check_commuting(left, right, tol: float) -> None:
    for i, a in enumerate(left):
        for j, b in enumerate(right):
            scale = max(1.0, np.linalg.norm(a) * np.linalg.norm(b))
            c = np.linalg.norm(a @ b - b @ a)
            if c > tol * scale * 100:
                raise DecompositionError(f"left generator {i} and right generator {j} do not commute (norm {c:.3e})")


def _factor_block(V: np.ndarray, basis: list[np.ndarray], rng: np.random.Generator, tol: float) -> Block:
    Db = V.shape[1]
    comp = span_basis([V.conj().T @ b @ V for b in basis], Db, tol)
    r = len(comp)
    d_right = math.isqrt(r)
    if d_right * d_right != r or Db % d_right:
        raise DecompositionError(f"compressed algebra of dimension {r} is not a full matrix algebra on a {Db}-dim block")
    d_left = Db // d_right
    if d_right == 1:
        return Block(V, d_left, 1)
    for _ in range(MAX_RESAMPLES):
        h = _random_hermitian(comp, rng)
        evals, evecs = np.linalg.eigh(h)
        groups = _cluster(evals, tol)
        if groups is None or len(groups) != d_right or any(len(g) != d_left for g in groups):
            continue
        E = [evecs[:, g] for g in groups]
        T = np.zeros((Db, d_left * d_right), dtype=complex)
        T[:, 0::d_right] = E[0]
        ok = True
        for j in range(1, d_right):
            cands = [E[j].conj().T @ b @ E[0] for b in comp]
            M = max(cands, key=np.linalg.norm)
            amp = math.sqrt(float(np.real(np.trace(M.conj().T @ M))) / d_left)
            if amp < math.sqrt(tol):
                ok = False
                break
            U = M / amp
            if np.linalg.norm(U.conj().T @ U - np.eye(d_left)) > math.sqrt(tol):
                ok = False
                break
            T[:, j::d_right] = E[j] @ U
        if ok:
            return Block(V @ T, d_left, d_right)
    raise DecompositionError("could not resolve the matrix-unit structure of a block (numerical rank ambiguity)")


def structure_decomposition(gens_left, gens_right, dim: int, tau: float = TAU_NUM,
                            rng: np.random.Generator | None = None, qudit: int = -1) -> QuditDecomposition:
    """Split C^dim into blocks K (x) W with gens_left on K and gens_right on W."""
    rng = np.random.default_rng(0) if rng is None else rng
    left = [np.asarray(g, dtype=complex) for g in gens_left]
    right = [np.asarray(g, dtype=complex) for g in gens_right]
    _check_commuting(left, right, tau)
    basis = algebra_basis(right, dim, tau)
    center = center_basis(basis, tau, gens=right + [g.conj().T for g in right])
    for _ in range(MAX_RESAMPLES):
        h = _random_hermitian(center, rng)
        evals, evecs = np.linalg.eigh(h)
        groups = _cluster(evals, tau)
        if groups is not None:
            break
    else:
        raise DecompositionError("ambiguous eigenvalue gaps in the centre after resampling")
    blocks = tuple(_factor_block(evecs[:, g], basis, rng, tau) for g in groups)
    dec = QuditDecomposition(qudit, blocks)
    res = reconstruction_residual(dec, left, right)
    if res > math.sqrt(tau):
        raise DecompositionError(f"decomposition fails reconstruction (residual {res:.3e})")
    return dec


def _factor_residual(X: np.ndarray, d1: int, d2: int, side: str) -> float:
    T = X.reshape(d1, d2, d1, d2)
    if side == "left":
        red = np.einsum("ajbj->ab", T) / d2
        approx = np.kron(red, np.eye(d2))
    else:
        red = np.einsum("ajak->jk", T) / d1
        approx = np.kron(np.eye(d1), red)
    return float(np.linalg.norm(X - approx))


def reconstruction_residual(dec: QuditDecomposition, left, right) -> float:
    """Worst violation of: completeness, block invariance, and the two tensor-factor forms."""
    D = dec.blocks[0].isometry.shape[0] if dec.blocks else 0
    res = 0.0
    total = np.zeros((D, D), dtype=complex)
    for b in dec.blocks:
        W = b.isometry
        total += W @ W.conj().T
        res = max(res, float(np.linalg.norm(W.conj().T @ W - np.eye(b.dim))))
        P = W @ W.conj().T
        for side, gens in (("left", left), ("right", right)):
            for g in gens:
                ng = max(np.linalg.norm(g), 1e-300)
                res = max(res, float(np.linalg.norm(g @ W - P @ g @ W)) / ng)
                res = max(res, _factor_residual(W.conj().T @ g @ W, b.d_left, b.d_right, side) / ng)
    res = max(res, float(np.linalg.norm(total - np.eye(D))))
    return res
