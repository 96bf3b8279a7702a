"""Commuting local Hamiltonians and the Theorem 1 isolate / split / prune loop.

Qudits are addressed by integer labels. The original qudits carry labels
0..n-1; every split of a qudit q through a block isometry W creates two new
labels (left factor, right factor), and q is retired. Each term stores its
support as an ordered label tuple matching the tensor order of its matrix.

The loop (``approximate_ground``) repeatedly picks a term v that still
intersects another term, moves every term sharing >= 2 qudits with v to
L_bad, splits each qudit of v with the Bravyi-Vyalyi decomposition so that v
keeps the left factor and the others keep the right factor, prunes identity
factors, and moves v to L_good. The transcript is a ``Witness`` that
``verify_witness`` replays.
"""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .algebra import (TAU_NUM, Block, DecompositionError, QuditDecomposition, reconstruction_residual,
                      span_basis, structure_decomposition)
from .pauli import QuditSystem

TAU_PROJ = 1e-9
TAU_COMM = 1e-9
PRUNE_TOL = 1e-7
DENSE_CAP = 2**12
WITNESS_SCHEMA = 1


class ClhError(ValueError):
    pass


class WitnessError(ValueError):
    pass


# ---------------------------------------------------------------------------
# instances

@dataclass(frozen=True)
class Term:
    support: tuple[int, ...]
    matrix: np.ndarray


@dataclass(frozen=True)
class CLHInstance:
    n: int
    d: int
    terms: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for i, t in enumerate(self.terms):
            supp = tuple(int(q) for q in t.support)
            if list(supp) != sorted(set(supp)):
                raise ClhError(f"term {i}: support must be sorted and duplicate-free, got {supp}")
            if supp and not (0 <= supp[0] and supp[-1] < self.n):
                raise ClhError(f"term {i}: support {supp} out of range for n={self.n}")
            D = self.d ** len(supp)
            if np.shape(t.matrix) != (D, D):
                raise ClhError(f"term {i}: matrix shape {np.shape(t.matrix)} does not match support dimension {D}")

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.d,) * self.n

    @property
    def system(self) -> QuditSystem:
        return QuditSystem(self.n, self.d)

    @property
    def k(self) -> int:
        return max((len(t.support) for t in self.terms), default=0)


def _prod(xs) -> int:
    out = 1
    for x in xs:
        out *= int(x)
    return out


def embed(op: np.ndarray, support: Sequence[int], target: Sequence[int], dims) -> np.ndarray:
    """Operator on ``support`` (tensor order) lifted to ``target`` order; target must contain support."""
    support, target = list(support), list(target)
    rest = [t for t in target if t not in support]
    if len(rest) + len(support) != len(target):
        raise ClhError(f"support {support} not contained in target {target}")
    full = np.kron(np.asarray(op, dtype=complex), np.eye(_prod(dims[t] for t in rest), dtype=complex))
    order = support + rest
    if order == target or not target:
        return full
    shape = [dims[t] for t in order]
    T = full.reshape(shape + shape)
    idx = [order.index(t) for t in target]
    T = T.transpose(idx + [len(order) + i for i in idx])
    D = _prod(shape)
    return T.reshape(D, D)


def _q_first(op: np.ndarray, support: Sequence[int], q: int, dims) -> np.ndarray:
    """Reshape to (dq, R, dq, R) with qudit q moved to the front."""
    support = list(support)
    i = support.index(q)
    shape = [dims[t] for t in support]
    s = len(support)
    T = np.asarray(op).reshape(shape + shape)
    perm = [i] + [j for j in range(s) if j != i]
    T = T.transpose(perm + [s + j for j in perm])
    dq = dims[q]
    R = _prod(shape) // dq
    return T.reshape(dq, R, dq, R)


def factor_identity(op: np.ndarray, support: Sequence[int], q: int, dims) -> tuple[np.ndarray, tuple[int, ...], float]:
    """Write op = I_q (x) X; return (X on support minus q, that support, Frobenius residual)."""
    T = _q_first(op, support, q, dims)
    dq, R = T.shape[0], T.shape[1]
    X = np.einsum("aiaj->ij", T) / dq
    resid = float(np.linalg.norm(T.reshape(dq * R, dq * R) - np.kron(np.eye(dq), X)))
    return X, tuple(t for t in support if t != q), resid


def nontrivial_support(term: Term, dims, tol: float = PRUNE_TOL) -> tuple[int, ...]:
    """Qudits of the support on which the term is not an identity factor."""
    out = []
    for q in term.support:
        if dims[q] == 1:
            continue
        _, _, r = factor_identity(term.matrix, term.support, q, dims)
        if r > tol * max(1.0, float(np.linalg.norm(term.matrix))):
            out.append(q)
    return tuple(out)


@dataclass(frozen=True)
class ClhReport:
    ok: bool
    hermitian_failures: tuple[int, ...]
    projector_failures: tuple[tuple[int, float], ...]
    commutator_failures: tuple[tuple[int, int, float], ...]
    locality: int

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "hermitian_failures": list(self.hermitian_failures),
            "projector_failures": [list(x) for x in self.projector_failures],
            "commutator_failures": [list(x) for x in self.commutator_failures],
            "locality": self.locality,
        }


def validate_clh(instance: CLHInstance, tau_proj: float = TAU_PROJ, tau_comm: float = TAU_COMM) -> ClhReport:
    herm, proj, comm = [], [], []
    dims = instance.dims
    for i, t in enumerate(instance.terms):
        M = np.asarray(t.matrix, dtype=complex)
        if np.linalg.norm(M - M.conj().T, 2) > tau_proj:
            herm.append(i)
        e = float(np.linalg.norm(M @ M - M, 2))
        if e > tau_proj:
            proj.append((i, e))
    for i, a in enumerate(instance.terms):
        for j in range(i + 1, len(instance.terms)):
            b = instance.terms[j]
            if not set(a.support) & set(b.support):
                continue
            union = sorted(set(a.support) | set(b.support))
            A = embed(a.matrix, a.support, union, dims)
            B = embed(b.matrix, b.support, union, dims)
            c = float(np.linalg.norm(A @ B - B @ A, 2))
            if c > tau_comm:
                comm.append((i, j, c))
    ok = not (herm or proj or comm)
    return ClhReport(ok, tuple(herm), tuple(proj), tuple(comm), instance.k)


def induced_algebra(term: Term, q: int, dims, tol: float = TAU_NUM) -> list[np.ndarray]:
    """Span basis of the partial matrix elements <e|H|f> on qudit q, closed under adjoint."""
    if q not in term.support:
        raise ClhError(f"qudit {q} is not in the term support {term.support}")
    T = _q_first(term.matrix, term.support, q, dims)
    R = T.shape[1]
    mats = []
    for e in range(R):
        for f in range(R):
            M = T[:, e, :, f]
            mats.append(M)
            mats.append(M.conj().T)
    return span_basis(mats, dims[q], tol)


# ---------------------------------------------------------------------------
# loop state and witness records

@dataclass
class LoopState:
    dims: dict[int, int]
    remaining: dict[int, Term]
    good: list[tuple[int, Term]] = field(default_factory=list)
    bad: list[int] = field(default_factory=list)
    constant: float = 0.0
    splits: list[tuple[int, int, int, np.ndarray]] = field(default_factory=list)  # parent, left, right, W
    next_label: int = 0

    def copy(self) -> "LoopState":
        return LoopState(dict(self.dims), dict(self.remaining), list(self.good), list(self.bad), self.constant,
                         list(self.splits), self.next_label)

    def intersecting(self) -> list[int]:
        """Remaining terms that share a qudit with another remaining term."""
        owner: dict[int, list[int]] = {}
        for i, t in self.remaining.items():
            for q in t.support:
                owner.setdefault(q, []).append(i)
        hit = set()
        for ids in owner.values():
            if len(ids) > 1:
                hit.update(ids)
        return sorted(hit)

    def isolation_set(self, v: int) -> list[int]:
        mine = set(self.remaining[v].support)
        return sorted(u for u, t in self.remaining.items() if u != v and len(mine.intersection(t.support)) >= 2)

    def digest(self) -> str:
        h = hashlib.sha256()

        def put_term(tag, i, t):
            h.update(f"{tag}:{i}:{list(t.support)}:".encode())
            M = np.round(np.asarray(t.matrix, dtype=complex), 8) + 0.0
            h.update(np.ascontiguousarray(M.real + 0.0).tobytes())
            h.update(np.ascontiguousarray(M.imag + 0.0).tobytes())

        for i in sorted(self.remaining):
            put_term("rem", i, self.remaining[i])
        for i, t in self.good:
            put_term("good", i, t)
        h.update(f"bad:{self.bad}:const:{round(self.constant, 8) + 0.0}".encode())
        h.update(f"dims:{sorted(self.dims.items())}".encode())
        return h.hexdigest()


@dataclass(frozen=True)
class QuditStep:
    qudit: int
    left: int
    right: int
    decomposition: QuditDecomposition
    chosen: int
    reduction: int  # D - d_right
    residual: float  # worst reconstruction / factorisation residual observed


@dataclass(frozen=True)
class IterationRecord:
    v: int
    removed: tuple[int, ...]
    steps: tuple[QuditStep, ...]
    scalars: tuple[tuple[int, float], ...]
    digest: str
    max_commutator: float | None = None

    @property
    def reduction(self) -> int:
        return sum(s.reduction for s in self.steps)


@dataclass(frozen=True)
class Witness:
    iterations: tuple[IterationRecord, ...]
    good: tuple[tuple[int, tuple[int, ...]], ...]  # (term id, leaf support)
    bad: tuple[int, ...]
    eigen_index: int
    claimed_good_energy: float
    claimed_energy: float
    final_digest: str


def initial_state(instance: CLHInstance) -> LoopState:
    st = LoopState(dims={q: instance.d for q in range(instance.n)},
                   remaining={i: Term(tuple(t.support), np.asarray(t.matrix, dtype=complex))
                              for i, t in enumerate(instance.terms)},
                   next_label=instance.n)
    _prune(st, sorted(st.remaining))
    return st


def _prune_term(t: Term, dims) -> Term:
    op, supp = t.matrix, tuple(t.support)
    for q in list(supp):
        X, rest, r = factor_identity(op, supp, q, dims)
        if dims[q] == 1 or r <= PRUNE_TOL * max(1.0, float(np.linalg.norm(op))):
            op, supp = X, rest
    return Term(supp, op)


def _prune(st: LoopState, ids: Sequence[int]) -> list[tuple[int, float]]:
    """Drop identity factors; terms that become scalars leave as constants."""
    scalars = []
    for i in ids:
        if i not in st.remaining:
            continue
        t = _prune_term(st.remaining[i], st.dims)
        if not t.support:
            val = float(np.real(t.matrix.reshape(-1)[0])) if t.matrix.size else 0.0
            st.constant += val
            scalars.append((i, val))
            del st.remaining[i]
        else:
            st.remaining[i] = t
    return scalars


def _conjugate(t: Term, q: int, W: np.ndarray, left: int, right: int, dims) -> Term:
    """Replace qudit q by (left, right) via W^dagger (.) W on that factor."""
    T = _q_first(t.matrix, t.support, q, dims)
    D, R = T.shape[0], T.shape[1]
    X = T.reshape(D * R, D * R)
    Wf = np.kron(W, np.eye(R))
    Y = Wf.conj().T @ X @ Wf
    rest = tuple(s for s in t.support if s != q)
    return Term((left, right) + rest, Y)


def _component(st: LoopState, q: int) -> list[int]:
    ids = [i for i, t in st.remaining.items() if q in t.support]
    seen, labels = set(ids), set()
    stack = list(ids)
    while stack:
        i = stack.pop()
        for s in st.remaining[i].support:
            if s in labels:
                continue
            labels.add(s)
            for j, t in st.remaining.items():
                if j not in seen and s in t.support:
                    seen.add(j)
                    stack.append(j)
    return sorted(seen)


def block_energies(st: LoopState, q: int, dec: QuditDecomposition, cap: int = DENSE_CAP,
                   workers: int = 1) -> list[float]:
    """Ground energy of q's connected component of remaining terms, compressed to each block."""
    ids = _component(st, q)
    labels = sorted({s for i in ids for s in st.remaining[i].support})
    dim = _prod(st.dims[s] for s in labels)
    if dim > cap:
        raise ClhError(f"exhaustive block search needs a dense {dim}-dim component (cap {cap})")
    H = sum(embed(st.remaining[i].matrix, st.remaining[i].support, labels, st.dims) for i in ids)
    R = dim // st.dims[q]
    Hq = _q_first(H, labels, q, st.dims).reshape(st.dims[q] * R, st.dims[q] * R)

    def energy(block: Block) -> float:
        Wk = np.kron(block.isometry, np.eye(R))
        return float(np.linalg.eigvalsh(Wk.conj().T @ Hq @ Wk)[0])

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(energy, dec.blocks))
    return [energy(b) for b in dec.blocks]


Decomposer = Callable[[int, int, int, int, list, list], QuditDecomposition]
Chooser = Callable[[int, int, QuditDecomposition, LoopState], int]


def isolate_and_split(state: LoopState, v: int, decompose: Decomposer, choose: Chooser,
                      iteration: int = 0, tau: float = TAU_NUM, check_commutation: bool = False
                      ) -> tuple[LoopState, IterationRecord]:
    """One Theorem 1 iteration on a copy of ``state``; returns the new state and its record."""
    if v not in state.remaining:
        raise ClhError(f"term {v} is not in L_rem")
    st = state.copy()
    removed = st.isolation_set(v)
    for u in removed:
        del st.remaining[u]
    st.bad.extend(removed)
    steps = []
    for step_idx, q in enumerate(list(st.remaining[v].support)):
        vt = st.remaining[v]
        others = [u for u in sorted(st.remaining) if u != v and q in st.remaining[u].support]
        D = st.dims[q]
        gl = induced_algebra(vt, q, st.dims, tau)
        gr = [g for u in others for g in induced_algebra(st.remaining[u], q, st.dims, tau)]
        try:
            dec = decompose(iteration, step_idx, q, D, gl, gr)
        except DecompositionError as exc:
            raise ClhError(f"iteration {iteration}, term {v}, qudit {q}: {exc}") from exc
        resid = reconstruction_residual(dec, gl, gr) if gl or gr else 0.0
        beta = choose(iteration, step_idx, dec, st)
        if not 0 <= beta < len(dec.blocks):
            raise ClhError(f"block index {beta} out of range ({len(dec.blocks)} blocks) at qudit {q}")
        blk = dec.blocks[beta]
        left, right = st.next_label, st.next_label + 1
        st.next_label += 2
        st.dims[left], st.dims[right] = blk.d_left, blk.d_right
        st.splits.append((q, left, right, blk.isometry))
        for u in [v] + others:
            t = _conjugate(st.remaining[u], q, blk.isometry, left, right, st.dims)
            drop = right if u == v else left
            X, rest, r = factor_identity(t.matrix, t.support, drop, st.dims)
            resid = max(resid, r / max(1.0, float(np.linalg.norm(t.matrix))))
            st.remaining[u] = Term(rest, X)
        steps.append(QuditStep(q, left, right, dec, beta, D - blk.d_right, resid))
    scalars = _prune(st, sorted(st.remaining))
    if v in st.remaining:
        st.good.append((v, st.remaining.pop(v)))
    max_comm = _max_commutator(st) if check_commutation else None
    rec = IterationRecord(v, tuple(removed), tuple(steps), tuple(scalars), st.digest(), max_comm)
    return st, rec


def _max_commutator(st: LoopState) -> float:
    worst = 0.0
    items = sorted(st.remaining.items())
    for a in range(len(items)):
        for b in range(a + 1, len(items)):
            ta, tb = items[a][1], items[b][1]
            if not set(ta.support) & set(tb.support):
                continue
            union = sorted(set(ta.support) | set(tb.support))
            A = embed(ta.matrix, ta.support, union, st.dims)
            B = embed(tb.matrix, tb.support, union, st.dims)
            worst = max(worst, float(np.linalg.norm(A @ B - B @ A, 2)))
    return worst


def choose_term(st: LoopState) -> int | None:
    """Among intersecting terms: minimum isolation penalty, then lowest index."""
    cands = st.intersecting()
    if not cands:
        return None
    return min(cands, key=lambda v: (len(st.isolation_set(v)), v))


def _finish(st: LoopState) -> LoopState:
    st = st.copy()
    for i in sorted(st.remaining):
        st.good.append((i, st.remaining[i]))
    st.remaining = {}
    return st


# ---------------------------------------------------------------------------
# final state, energies

def leaves(st: LoopState) -> list[int]:
    retired = {p for p, _, _, _ in st.splits}
    return sorted(l for l in st.dims if l not in retired)


def good_ground(st: LoopState, eigen_index: int = 0) -> tuple[float, dict[int, tuple[tuple[int, ...], np.ndarray]]]:
    """Energy of the chosen eigenvectors of the L_good terms (plus constants) and the vectors."""
    total = st.constant
    vecs = {}
    used: set[int] = set()
    for i, t in st.good:
        if used & set(t.support):
            raise ClhError(f"L_good terms overlap on {sorted(used & set(t.support))}")
        used |= set(t.support)
        w, V = np.linalg.eigh(t.matrix)
        j = min(eigen_index, len(w) - 1)
        total += float(w[j])
        vecs[i] = (t.support, V[:, j])
    return total, vecs


def pull_back(st: LoopState, vecs: dict, n: int) -> np.ndarray:
    """Product state on the leaves mapped back to the original n qudits through every split."""
    labels: list[int] = []
    psi = np.ones((), dtype=complex)
    covered: set[int] = set()
    for i in sorted(vecs):
        supp, vec = vecs[i]
        psi = np.tensordot(psi, vec.reshape([st.dims[s] for s in supp]), axes=0)
        labels += list(supp)
        covered |= set(supp)
    for l in leaves(st):
        if l not in covered:
            e0 = np.zeros(st.dims[l], dtype=complex)
            e0[0] = 1.0
            psi = np.tensordot(psi, e0, axes=0)
            labels.append(l)
    for parent, left, right, W in reversed(st.splits):
        ia, ib = labels.index(left), labels.index(right)
        psi = np.moveaxis(psi, [ia, ib], [-2, -1])
        labels = [l for l in labels if l not in (left, right)]
        shape = psi.shape[:-2]
        psi = psi.reshape(shape + (W.shape[1],)) @ W.T
        labels.append(parent)
    order = [labels.index(q) for q in range(n)]
    return np.transpose(psi, order)


def term_energy(psi: np.ndarray, term: Term) -> float:
    s = len(term.support)
    if s == 0:
        return float(np.real(term.matrix.reshape(-1)[0]))
    x = np.moveaxis(psi, list(term.support), list(range(s)))
    x = x.reshape(term.matrix.shape[0], -1)
    return float(np.real(np.vdot(x, term.matrix @ x)))


def state_energy(instance: CLHInstance, psi: np.ndarray) -> float:
    return float(sum(term_energy(psi, t) for t in instance.terms))


def dense_hamiltonian(instance: CLHInstance, cap: int = DENSE_CAP) -> np.ndarray:
    dim = instance.d ** instance.n
    if dim > cap:
        raise ClhError(f"dense Hamiltonian of dimension {dim} exceeds cap {cap}")
    H = np.zeros((dim, dim), dtype=complex)
    for t in instance.terms:
        H += embed(t.matrix, t.support, list(range(instance.n)), instance.dims)
    return H


def dense_ground_energy(instance: CLHInstance, cap: int = DENSE_CAP) -> float:
    if not instance.terms:
        return 0.0
    return float(np.linalg.eigvalsh(dense_hamiltonian(instance, cap))[0])


# ---------------------------------------------------------------------------
# prover

@dataclass(frozen=True)
class ApproxResult:
    witness: Witness
    energy: float  # final state on ALL original terms
    good_energy: float
    eps: Fraction
    D_R: int
    k: int
    bad_bound: float  # 2 k d eps |L|
    assertions: dict
    state: np.ndarray
    records: tuple[IterationRecord, ...]

    @property
    def ok(self) -> bool:
        return all(self.assertions.values())


def _seeded_decomposer(seed: int, tau: float) -> Decomposer:
    def decompose(iteration, step, q, D, gl, gr):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(iteration, step)))
        return structure_decomposition(gl, gr, D, tau, rng, q)
    return decompose


def approximate_ground(instance: CLHInstance, strategy: str = "exhaustive-block-search",
                       prover_indices: Sequence[int] | None = None, seed: int = 0, eigen_index: int = 0,
                       tau: float = TAU_NUM, eps: Fraction | None = None, workers: int = 1,
                       check_commutation: bool = True) -> ApproxResult:
    """Run the Theorem 1 loop and produce a witness plus the pulled-back state's energy."""
    from .graphs import expansion_error, from_clh

    with threadpool_limits(1):
        st = initial_state(instance)
        decompose = _seeded_decomposer(seed, tau)
        if strategy == "exhaustive-block-search":
            def choose(it, step, dec, s):
                if len(dec.blocks) == 1:
                    return 0
                q = dec.qudit
                es = block_energies(s, q, dec, workers=workers)
                best = min(es)
                return next(i for i, e in enumerate(es) if e <= best + 1e-9)
        elif strategy == "prover-indices":
            supplied = list(prover_indices or [])
            cursor = iter(range(10**9))

            def choose(it, step, dec, s):
                i = next(cursor)
                if i >= len(supplied):
                    raise ClhError(f"prover supplied only {len(supplied)} block indices")
                return int(supplied[i])
        else:
            raise ClhError(f"unknown strategy {strategy!r}")
        records = []
        it = 0
        while True:
            v = choose_term(st)
            if v is None:
                break
            st, rec = isolate_and_split(st, v, decompose, choose, it, tau, check_commutation)
            records.append(rec)
            it += 1
        st = _finish(st)
        good_energy, vecs = good_ground(st, eigen_index)
        psi = pull_back(st, vecs, instance.n)
        energy = state_energy(instance, psi)
        G = from_clh(instance)
        if eps is None:
            eps = expansion_error(G, G.k).eps if G.m and G.n else Fraction(0)
    m = len(instance.terms)
    k, D_R = max(G.k, 1), G.D_R
    bad_bound = 2 * k * instance.d * float(eps) * m
    amort = all(len(r.removed) <= 2 * D_R * float(eps) * r.reduction + 1e-12 for r in records)
    worst_resid = max((s.residual for r in records for s in r.steps), default=0.0)
    assertions = {
        "iterations_le_terms": len(records) <= m,
        "bad_le_2kd_eps_L": len(st.bad) <= bad_bound + 1e-12,
        "amortized_per_iteration": amort,
        "reconstruction_within_tau": worst_resid <= tau,
        "energy_le_good_plus_bad": energy <= good_energy + len(st.bad) + 1e-8,
        "energy_ge_good": energy >= good_energy - 1e-8,
    }
    if check_commutation:
        assertions["remaining_commute"] = all((r.max_commutator or 0.0) <= TAU_COMM * 10 for r in records)
    wit = Witness(tuple(records), tuple((i, tuple(t.support)) for i, t in st.good), tuple(st.bad), eigen_index,
                  good_energy, energy, st.digest())
    return ApproxResult(wit, energy, good_energy, eps, D_R, k, bad_bound, assertions, psi, tuple(records))


# ---------------------------------------------------------------------------
# verifier

@dataclass(frozen=True)
class VerifyReport:
    ok: bool
    energy: float | None
    good_energy: float | None
    n_bad: int
    failures: tuple[str, ...]
    max_residual: float

    def as_dict(self) -> dict:
        return {"ok": self.ok, "energy": self.energy, "good_energy": self.good_energy, "n_bad": self.n_bad,
                "failures": list(self.failures), "max_residual": self.max_residual}


def verify_witness(instance: CLHInstance, witness: Witness, tau: float = TAU_NUM) -> VerifyReport:
    """Replay the transcript; check isometries, removals, reconstruction, digests and energies."""
    failures: list[str] = []
    worst = 0.0
    with threadpool_limits(1):
        st = initial_state(instance)
        try:
            for it, rec in enumerate(witness.iterations):
                if rec.v not in st.remaining:
                    raise WitnessError(f"iteration {it}: term {rec.v} not in L_rem")
                if rec.v not in st.intersecting():
                    raise WitnessError(f"iteration {it}: term {rec.v} does not intersect any remaining term")
                if list(rec.removed) != st.isolation_set(rec.v):
                    raise WitnessError(f"iteration {it}: removal set {list(rec.removed)} is not the isolation set "
                                       f"{st.isolation_set(rec.v)}")
                steps = list(rec.steps)

                def decompose(iteration, step, q, D, gl, gr, _steps=steps, _it=it):
                    if step >= len(_steps):
                        raise WitnessError(f"iteration {_it}: transcript has too few qudit steps")
                    s = _steps[step]
                    if s.qudit != q:
                        raise WitnessError(f"iteration {_it}, step {step}: expected qudit {q}, transcript has {s.qudit}")
                    dec = s.decomposition
                    for bi, b in enumerate(dec.blocks):
                        if b.isometry.shape != (D, b.d_left * b.d_right):
                            raise WitnessError(f"iteration {_it}, qudit {q}, block {bi}: bad isometry shape")
                    return dec

                def choose(iteration, step, dec, s, _steps=steps):
                    return _steps[step].chosen

                for s in steps:
                    for b in s.decomposition.blocks:
                        dev = float(np.linalg.norm(b.isometry.conj().T @ b.isometry - np.eye(b.dim)))
                        if dev > tau:
                            raise WitnessError(f"iteration {it}, qudit {s.qudit}: isometry not orthonormal ({dev:.2e})")
                new, replay = isolate_and_split(st, rec.v, decompose, choose, it, tau)
                if len(replay.steps) != len(steps):
                    raise WitnessError(f"iteration {it}: transcript step count mismatch")
                for s in replay.steps:
                    worst = max(worst, s.residual)
                    if s.residual > tau:
                        raise WitnessError(f"iteration {it}, qudit {s.qudit}: reconstruction residual {s.residual:.2e}")
                if replay.digest != rec.digest:
                    raise WitnessError(f"iteration {it}: state digest mismatch")
                st = new
            if st.intersecting():
                raise WitnessError("transcript ends while remaining terms still intersect")
            st = _finish(st)
            if st.digest() != witness.final_digest:
                raise WitnessError("final state digest mismatch")
            good_energy, vecs = good_ground(st, witness.eigen_index)
            psi = pull_back(st, vecs, instance.n)
            energy = state_energy(instance, psi)
        except (WitnessError, ClhError, DecompositionError) as exc:
            return VerifyReport(False, None, None, len(witness.bad), (str(exc),), worst)
    if list(st.bad) != list(witness.bad):
        failures.append("L_bad mismatch")
    if abs(good_energy - witness.claimed_good_energy) > 1e-8:
        failures.append(f"claimed L_good energy {witness.claimed_good_energy} != replayed {good_energy}")
    if abs(energy - witness.claimed_energy) > 1e-8:
        failures.append(f"claimed energy {witness.claimed_energy} != replayed {energy}")
    if energy > good_energy + len(st.bad) + 1e-8:
        failures.append(f"energy {energy} exceeds L_good energy + |L_bad| = {good_energy + len(st.bad)}")
    return VerifyReport(not failures, energy, good_energy, len(st.bad), tuple(failures), worst)


# ---------------------------------------------------------------------------
# serialisation

def _mat_to(M: np.ndarray) -> dict:
    M = np.asarray(M, dtype=complex)
    return {"re": (M.real + 0.0).tolist(), "im": (M.imag + 0.0).tolist()}


def _mat_from(obj: dict) -> np.ndarray:
    return np.array(obj["re"], dtype=float) + 1j * np.array(obj["im"], dtype=float)


def instance_to_dict(instance: CLHInstance) -> dict:
    return {
        "d": instance.d,
        "n": instance.n,
        "terms": [{"support": list(t.support), "matrix_re": (np.real(t.matrix) + 0.0).tolist(),
                   "matrix_im": (np.imag(t.matrix) + 0.0).tolist()} for t in instance.terms],
    }


def instance_from_dict(data: dict) -> CLHInstance:
    try:
        d, n = int(data["d"]), int(data["n"])
        terms = []
        for i, t in enumerate(data["terms"]):
            M = np.array(t["matrix_re"], dtype=float) + 1j * np.array(t.get("matrix_im", np.zeros_like(t["matrix_re"])), dtype=float)
            terms.append(Term(tuple(int(q) for q in t["support"]), M))
    except (KeyError, TypeError, ValueError) as exc:
        raise ClhError(f"malformed instance file: {exc}") from exc
    return CLHInstance(n, d, tuple(terms))


def witness_to_dict(w: Witness) -> dict:
    return {
        "schema_version": WITNESS_SCHEMA,
        "iterations": [{
            "v": r.v,
            "removed": list(r.removed),
            "steps": [{
                "qudit": s.qudit, "left": s.left, "right": s.right, "chosen": s.chosen, "reduction": s.reduction,
                "blocks": [{"d_left": b.d_left, "d_right": b.d_right, "isometry": _mat_to(b.isometry)}
                           for b in s.decomposition.blocks],
            } for s in r.steps],
            "scalars": [[i, v] for i, v in r.scalars],
            "digest": r.digest,
        } for r in w.iterations],
        "good": [[i, list(s)] for i, s in w.good],
        "bad": list(w.bad),
        "eigen_index": w.eigen_index,
        "claimed_good_energy": w.claimed_good_energy,
        "claimed_energy": w.claimed_energy,
        "final_digest": w.final_digest,
    }


def witness_from_dict(data: dict) -> Witness:
    try:
        its = []
        for r in data["iterations"]:
            steps = []
            for s in r["steps"]:
                blocks = tuple(Block(_mat_from(b["isometry"]), int(b["d_left"]), int(b["d_right"])) for b in s["blocks"])
                steps.append(QuditStep(int(s["qudit"]), int(s["left"]), int(s["right"]),
                                       QuditDecomposition(int(s["qudit"]), blocks), int(s["chosen"]),
                                       int(s["reduction"]), 0.0))
            its.append(IterationRecord(int(r["v"]), tuple(int(x) for x in r["removed"]), tuple(steps),
                                       tuple((int(i), float(v)) for i, v in r["scalars"]), str(r["digest"])))
        return Witness(tuple(its), tuple((int(i), tuple(int(x) for x in s)) for i, s in data["good"]),
                       tuple(int(x) for x in data["bad"]), int(data["eigen_index"]),
                       float(data["claimed_good_energy"]), float(data["claimed_energy"]), str(data["final_digest"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise WitnessError(f"malformed witness: {exc}") from exc


def witness_json(w: Witness) -> str:
    return json.dumps(witness_to_dict(w), sort_keys=True)


def random_commuting_instance(n: int, k: int, seed: int, D_R: int | None = None, **kw) -> CLHInstance:
    """Projector CLH from a random CSS code (the criterion-10 test family)."""
    from .zoo import as_projector_clh, random_css_instance

    code = random_css_instance(n, k, D_R if D_R is not None else 2 * k, seed, **kw)
    return as_projector_clh(code)

