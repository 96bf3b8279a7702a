"""Stabilizer codes over qudits: validation, syndromes, membership, coset weights.

All membership tests are phase-blind: they act on the symplectic exponent
vectors ``[x | z]`` over Z_d, which requires d prime wherever Gaussian
elimination is involved.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from . import modp
from .pauli import PauliOp, QuditSystem, commutes, from_symplectic, restrict, weight

DEFAULT_WEIGHT_CAP = 8
DEFAULT_ENUM_BUDGET = 50_000_000


class CodeValidationError(ValueError):
    def __init__(self, report: "ValidationReport"):
        super().__init__(report.message)
        self.report = report


class CapExceeded(RuntimeError):
    """No representative of weight <= cap exists; ``lower_bound`` is cap + 1."""

    def __init__(self, cap: int, what: str = "coset weight"):
        super().__init__(f"{what} exceeds cap {cap}")
        self.cap = cap
        self.lower_bound = cap + 1


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    failure: str | None = None  # noncommuting | locality | dependent | trivial_qudit | system
    indices: tuple[int, ...] = ()
    message: str = "valid"
    k: int | None = None
    D_R: int | None = None

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "failure": self.failure,
            "indices": list(self.indices),
            "message": self.message,
            "k": self.k,
            "D_R": self.D_R,
        }


@dataclass(frozen=True)
class Syndrome:
    violated: frozenset[int]

    def __len__(self) -> int:
        return len(self.violated)


@dataclass(frozen=True)
class StabilizerCode:
    system: QuditSystem
    generators: tuple[PauliOp, ...]
    k: int
    D_R: int

    @property
    def n(self) -> int:
        return self.system.n

    @property
    def d(self) -> int:
        return self.system.d

    @property
    def m(self) -> int:
        return len(self.generators)

    @cached_property
    def gen_matrix(self) -> np.ndarray:
        """Generators as rows ``[x | z]``; shape (m, 2n)."""
        if not self.generators:
            return np.zeros((0, 2 * self.n), dtype=np.int64)
        return np.array([g.symplectic() for g in self.generators], dtype=np.int64)

    @cached_property
    def check_matrix(self) -> np.ndarray:
        """Rows ``[z_g | -x_g]`` so that ``e @ check_matrix.T`` is the syndrome."""
        G = self.gen_matrix
        n = self.n
        return np.concatenate([G[:, n:], -G[:, :n]], axis=1) % self.d

    @cached_property
    def span(self) -> modp.SpanTester:
        modp.require_prime(self.d, "stabilizer-group membership")
        return modp.SpanTester(self.gen_matrix, self.d)

    @cached_property
    def supports(self) -> tuple[tuple[int, ...], ...]:
        return tuple(g.support for g in self.generators)

    @cached_property
    def incident(self) -> tuple[tuple[int, ...], ...]:
        """Generator indices acting on each qudit, ascending."""
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for i, supp in enumerate(self.supports):
            for q in supp:
                inc[q].append(i)
        return tuple(tuple(v) for v in inc)

    def syndrome_vectors(self, vecs: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(vecs) @ self.check_matrix.T) % self.d


def _first_noncommuting(gens: Sequence[PauliOp]) -> tuple[int, int] | None:
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            if not commutes(gens[i], gens[j]):
                return i, j
    return None


def check_generators(generators: Sequence[PauliOp], k: int | None = None) -> ValidationReport:
    """Check every code invariant and report the first one that fails."""
    gens = list(generators)
    if not gens:
        return ValidationReport(False, "system", (), "empty generator list")
    system = gens[0].system
    for i, g in enumerate(gens):
        if g.system != system:
            return ValidationReport(False, "system", (i,), f"generator {i} lives on {g.system}, expected {system}")
    pair = _first_noncommuting(gens)
    if pair is not None:
        return ValidationReport(False, "noncommuting", pair, f"generators {pair[0]} and {pair[1]} do not commute")
    weights = [weight(g) for g in gens]
    kk = max(weights) if k is None else k
    for i, w in enumerate(weights):
        if w > kk:
            return ValidationReport(False, "locality", (i,), f"generator {i} has weight {w} > k={kk}")
        if w == 0:
            return ValidationReport(False, "dependent", (i,), f"generator {i} is the identity")
    modp.require_prime(system.d, "independence check")
    G = np.array([g.symplectic() for g in gens], dtype=np.int64)
    for i in range(len(gens)):
        if modp.rank(G[: i + 1], system.d) < i + 1:
            return ValidationReport(False, "dependent", (i,), f"generator {i} is in the group generated by generators 0..{i - 1}")
    touched = np.any(G[:, : system.n] | G[:, system.n:], axis=0)
    for q in range(system.n):
        if not touched[q]:
            return ValidationReport(False, "trivial_qudit", (q,), f"qudit {q} is not acted on by any generator")
    degrees = np.sum((G[:, : system.n] | G[:, system.n:]) != 0, axis=0)
    return ValidationReport(True, k=kk, D_R=int(degrees.max()))


def validate(generators: Sequence[PauliOp], k: int | None = None) -> StabilizerCode:
    report = check_generators(generators, k)
    if not report.ok:
        raise CodeValidationError(report)
    gens = tuple(generators)
    return StabilizerCode(gens[0].system, gens, report.k, report.D_R)


def syndrome(code: StabilizerCode, E: PauliOp) -> Syndrome:
    if E.system != code.system:
        raise ValueError(f"system mismatch: {E.system} vs {code.system}")
    s = code.syndrome_vectors(E.symplectic())[0]
    return Syndrome(frozenset(int(i) for i in np.flatnonzero(s)))


def in_group(code: StabilizerCode, E: PauliOp) -> bool:
    if E.system != code.system:
        raise ValueError("system mismatch")
    return bool(code.span.contains(E.symplectic())[0])


def in_centralizer(code: StabilizerCode, E: PauliOp) -> bool:
    return len(syndrome(code, E)) == 0


# ---------------------------------------------------------------------------
# enumeration of Pauli words by weight class

def site_pairs(d: int) -> np.ndarray:
    """Non-identity (x, z) pairs in lexicographic order; shape (d^2-1, 2)."""
    return np.array([divmod(p, d) for p in range(1, d * d)], dtype=np.int64)


def iter_weight_class(n: int, d: int, w: int, batch: int = 200_000,
                      qudits: Sequence[int] | None = None) -> Iterator[np.ndarray]:
    """Yield all weight-``w`` symplectic vectors in (support, pattern) lexicographic order."""
    sites = list(range(n)) if qudits is None else list(qudits)
    if w == 0:
        yield np.zeros((1, 2 * n), dtype=np.int64)
        return
    if w > len(sites):
        return
    pairs = site_pairs(d)
    pats = np.array(list(itertools.product(range(len(pairs)), repeat=w)), dtype=np.int64)
    px = pairs[pats, 0]
    pz = pairs[pats, 1]
    per_batch = max(1, batch // len(pats))
    combos = itertools.combinations(sites, w)
    while True:
        chunk = list(itertools.islice(combos, per_batch))
        if not chunk:
            return
        supp = np.array(chunk, dtype=np.int64)
        B, P = len(supp), len(pats)
        out = np.zeros((B, P, 2 * n), dtype=np.int64)
        rows = np.arange(B)[:, None, None]
        cols = np.arange(P)[None, :, None]
        out[rows, cols, supp[:, None, :]] = px[None, :, :]
        out[rows, cols, n + supp[:, None, :]] = pz[None, :, :]
        yield out.reshape(B * P, 2 * n)


def _class_size(n: int, d: int, w: int) -> int:
    return math.comb(n, w) * (d * d - 1) ** w


# ---------------------------------------------------------------------------
# coset weights

@dataclass(frozen=True)
class CosetResult:
    weight: int
    representative: PauliOp
    method: str


def _brute_force_min(code: StabilizerCode, sig, target: np.ndarray, cap: int, upper: int | None,
                     budget: int) -> np.ndarray | None:
    """Lowest weight vector v (w < upper, w <= cap) with sig(v) == target, by enumeration."""
    stop = cap if upper is None else min(cap, upper - 1)
    spent = 0
    for w in range(0, stop + 1):
        spent += _class_size(code.n, code.d, w)
        if spent > budget:
            raise BudgetExceeded(f"enumeration beyond weight {w} exceeds budget {budget}")
        for vecs in iter_weight_class(code.n, code.d, w):
            hit = np.flatnonzero(np.all(sig(vecs) == target, axis=1))
            if hit.size:
                return vecs[hit[0]]
    return None


class _SyndromeSearch:
    """Exact minimum-weight search for a target syndrome.

    A minimum-weight word with syndrome ``s`` never contains a proper subword
    that already matches ``s`` on the first mismatching check, so branching on
    the qudits of the lowest-index mismatching check is exhaustive.
    """

    def __init__(self, code: StabilizerCode):
        self.code = code
        d = code.d
        pairs = site_pairs(d)
        self.pairs = pairs
        self.inc = [np.array(code.incident[q], dtype=np.int64) for q in range(code.n)]
        cm = code.check_matrix
        n = code.n
        # contribution of pair p on qudit q to the syndrome entries of inc[q]
        self.contrib = [
            [(pairs[p, 0] * cm[self.inc[q], q] + pairs[p, 1] * cm[self.inc[q], n + q]) % d for p in range(len(pairs))]
            for q in range(n)
        ]
        self.max_deg = max((len(v) for v in self.inc), default=0)

    def _apply(self, diff: np.ndarray, q: int, p: int) -> np.ndarray:
        new = diff.copy()
        new[self.inc[q]] = (new[self.inc[q]] - self.contrib[q][p]) % self.code.d
        return new

    def solutions(self, diff: np.ndarray, budget: int, chosen: tuple, min_q: int, seen: set,
                  stop_at_first: bool) -> Iterator[tuple]:
        if not diff.any():
            yield chosen
            return
        if budget == 0:
            return
        nnz = int(np.count_nonzero(diff))
        if nnz > budget * self.max_deg:
            return
        c = int(np.flatnonzero(diff)[0])
        used = {q for q, _ in chosen}
        for q in self.code.supports[c]:
            if q in used or q <= min_q:
                continue
            for p in range(len(self.pairs)):
                key = frozenset(chosen + ((q, p),))
                if key in seen:
                    continue
                seen.add(key)
                yield from self.solutions(self._apply(diff, q, p), budget - 1, chosen + ((q, p),), min_q, seen,
                                          stop_at_first)

    def min_weight(self, target: np.ndarray, cap: int) -> tuple | None:
        for w in range(0, cap + 1):
            seen: set = set()
            for sol in self.solutions(target.copy(), w, (), -1, seen, True):
                return sol
        return None

    def to_vector(self, chosen: tuple) -> np.ndarray:
        n = self.code.n
        v = np.zeros(2 * n, dtype=np.int64)
        for q, p in chosen:
            v[q], v[n + q] = self.pairs[p]
        return v


def coset_search(code: StabilizerCode, E: PauliOp, mode: str = "centralizer",
                 weight_cap: int = DEFAULT_WEIGHT_CAP, method: str = "auto",
                 budget: int = DEFAULT_ENUM_BUDGET) -> CosetResult:
    """Minimum weight over ``E * A`` (mode='stabilizer') or ``E * Z(A)`` (mode='centralizer').

    ``method='dfs'`` is the syndrome-guided search (centralizer mode only);
    ``method='enumerate'`` walks every weight class in order. ``auto`` picks
    dfs for the centralizer and enumeration for the stabilizer group.
    Raises :class:`CapExceeded` when no representative of weight <= cap exists.
    """
    if E.system != code.system:
        raise ValueError("system mismatch")
    if mode not in ("stabilizer", "centralizer"):
        raise ValueError(f"unknown mode {mode!r}")
    if method == "auto":
        method = "dfs" if mode == "centralizer" else "enumerate"
    e = E.symplectic()
    wE = weight(E)
    if mode == "centralizer" and method == "dfs":
        search = _SyndromeSearch(code)
        target = code.syndrome_vectors(e)[0]
        sol = search.min_weight(target, min(weight_cap, wE))
        if sol is None:
            raise CapExceeded(weight_cap)
        vec = search.to_vector(sol)
        return CosetResult(len(sol), from_symplectic(code.system, vec), "dfs")
    if method != "enumerate":
        raise ValueError(f"method {method!r} unavailable for mode {mode!r}")
    if mode == "centralizer":
        sig = code.syndrome_vectors
    else:
        sig = code.span.signature
    target = sig(e)[0]
    # E itself is a representative of weight wE, so only lighter classes need a scan
    vec = _brute_force_min(code, sig, target, weight_cap, wE, budget)
    if vec is None:
        if wE > weight_cap:
            raise CapExceeded(weight_cap)
        vec = e
    return CosetResult(int(np.count_nonzero(vec[: code.n] | vec[code.n:])), from_symplectic(code.system, vec), "enumerate")


def coset_min_weight(code: StabilizerCode, E: PauliOp, mode: str = "centralizer",
                     weight_cap: int = DEFAULT_WEIGHT_CAP, method: str = "auto") -> int:
    return coset_search(code, E, mode, weight_cap, method).weight


# ---------------------------------------------------------------------------
# distance

@dataclass(frozen=True)
class DistanceResult:
    distance: int | None  # None when it exceeds the cap
    cap: int
    witness: PauliOp | None
    method: str

    @property
    def lower_bound(self) -> int:
        return self.cap + 1 if self.distance is None else self.distance

    def text(self) -> str:
        return str(self.distance) if self.distance is not None else f">= {self.cap + 1}"


def distance(code: StabilizerCode, weight_cap: int = DEFAULT_WEIGHT_CAP, method: str = "dfs") -> DistanceResult:
    """Smallest weight of a word in Z(A) - A (phase ignored).

    ``dfs`` grows connected words from their lowest-index qudit, branching on
    violated checks; ``enumerate`` scans all weight classes; ``cosets`` lists
    the whole centralizer from a nullspace basis (small systems only).
    """
    if method == "enumerate":
        return _distance_enumerate(code, weight_cap)
    if method == "cosets":
        return _distance_cosets(code, weight_cap)
    if method != "dfs":
        raise ValueError(f"unknown method {method!r}")
    search = _SyndromeSearch(code)
    zero = np.zeros(code.m, dtype=np.int64)
    for w in range(1, weight_cap + 1):
        for q0 in range(code.n):
            for p0 in range(len(search.pairs)):
                diff = search._apply(zero, q0, p0)
                seen: set = set()
                for sol in search.solutions(diff, w - 1, ((q0, p0),), q0, seen, False):
                    if len(sol) != w:
                        continue
                    vec = search.to_vector(sol)
                    if not code.span.contains(vec)[0]:
                        return DistanceResult(w, weight_cap, from_symplectic(code.system, vec), "dfs")
    return DistanceResult(None, weight_cap, None, "dfs")


def _distance_enumerate(code: StabilizerCode, cap: int, budget: int = DEFAULT_ENUM_BUDGET) -> DistanceResult:
    spent = 0
    for w in range(1, cap + 1):
        spent += _class_size(code.n, code.d, w)
        if spent > budget:
            raise BudgetExceeded(f"distance enumeration beyond weight {w} exceeds budget")
        for vecs in iter_weight_class(code.n, code.d, w):
            cent = ~np.any(code.syndrome_vectors(vecs), axis=1)
            if not cent.any():
                continue
            cand = vecs[cent]
            outside = ~code.span.contains(cand)
            if outside.any():
                return DistanceResult(w, cap, from_symplectic(code.system, cand[np.flatnonzero(outside)[0]]), "enumerate")
    return DistanceResult(None, cap, None, "enumerate")


def centralizer_basis(code: StabilizerCode) -> np.ndarray:
    modp.require_prime(code.d, "centralizer basis")
    return modp.nullspace(code.check_matrix, code.d)


def _distance_cosets(code: StabilizerCode, cap: int, max_elements: int = 2**22) -> DistanceResult:
    basis = centralizer_basis(code)
    d, n = code.d, code.n
    if d ** len(basis) > max_elements:
        raise BudgetExceeded(f"centralizer has {d}^{len(basis)} elements")
    best = None
    coeffs = np.array(list(itertools.product(range(d), repeat=len(basis))), dtype=np.int64)
    elems = (coeffs @ basis) % d
    outside = ~code.span.contains(elems)
    elems = elems[outside]
    if len(elems):
        wts = np.count_nonzero(elems[:, :n] | elems[:, n:], axis=1)
        i = int(np.argmin(wts))
        best = (int(wts[i]), elems[i])
    if best is None or best[0] > cap:
        return DistanceResult(None, cap, None, "cosets")
    return DistanceResult(best[0], cap, from_symplectic(code.system, best[1]), "cosets")


# ---------------------------------------------------------------------------
# structural predicates

@dataclass(frozen=True)
class NocommuteReport:
    ok: bool
    witnesses: dict = field(default_factory=dict)  # qudit -> (i, j)
    failed_qudit: int | None = None


def check_nocommute_per_qudit(code: StabilizerCode) -> NocommuteReport:
    """For every qudit, find two generators whose restrictions to it do not commute."""
    witnesses = {}
    for q in range(code.n):
        inc = code.incident[q]
        found = None
        for a, i in enumerate(inc):
            ri = restrict(code.generators[i], q)
            for j in inc[a + 1:]:
                if not commutes(ri, restrict(code.generators[j], q)):
                    found = (i, j)
                    break
            if found:
                break
        if found is None:
            return NocommuteReport(False, witnesses, q)
        witnesses[q] = found
    return NocommuteReport(True, witnesses, None)


def is_independent(code: StabilizerCode) -> bool:
    return modp.rank(code.gen_matrix, code.d) == code.m


def min_group_weight(code: StabilizerCode, below: int, budget: int = DEFAULT_ENUM_BUDGET) -> int | None:
    """Lowest weight of a non-identity element of A, if it is < ``below``; else None."""
    d, m = code.d, code.m
    if d**m <= 2**16:
        coeffs = np.array(list(itertools.product(range(d), repeat=m))[1:], dtype=np.int64)
        elems = (coeffs @ code.gen_matrix) % d
        wts = np.count_nonzero(elems[:, : code.n] | elems[:, code.n:], axis=1)
        wts = wts[wts > 0]
        w = int(wts.min()) if len(wts) else None
        return w if w is not None and w < below else None
    spent = 0
    for w in range(1, below):
        spent += _class_size(code.n, d, w)
        if spent > budget:
            raise BudgetExceeded("succinctness scan exceeds budget")
        for vecs in iter_weight_class(code.n, d, w):
            if code.span.contains(vecs).any():
                return w
    return None


def is_succinct(code: StabilizerCode) -> bool:
    """Independent, and every non-identity stabilizer-group element has weight >= k."""
    return is_independent(code) and min_group_weight(code, code.k) is None
