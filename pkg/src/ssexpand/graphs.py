"""Bipartite interaction graphs: constraints (left) against qudits (right).

Expansion error of a right set S is ``1 - |Gamma(S)| / (D_R |S|)`` clamped at
0, with ``D_R`` the maximum right degree. For right-regular graphs this is
the usual bipartite small-set expansion error; irregular graphs are flagged.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

DEFAULT_EXACT_BUDGET = 20_000_000


class GraphError(ValueError):
    pass


class IndependentSetError(RuntimeError):
    def __init__(self, message: str, achieved: tuple[int, ...]):
        super().__init__(message)
        self.achieved = achieved


@dataclass(frozen=True)
class BipartiteGraph:
    m: int
    n: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.adjacency) != self.m:
            raise GraphError(f"adjacency has {len(self.adjacency)} rows, expected m={self.m}")
        adj = []
        for l, row in enumerate(self.adjacency):
            srow = tuple(sorted(int(r) for r in row))
            if len(set(srow)) != len(srow):
                raise GraphError(f"duplicate edge at left vertex {l}")
            if srow and not (0 <= srow[0] and srow[-1] < self.n):
                raise GraphError(f"left vertex {l} has a right index out of range")
            adj.append(srow)
        object.__setattr__(self, "adjacency", tuple(adj))

    @classmethod
    def from_edges(cls, m: int, n: int, edges: Iterable[tuple[int, int]]) -> "BipartiteGraph":
        rows: list[list[int]] = [[] for _ in range(m)]
        for l, r in edges:
            if not 0 <= l < m:
                raise GraphError(f"left index {l} out of range")
            rows[l].append(r)
        return cls(m, n, tuple(tuple(r) for r in rows))

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(l, r) for l, row in enumerate(self.adjacency) for r in row]

    @cached_property
    def right_adjacency(self) -> tuple[tuple[int, ...], ...]:
        cols: list[list[int]] = [[] for _ in range(self.n)]
        for l, row in enumerate(self.adjacency):
            for r in row:
                cols[r].append(l)
        return tuple(tuple(c) for c in cols)

    @property
    def k(self) -> int:
        return max((len(r) for r in self.adjacency), default=0)

    @property
    def D_R(self) -> int:
        return max((len(c) for c in self.right_adjacency), default=0)

    @property
    def right_regular(self) -> bool:
        return len({len(c) for c in self.right_adjacency}) <= 1

    @cached_property
    def incidence(self) -> np.ndarray:
        """Boolean (n, m) matrix: qudit r is acted on by constraint l."""
        inc = np.zeros((self.n, self.m), dtype=bool)
        for l, row in enumerate(self.adjacency):
            inc[list(row), l] = True
        return inc

    def gamma(self, S: Iterable[int]) -> set[int]:
        """Constraints touching the qudits of S."""
        out: set[int] = set()
        for r in S:
            out.update(self.right_adjacency[r])
        return out

    def gamma_left(self, U: Iterable[int]) -> set[int]:
        """Qudits touched by the constraints of U."""
        out: set[int] = set()
        for l in U:
            out.update(self.adjacency[l])
        return out


def from_code(code) -> BipartiteGraph:
    return BipartiteGraph(code.m, code.n, tuple(code.supports))


def from_clh(instance) -> BipartiteGraph:
    from .clh import nontrivial_support

    rows = [tuple(nontrivial_support(t, instance.dims)) for t in instance.terms]
    return BipartiteGraph(len(rows), instance.n, tuple(rows))


# ---------------------------------------------------------------------------
# expansion

def set_eps(G: BipartiteGraph, S: Sequence[int]) -> Fraction:
    """Expansion error of one right set, clamped at 0."""
    S = list(S)
    if not S:
        raise GraphError("expansion error of the empty set is undefined")
    val = 1 - Fraction(len(G.gamma(S)), G.D_R * len(S))
    return max(val, Fraction(0))


@dataclass(frozen=True)
class ExpansionReport:
    eps: Fraction
    witness: tuple[int, ...]
    mode: str
    max_set_size: int
    sets_examined: int
    right_regular: bool
    D_R: int
    samples: int | None = None
    seed: int | None = None

    def as_dict(self) -> dict:
        return {
            "eps": str(self.eps),
            "eps_float": float(self.eps),
            "witness": list(self.witness),
            "mode": self.mode,
            "max_set_size": self.max_set_size,
            "sets_examined": self.sets_examined,
            "right_regular": self.right_regular,
            "D_R": self.D_R,
            "samples": self.samples,
            "seed": self.seed,
        }


def _best_in_chunk(G: BipartiteGraph, combos: np.ndarray) -> tuple[int, int]:
    """(|Gamma(S)|, index) of the first combo with the smallest neighbourhood."""
    union = np.zeros((len(combos), G.m), dtype=bool)
    for j in range(combos.shape[1]):
        union |= G.incidence[combos[:, j]]
    sizes = union.sum(axis=1)
    i = int(np.argmin(sizes))
    return int(sizes[i]), i


def _chunks(it, size):
    while True:
        chunk = list(itertools.islice(it, size))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.int64)


def expansion_error(G: BipartiteGraph, k: int | None = None, mode: str = "exact", trials: int = 10_000,
                    seed: int = 0, budget: int = DEFAULT_EXACT_BUDGET, workers: int = 1) -> ExpansionReport:
    """Max over non-empty S with |S| <= k of ``1 - |Gamma(S)|/(D_R |S|)``.

    Exact mode enumerates all sets by size, then lexicographically, keeping
    the first maximiser as witness. Sampled mode draws ``trials`` random sets
    and lower-bounds the exact value.
    """
    k = G.k if k is None else k
    k = min(k, G.n)
    if G.n == 0 or G.D_R == 0:
        return ExpansionReport(Fraction(0), (), mode, k, 0, G.right_regular, G.D_R)
    if mode == "exact":
        total = sum(math.comb(G.n, s) * s for s in range(1, k + 1))
        if total > budget:
            raise GraphError(f"exact expansion needs {total} set-vertex visits, budget is {budget}")
        best = (Fraction(-1), ())
        examined = 0
        for s in range(1, k + 1):
            chunks = list(_chunks(itertools.combinations(range(G.n), s), 50_000))
            examined += sum(len(c) for c in chunks)
            if workers > 1:
                with ThreadPoolExecutor(workers) as ex:
                    results = list(ex.map(lambda c: _best_in_chunk(G, c), chunks))
            else:
                results = [_best_in_chunk(G, c) for c in chunks]
            for chunk, (gam, i) in zip(chunks, results):
                val = 1 - Fraction(gam, G.D_R * s)
                if val > best[0]:
                    best = (val, tuple(int(x) for x in chunk[i]))
        eps = max(best[0], Fraction(0))
        return ExpansionReport(eps, best[1], "exact", k, examined, G.right_regular, G.D_R)
    if mode == "sampled":
        rng = np.random.default_rng(seed)
        best = (Fraction(-1), ())
        for _ in range(trials):
            s = int(rng.integers(1, k + 1))
            S = tuple(sorted(int(x) for x in rng.choice(G.n, size=s, replace=False)))
            val = 1 - Fraction(len(G.gamma(S)), G.D_R * s)
            if val > best[0]:
                best = (val, S)
        return ExpansionReport(max(best[0], Fraction(0)), best[1], "sampled", k, trials, G.right_regular, G.D_R,
                               samples=trials, seed=seed)
    raise GraphError(f"unknown expansion mode {mode!r}")


def iter_sets_with_eps(G: BipartiteGraph, k: int) -> Iterable[tuple[tuple[int, ...], Fraction, np.ndarray]]:
    """Every right set of size 1..k with its eps and per-constraint multiplicities (length m)."""
    for s in range(1, min(k, G.n) + 1):
        for chunk in _chunks(itertools.combinations(range(G.n), s), 20_000):
            mult = np.zeros((len(chunk), G.m), dtype=np.int64)
            for j in range(s):
                mult += G.incidence[chunk[:, j]]
            for row, mu in zip(chunk, mult):
                gam = int(np.count_nonzero(mu))
                eps = max(1 - Fraction(gam, G.D_R * s), Fraction(0))
                yield tuple(int(x) for x in row), eps, mu


# ---------------------------------------------------------------------------
# appendix facts

def multiplicities(G: BipartiteGraph, S: Sequence[int]) -> dict[int, int]:
    """For each constraint in Gamma(S), how many members of S it touches."""
    out: dict[int, int] = {}
    for r in S:
        for l in G.right_adjacency[r]:
            out[l] = out.get(l, 0) + 1
    return out


def multi_neighbor_fraction(G: BipartiteGraph, S: Sequence[int]) -> Fraction:
    S = list(S)
    if not S:
        raise GraphError("S must be non-empty")
    mult = multiplicities(G, S)
    if not mult:
        return Fraction(0)
    return Fraction(sum(1 for v in mult.values() if v >= 2), len(mult))


def check_fact_essence(G: BipartiteGraph, S: Sequence[int]) -> bool:
    """At most a 2*eps fraction of Gamma(S) sees S more than once, when eps < 1/2."""
    eps = set_eps(G, S)
    if eps >= Fraction(1, 2):
        return True
    return multi_neighbor_fraction(G, S) <= 2 * eps


def best_qudit(G: BipartiteGraph, S: Sequence[int]) -> tuple[int, Fraction]:
    """Qudit of S with the fewest incident constraints touching S at least twice.

    The fraction is that count over D_R, which coincides with the per-qudit
    fraction on right-regular graphs and keeps the 2*eps guarantee otherwise.
    """
    S = sorted(S)
    if not S:
        raise GraphError("S must be non-empty")
    mult = multiplicities(G, S)
    best = None
    for q in S:
        cnt = sum(1 for l in G.right_adjacency[q] if mult[l] >= 2)
        if best is None or cnt < best[1]:
            best = (q, cnt)
    return best[0], Fraction(best[1], G.D_R) if G.D_R else Fraction(0)


@dataclass(frozen=True)
class FactScan:
    sets_checked: int
    sets_below_half: int
    essence_counterexample: tuple[int, ...] | None
    deg_counterexample: tuple[int, ...] | None

    @property
    def ok(self) -> bool:
        return self.essence_counterexample is None and self.deg_counterexample is None


def scan_expander_facts(G: BipartiteGraph, max_size: int) -> FactScan:
    """Check Facts essence and deg on every right set of size <= max_size (vectorised, exact integers).

    With eps(S) = 1 - g/(D_R s): essence is  multi * D_R s <= 2 (D_R s - g) * g,
    deg is  min_q count_q * s... i.e. count/D_R <= 2 eps  <=>  count * s <= 2 (D_R s - g).
    Only sets with eps(S) < 1/2, i.e. 2 g > D_R s, are constrained.
    """
    inc = G.incidence.astype(np.int64)
    D = G.D_R
    checked = below = 0
    ess = deg = None
    for s in range(1, min(max_size, G.n) + 1):
        for chunk in _chunks(itertools.combinations(range(G.n), s), 20_000):
            mult = np.zeros((len(chunk), G.m), dtype=np.int64)
            for j in range(s):
                mult += inc[chunk[:, j]]
            g = np.count_nonzero(mult, axis=1)
            multi_mask = mult >= 2
            multi = multi_mask.sum(axis=1)
            counts = np.stack([(inc[chunk[:, j]] * multi_mask).sum(axis=1) for j in range(s)], axis=1)
            best = counts.min(axis=1)
            active = 2 * g > D * s
            slack = D * s - g
            checked += len(chunk)
            below += int(active.sum())
            bad_e = np.flatnonzero(active & (multi * D * s > 2 * slack * g))
            bad_d = np.flatnonzero(active & (best > 2 * slack))
            if ess is None and bad_e.size:
                ess = tuple(int(x) for x in chunk[bad_e[0]])
            if deg is None and bad_d.size:
                deg = tuple(int(x) for x in chunk[bad_d[0]])
    return FactScan(checked, below, ess, deg)


# ---------------------------------------------------------------------------
# neighbourhoods and independent sets

def gamma_t(G: BipartiteGraph, u: int, t: int) -> frozenset[int]:
    """Qudits within t constraint-steps of constraint u (t=0: u's own qudits)."""
    if t < 0:
        raise GraphError("t must be >= 0")
    region = set(G.adjacency[u])
    for _ in range(t):
        region = G.gamma_left(G.gamma(region))
    return frozenset(region)


def _greedy_disjoint(G: BipartiteGraph, t: int) -> tuple[int, ...]:
    taken: set[int] = set()
    chosen = []
    for u in range(G.m):
        ball = gamma_t(G, u, t)
        if ball.isdisjoint(taken):
            chosen.append(u)
            taken |= ball
    return tuple(chosen)


def is_L_independent(G: BipartiteGraph, U: Sequence[int]) -> bool:
    """Pairwise: the qudits of the constraints meeting u and those meeting v are disjoint."""
    return is_t_independent(G, U, 1)


def is_t_independent(G: BipartiteGraph, U: Sequence[int], t: int) -> bool:
    balls = [gamma_t(G, u, t) for u in U]
    for i in range(len(balls)):
        for j in range(i + 1, len(balls)):
            if balls[i] & balls[j]:
                return False
    return len(set(U)) == len(U)


def greedy_L_independent(G: BipartiteGraph, target: int = 0) -> tuple[int, ...]:
    if target > G.m:
        raise IndependentSetError(f"target {target} exceeds the number of constraints {G.m}", ())
    U = _greedy_disjoint(G, 1)
    if len(U) < target:
        raise IndependentSetError(f"greedy reached {len(U)} < target {target}", U)
    return U


@dataclass(frozen=True)
class KIndependentReport:
    chosen: tuple[int, ...]
    fraction: Fraction
    proof_bound: float  # k^{-2k} D_R^{-2k}
    eta: float  # k^{-(2k+1)} D_R^{-(2k-1)}
    meets_proof_bound: bool


def indset_bounds(k: int, D_R: int) -> tuple[float, float]:
    """(proof-line bound k^-2k D_R^-2k, stated eta(k, D_R) = k^-(2k+1) D_R^-(2k-1))."""
    return float(k) ** (-2 * k) * float(D_R) ** (-2 * k), float(k) ** (-(2 * k + 1)) * float(D_R) ** (-(2 * k - 1))


def greedy_k_independent(G: BipartiteGraph, k: int | None = None, target: int = 0) -> KIndependentReport:
    """Lowest-index-first constraints whose Gamma^(k) balls are pairwise disjoint."""
    k = G.k if k is None else k
    if target > G.m:
        raise IndependentSetError(f"target {target} exceeds the number of constraints {G.m}", ())
    U = _greedy_disjoint(G, k)
    if len(U) < target:
        raise IndependentSetError(f"greedy reached {len(U)} < target {target}", U)
    proof, eta = indset_bounds(max(k, 1), max(G.D_R, 1))
    frac = Fraction(len(U), G.m) if G.m else Fraction(0)
    return KIndependentReport(U, frac, proof, eta, float(frac) >= proof)


def isolation_penalty(G: BipartiteGraph, g: int) -> tuple[int, tuple[int, ...]]:
    """Constraints other than g sharing at least two qudits with g, and their count."""
    mine = set(G.adjacency[g])
    removed = tuple(v for v in range(G.m) if v != g and len(mine.intersection(G.adjacency[v])) >= 2)
    return len(removed), removed


def random_bipartite_graph(m: int, n: int, left_degree: int, seed: int) -> BipartiteGraph:
    """Each constraint picks ``left_degree`` distinct qudits uniformly."""
    rng = np.random.default_rng(seed)
    rows = tuple(tuple(sorted(int(r) for r in rng.choice(n, size=left_degree, replace=False))) for _ in range(m))
    return BipartiteGraph(m, n, rows)


def random_right_regular_graph(m: int, n: int, right_degree: int, seed: int) -> BipartiteGraph:
    """Each qudit joins ``right_degree`` distinct constraints uniformly; constraints left empty are dropped."""
    rng = np.random.default_rng(seed)
    rows: list[list[int]] = [[] for _ in range(m)]
    for r in range(n):
        for l in rng.choice(m, size=right_degree, replace=False):
            rows[int(l)].append(r)
    return BipartiteGraph.from_edges(0, n, ()) if not any(rows) else BipartiteGraph(
        sum(1 for row in rows if row), n, tuple(tuple(row) for row in rows if row))


def graph_to_dict(G: BipartiteGraph) -> dict:
    return {"m": G.m, "n": G.n, "edges": [list(e) for e in G.edges]}


def graph_from_dict(data: dict) -> BipartiteGraph:
    try:
        return BipartiteGraph.from_edges(int(data["m"]), int(data["n"]), [tuple(e) for e in data["edges"]])
    except KeyError as exc:
        raise GraphError(f"graph file missing field {exc}") from exc
