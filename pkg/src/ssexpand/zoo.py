"""Test subjects: toric codes, chain errors, classical parity codes, random CSS codes.

Toric layout on an L x L torus of vertices (r, c):
  horizontal edge h(r, c) = r*L + c joins (r, c)-(r, c+1);
  vertical edge   v(r, c) = L^2 + r*L + c joins (r, c)-(r+1, c).
Plaquette (r, c) is Z on h(r,c), h(r+1,c), v(r,c), v(r,c+1); star (r, c) is X on
h(r,c), h(r,c-1), v(r,c), v(r-1,c). Generators: plaquettes in row-major order,
then stars; the last plaquette and the last star are dropped (they are the
products of the others).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import modp
from .graphs import BipartiteGraph, expansion_error
from .pauli import PauliOp, QuditSystem, from_terms, identity, multiply, to_matrix
from .stabilizer import StabilizerCode, distance, validate


class ZooError(ValueError):
    pass


# ---------------------------------------------------------------------------
# toric code

@dataclass(frozen=True)
class ToricCode:
    L: int
    code: StabilizerCode
    full_checks: tuple[PauliOp, ...]  # all L^2 plaquettes then all L^2 stars, including the dropped two

    def h(self, r: int, c: int) -> int:
        L = self.L
        return (r % L) * L + (c % L)

    def v(self, r: int, c: int) -> int:
        L = self.L
        return L * L + (r % L) * L + (c % L)

    @property
    def dropped_star_vertex(self) -> tuple[int, int]:
        return (self.L - 1, self.L - 1)


def _toric_checks(L: int) -> tuple[list[PauliOp], list[PauliOp]]:
    system = QuditSystem(2 * L * L, 2)
    h = lambda r, c: (r % L) * L + (c % L)  # noqa: E731
    v = lambda r, c: L * L + (r % L) * L + (c % L)  # noqa: E731
    plaq, star = [], []
    for r in range(L):
        for c in range(L):
            plaq.append(from_terms(system, [(q, 0, 1) for q in sorted({h(r, c), h(r + 1, c), v(r, c), v(r, c + 1)})]))
    for r in range(L):
        for c in range(L):
            star.append(from_terms(system, [(q, 1, 0) for q in sorted({h(r, c), h(r, c - 1), v(r, c), v(r - 1, c)})]))
    return plaq, star


def toric_code(L: int) -> ToricCode:
    if L < 2:
        raise ZooError("toric code needs L >= 2")
    plaq, star = _toric_checks(L)
    code = validate(plaq[:-1] + star[:-1], 4)
    return ToricCode(L, code, tuple(plaq + star))


def staircase_path(L: int, start: tuple[int, int], length: int) -> list[tuple[int, int]]:
    """Vertices of a right/down alternating walk (right first) of ``length`` edges."""
    r, c = start
    verts = [(r % L, c % L)]
    for i in range(length):
        if i % 2 == 0:
            c += 1
        else:
            r += 1
        verts.append((r % L, c % L))
    return verts


def _edge_between(toric: ToricCode, a: tuple[int, int], b: tuple[int, int]) -> int:
    L = toric.L
    (r1, c1), (r2, c2) = a, b
    if r1 == r2 and (c2 - c1) % L == 1:
        return toric.h(r1, c1)
    if r1 == r2 and (c1 - c2) % L == 1:
        return toric.h(r1, c2)
    if c1 == c2 and (r2 - r1) % L == 1:
        return toric.v(r1, c1)
    if c1 == c2 and (r1 - r2) % L == 1:
        return toric.v(r2, c1)
    raise ZooError(f"vertices {a} and {b} are not adjacent on the {L}x{L} torus")


def chain_error(toric: ToricCode, path: Sequence[tuple[int, int]], kind: str = "Z") -> PauliOp:
    """Z errors on the edges of a vertex path (``kind='X'`` uses the same edges)."""
    if len(path) < 2:
        raise ZooError("a path needs at least two vertices")
    edges = [_edge_between(toric, path[i], path[i + 1]) for i in range(len(path) - 1)]
    if len(set(edges)) != len(edges):
        raise ZooError("path reuses an edge")
    x, z = (1, 0) if kind == "X" else (0, 1)
    return from_terms(toric.code.system, [(q, x, z) for q in sorted(edges)])


def _torus_l1(L: int, a: tuple[int, int], b: tuple[int, int]) -> int:
    dr = abs(a[0] - b[0]) % L
    dc = abs(a[1] - b[1]) % L
    return min(dr, L - dr) + min(dc, L - dc)


def scattered_chains(toric: ToricCode, length: int, spacing: int, count: int) -> tuple[PauliOp, list[list[tuple[int, int]]]]:
    """``count`` staircase chains whose vertex sets are >= ``spacing`` apart (torus L1 distance).

    Chains whose endpoints land on the dropped star's vertex are skipped so
    every chain keeps its two end violations.
    """
    L = toric.L
    chains: list[list[tuple[int, int]]] = []
    for r0, c0 in itertools.product(range(L), range(L)):
        if len(chains) == count:
            break
        path = staircase_path(L, (r0, c0), length)
        if toric.dropped_star_vertex in (path[0], path[-1]):
            continue
        if len(set(path)) != len(path):
            continue
        if all(_torus_l1(L, a, b) >= spacing for ch in chains for a in ch for b in path):
            chains.append(path)
    if len(chains) < count:
        raise ZooError(f"only {len(chains)} chains of length {length} fit with spacing {spacing} on L={L}")
    err = identity(toric.code.system)
    for ch in chains:
        err = multiply(err, chain_error(toric, ch))
    return err, chains


# ---------------------------------------------------------------------------
# classical parity codes

@dataclass(frozen=True)
class ClassicalParityCode:
    graph: BipartiteGraph

    def __post_init__(self):
        for l, adj in enumerate(self.graph.adjacency):
            if not adj:
                raise ZooError(f"check {l} involves no bits")

    def violations(self, S: Sequence[int]) -> list[int]:
        """Checks seeing an odd number of the flipped bits S."""
        cnt: dict[int, int] = {}
        for r in S:
            for l in self.graph.right_adjacency[r]:
                cnt[l] = cnt.get(l, 0) + 1
        return sorted(l for l, c in cnt.items() if c % 2)


def classical_parity_code(graph: BipartiteGraph) -> ClassicalParityCode:
    return ClassicalParityCode(graph)


@dataclass(frozen=True)
class ClassicalCheckReport:
    ok: bool
    eps: Fraction
    max_weight: int
    sets_checked: int
    min_ratio: Fraction | None  # min violations / (|S| D_R)
    counterexample: tuple[int, ...] | None
    distance_ok: bool | None  # every S rejected (checked when eps < 1/2)
    distance_counterexample: tuple[int, ...] | None
    mean_left_degree: float
    right_regular: bool

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "eps": str(self.eps),
            "eps_float": float(self.eps),
            "max_weight": self.max_weight,
            "sets_checked": self.sets_checked,
            "min_ratio": None if self.min_ratio is None else str(self.min_ratio),
            "bound_ratio": str(1 - 3 * self.eps),
            "counterexample": None if self.counterexample is None else list(self.counterexample),
            "distance_ok": self.distance_ok,
            "distance_counterexample": None if self.distance_counterexample is None else list(self.distance_counterexample),
            "mean_left_degree": self.mean_left_degree,
            "right_regular": self.right_regular,
        }


def classical_robustness_check(code: ClassicalParityCode, max_weight: int, eps: Fraction | None = None) -> ClassicalCheckReport:
    """Exhaustively check violations(S) >= |S| D_R (1 - 3 eps) for every |S| <= max_weight."""
    G = code.graph
    if eps is None:
        eps = expansion_error(G, max_weight).eps
    inc = G.incidence.astype(np.int64)
    worst: Fraction | None = None
    bad = None
    dist_bad = None
    checked = 0
    for s in range(1, min(max_weight, G.n) + 1):
        combos = np.array(list(itertools.combinations(range(G.n), s)), dtype=np.int64)
        if not len(combos):
            continue
        mult = inc[combos].sum(axis=1)
        viol = np.count_nonzero(mult % 2, axis=1)
        checked += len(combos)
        i = int(np.argmin(viol))
        ratio = Fraction(int(viol[i]), s * G.D_R)
        if worst is None or ratio < worst:
            worst = ratio
        # exact integer form of viol >= s D_R (1 - 3 eps) with eps = a/b
        a, b = eps.numerator, eps.denominator
        failing = np.flatnonzero(viol * b < s * G.D_R * (b - 3 * a))
        if bad is None and failing.size:
            bad = tuple(int(x) for x in combos[int(failing[0])])
        if dist_bad is None and eps < Fraction(1, 2):
            zero = np.flatnonzero(viol == 0)
            if zero.size:
                dist_bad = tuple(int(x) for x in combos[int(zero[0])])
    distance_ok = (dist_bad is None) if eps < Fraction(1, 2) else None
    ok = bad is None and distance_ok is not False
    mean_deg = float(np.mean([len(a) for a in G.adjacency])) if G.m else 0.0
    return ClassicalCheckReport(ok, eps, max_weight, checked, worst, bad, distance_ok, dist_bad, mean_deg, G.right_regular)


# ---------------------------------------------------------------------------
# random CSS codes

def _random_weight_k(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    v = np.zeros(n, dtype=np.int64)
    v[rng.choice(n, size=k, replace=False)] = 1
    return v


def _max_col(rows: list[np.ndarray], n: int) -> int:
    return int(np.sum(rows, axis=0).max()) if rows else 0


def random_css_instance(n: int, k: int, D_R: int, seed: int, n_z: int | None = None, n_x: int | None = None,
                        min_distance: int | None = None, max_attempts: int = 2000,
                        distance_cap: int = 6) -> StabilizerCode:
    """Random weight-k Z checks, then weight-k X checks drawn from ker(H_z) over GF(2).

    Each column (qubit) is touched by at most D_R checks; attempts repeat
    until the generator list validates (and reaches ``min_distance``).
    """
    if k > n:
        raise ZooError("k must not exceed n")
    n_z = max(1, n // (2 * k) + 1) if n_z is None else n_z
    n_x = n_z if n_x is None else n_x
    rng = np.random.default_rng(seed)
    system = QuditSystem(n, 2)
    for _ in range(max_attempts):
        hz: list[np.ndarray] = []
        for _ in range(50 * n_z):
            if len(hz) == n_z:
                break
            cand = _random_weight_k(rng, n, k)
            if _max_col(hz + [cand], n) <= D_R and modp.rank(np.array(hz + [cand]), 2) == len(hz) + 1:
                hz.append(cand)
        if len(hz) < n_z:
            continue
        Hz = np.array(hz)
        hx: list[np.ndarray] = []
        for _ in range(400 * max(n_x, 1)):
            if len(hx) == n_x:
                break
            cand = _random_weight_k(rng, n, k)
            if np.any((Hz @ cand) % 2):
                continue
            if _max_col(hz + hx + [cand], n) > D_R:
                continue
            if modp.rank(np.array(hx + [cand]), 2) == len(hx) + 1:
                hx.append(cand)
        if len(hx) < n_x:
            continue
        gens = [from_terms(system, [(int(q), 0, 1) for q in np.flatnonzero(r)]) for r in hz]
        gens += [from_terms(system, [(int(q), 1, 0) for q in np.flatnonzero(r)]) for r in hx]
        try:
            code = validate(gens, k)
        except ValueError:
            continue
        if min_distance is not None and distance(code, min(distance_cap, max(min_distance - 1, 1))).distance is not None:
            continue
        return code
    raise ZooError(f"no valid random CSS code found in {max_attempts} attempts")


# ---------------------------------------------------------------------------
# projector Hamiltonians from codes

def _local_pauli(g: PauliOp) -> tuple[tuple[int, ...], np.ndarray]:
    supp = g.support
    sub = PauliOp(QuditSystem(len(supp), g.d), tuple(g.x_exps[q] for q in supp),
                  tuple(g.z_exps[q] for q in supp), g.phase_exp)
    return supp, to_matrix(sub)


def unit_eigenprojector(U: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Projector onto the +1 eigenspace of a unitary of finite order."""
    dim = U.shape[0]
    acc = np.eye(dim, dtype=complex)
    power = U.copy()
    for N in range(1, 4 * dim * dim + 2):
        if np.linalg.norm(power - np.eye(dim)) < tol:
            return acc / N
        acc = acc + power
        power = power @ U
    raise ZooError("generator has no finite order within the search range")


def as_projector_clh(code: StabilizerCode | None, generators: Sequence[PauliOp] | None = None):
    """CLH whose terms are I - (projector onto each generator's +1 eigenspace)."""
    from .clh import CLHInstance, Term

    gens = list(code.generators) if code is not None else list(generators or [])
    if not gens:
        n = code.n if code is not None else 1
        d = code.d if code is not None else 2
        return CLHInstance(n, d, ())
    terms = []
    for g in gens:
        supp, M = _local_pauli(g)
        Pi = unit_eigenprojector(M)
        H = np.eye(M.shape[0], dtype=complex) - Pi
        terms.append(Term(tuple(supp), H))
    return CLHInstance(gens[0].n, gens[0].d, tuple(terms))


def chain_weight_formula(length: int, D_R: int = 4) -> Fraction:
    """Robustness of an isolated open chain: 2 end violations over D_R * length."""
    return Fraction(2, D_R * length)


__all__ = [
    "ToricCode", "toric_code", "staircase_path", "chain_error", "scattered_chains",
    "ClassicalParityCode", "classical_parity_code", "classical_robustness_check", "ClassicalCheckReport",
    "random_css_instance", "as_projector_clh", "unit_eigenprojector", "chain_weight_formula", "ZooError",
]
