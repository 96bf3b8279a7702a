"""Robustness measurements: the Thm QECC and Fact alphabet error constructions,
Lemma indexp Monte Carlo, the onion fact, y(k), and exhaustive robustness profiles."""
from __future__ import annotations

import csv
import io
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graphs import BipartiteGraph, from_code, gamma_t, is_L_independent, is_t_independent, set_eps
from .modp import SpanTester
from .pauli import PauliOp, from_symplectic, from_terms, restrict, site_matrix, weight
from .stabilizer import (DEFAULT_ENUM_BUDGET, DEFAULT_WEIGHT_CAP, BudgetExceeded, CapExceeded, StabilizerCode,
                         _class_size, coset_search, distance, is_succinct, iter_weight_class, syndrome)


class RobustnessError(ValueError):
    pass


def t(d: int) -> Fraction:
    if d < 2:
        raise RobustnessError("d must be >= 2")
    return Fraction(1, d * d - 1)


def alpha(d: int) -> Fraction:
    return 1 - t(d)


def penalty(code: StabilizerCode, E: PauliOp) -> int:
    return len(syndrome(code, E))


@dataclass(frozen=True)
class RobustnessMeasurement:
    error: PauliOp
    nominal_weight: int
    coset_weight: int | None  # centralizer mode; None when it exceeds the cap
    penalty: int
    D_R: int

    @property
    def robustness(self) -> Fraction | None:
        if not self.coset_weight:
            return None
        return Fraction(self.penalty, self.D_R * self.coset_weight)

    def as_dict(self) -> dict:
        r = self.robustness
        return {
            "error": str(self.error),
            "nominal_weight": self.nominal_weight,
            "coset_weight": self.coset_weight,
            "penalty": self.penalty,
            "D_R": self.D_R,
            "robustness": None if r is None else str(r),
            "robustness_float": None if r is None else float(r),
        }


def measure(code: StabilizerCode, E: PauliOp, weight_cap: int = DEFAULT_WEIGHT_CAP) -> RobustnessMeasurement:
    try:
        cw = coset_search(code, E, "centralizer", weight_cap).weight
    except CapExceeded:
        cw = None
    return RobustnessMeasurement(E, weight(E), cw, penalty(code, E), code.D_R)


def _require_U(code: StabilizerCode, U: Sequence[int]) -> tuple[int, ...]:
    U = tuple(int(u) for u in U)
    if not U:
        raise RobustnessError("U is empty: the resulting identity is not an error")
    if len(set(U)) != len(U) or not all(0 <= u < code.m for u in U):
        raise RobustnessError(f"U must be distinct generator indices, got {U}")
    return U


# ---------------------------------------------------------------------------
# Thm QECC

def _alpha_counts(G: BipartiteGraph, u: int) -> dict[int, int]:
    """For each qudit i of Gamma(u): constraints on i with >= 2 qudits in Gamma(u) (u included)."""
    region = set(G.adjacency[u])
    out = {}
    for i in G.adjacency[u]:
        out[i] = sum(1 for l in G.right_adjacency[i] if len(region.intersection(G.adjacency[l])) >= 2)
    return out


def q_of_u(G: BipartiteGraph, u: int) -> int:
    counts = _alpha_counts(G, u)
    return min(counts, key=lambda i: (counts[i], i))


@dataclass(frozen=True)
class ConstructionResult:
    construction: str
    U: tuple[int, ...]
    qudits: tuple[int, ...]
    measurement: RobustnessMeasurement
    eps: Fraction  # expansion error of Gamma(U)
    per_u_eps: tuple[Fraction, ...]
    bound: float
    delta_condition: bool  # |U|/n <= 1/(k^3 D_R)
    distance: int | None
    assertions: dict

    @property
    def ok(self) -> bool:
        return all(v for v in self.assertions.values() if v is not None)

    def as_dict(self) -> dict:
        return {
            "construction": self.construction,
            "U": list(self.U),
            "qudits": list(self.qudits),
            "measurement": self.measurement.as_dict(),
            "eps": str(self.eps),
            "eps_float": float(self.eps),
            "per_u_eps": [str(e) for e in self.per_u_eps],
            "bound": self.bound,
            "delta_condition": self.delta_condition,
            "distance": self.distance,
            "assertions": self.assertions,
            "ok": self.ok,
        }


def _distance_known(code: StabilizerCode, dist: int | None, cap: int) -> int | None:
    if dist is not None:
        return dist
    return distance(code, cap).distance


def expander_adversarial_error(code: StabilizerCode, U: Sequence[int], dist: int | None = None,
                               weight_cap: int = DEFAULT_WEIGHT_CAP) -> ConstructionResult:
    """E = tensor over u in U of u restricted to q(u) (Thm QECC)."""
    U = _require_U(code, U)
    G = from_code(code)
    if not is_L_independent(G, U):
        raise RobustnessError(f"U={list(U)} is not L-independent")
    qs = tuple(q_of_u(G, u) for u in U)
    terms = []
    for u, q in zip(U, qs):
        r = restrict(code.generators[u], q)
        terms.append((q, r.x_exps[0], r.z_exps[0]))
    E = from_terms(code.system, terms)
    meas = measure(code, E, weight_cap)
    S = sorted(G.gamma_left(U))
    eps = set_eps(G, S)
    per_u = tuple(set_eps(G, G.adjacency[u]) for u in U)
    dist = _distance_known(code, dist, weight_cap)
    delta_ok = Fraction(len(U), code.n) <= Fraction(1, code.k ** 3 * code.D_R)
    bound = float(2 * eps * code.D_R * len(U))
    weight_checked = dist is not None and (2 * len(U) < dist or (len(U) == 1 and dist >= 2))
    assertions = {
        "coset_weight_eq_U": (meas.coset_weight == len(U)) if weight_checked else None,
        "penalty_le_2eps_DR_U": (meas.penalty <= 2 * eps * code.D_R * len(U)) if eps < Fraction(1, 2) else None,
    }
    return ConstructionResult("expander", U, qs, meas, eps, per_u, bound, delta_ok, dist, assertions)


def majority_restriction(code: StabilizerCode, q: int) -> tuple[int, int]:
    """Most frequent (x, z) among incident generators' restrictions to q; ties to the lowest pair."""
    cnt = Counter()
    for i in code.incident[q]:
        r = restrict(code.generators[i], q)
        cnt[(r.x_exps[0], r.z_exps[0])] += 1
    best = max(cnt.values())
    return min(p for p, c in cnt.items() if c == best)


def alphabet_error(code: StabilizerCode, U: Sequence[int], dist: int | None = None,
                   weight_cap: int = DEFAULT_WEIGHT_CAP) -> ConstructionResult:
    """Per u: its lowest-index qudit carries the majority restriction (Fact alphabet)."""
    U = _require_U(code, U)
    G = from_code(code)
    if not is_L_independent(G, U):
        raise RobustnessError(f"U={list(U)} is not L-independent")
    qs = tuple(min(G.adjacency[u]) for u in U)
    E = from_terms(code.system, [(q, *majority_restriction(code, q)) for q in qs])
    meas = measure(code, E, weight_cap)
    S = sorted(G.gamma_left(U))
    eps = set_eps(G, S)
    per_u = tuple(set_eps(G, G.adjacency[u]) for u in U)
    a = alpha(code.d)
    dist = _distance_known(code, dist, weight_cap)
    delta_ok = Fraction(len(U), code.n) <= Fraction(1, code.k ** 3 * code.D_R)
    assertions = {"penalty_le_alpha_DR_U": meas.penalty <= a * code.D_R * len(U)}
    return ConstructionResult("alphabet", U, qs, meas, eps, per_u, float(a * code.D_R * len(U)), delta_ok, dist,
                              assertions)


# ---------------------------------------------------------------------------
# Lemma indexp

@dataclass(frozen=True)
class RandomErrorProcess:
    support: tuple[int, ...]
    p: float
    d: int
    seed: int

    @property
    def t(self) -> Fraction:
        return t(self.d)

    @classmethod
    def for_code(cls, code: StabilizerCode, support: Sequence[int], seed: int, k: int | None = None):
        k = code.k if k is None else k
        return cls(tuple(sorted(support)), 1.0 / (10 * k), code.d, seed)


def sample_exponents(proc: RandomErrorProcess, n: int, trial: int) -> np.ndarray:
    """Symplectic vector of one draw; trial streams are SeedSequence(seed, spawn_key=(trial,))."""
    rng = np.random.default_rng(np.random.SeedSequence(proc.seed, spawn_key=(trial,)))
    S = np.array(proc.support, dtype=np.int64)
    hit = rng.random(len(S)) < proc.p
    kinds = rng.integers(1, proc.d * proc.d, size=len(S))
    vec = np.zeros(2 * n, dtype=np.int64)
    if len(S):
        vec[S[hit]] = kinds[hit] // proc.d
        vec[n + S[hit]] = kinds[hit] % proc.d
    return vec


def sample_random_error(proc: RandomErrorProcess, system, trial: int = 0) -> PauliOp:
    return from_symplectic(system, sample_exponents(proc, system.n, trial))


def expected_penalty_bounds(S_size: int, D_R: int, p: float, alpha_: float, eps: float, k: int) -> tuple[float, float, float]:
    """(raw p|S|D_R alpha, corrected raw(1 - p alpha eps), final raw(1 - 0.02/k))."""
    raw = p * S_size * D_R * float(alpha_)
    return raw, raw * (1 - p * float(alpha_) * float(eps)), raw * (1 - 0.02 / k)


def y_of_k(k: int, log_base: float = 2.0) -> float:
    """Fact weight's y(k); the paper's log is read as log base 2 (configurable)."""
    if k < 4:
        raise RobustnessError("y(k) is defined for k >= 4")
    if k == 4:
        return 0.9985
    if k == 5:
        return 0.9992
    if k <= 11:
        return 0.9999
    kh = k // 2 + 1
    return 1.0 - 2.0 ** ((-kh + 1) * math.log(k, log_base) + k - 2.3 * kh + 4.54)


def hoeffding_half_width(value_range: float, trials: int, confidence: float = 0.95) -> float:
    if trials <= 0:
        return float("inf")
    return value_range * math.sqrt(math.log(2 / (1 - confidence)) / (2 * trials))


def local_dense_commutes(code: StabilizerCode, g: int, E: PauliOp) -> bool:
    """Matrix oracle: does E commute with generator g, checked on g's support only?"""
    supp = code.supports[g]
    d = code.d
    A = np.array([[1.0 + 0j]])
    B = np.array([[1.0 + 0j]])
    gen = code.generators[g]
    for q in supp:
        A = np.kron(A, site_matrix(d, gen.x_exps[q], gen.z_exps[q]))
        B = np.kron(B, site_matrix(d, E.x_exps[q], E.z_exps[q]))
    return bool(np.max(np.abs(A @ B - B @ A)) < 1e-9)


@dataclass(frozen=True)
class IndexpReport:
    U: tuple[int, ...]
    independence_level: int
    S_size: int
    gamma_S_size: int
    eps: Fraction
    p: float
    trials: int
    seed: int
    mean_penalty: float
    half_width: float
    raw_bound: float
    corrected_bound: float
    final_bound: float
    y: float
    weight_threshold: float
    coset_weights: dict  # weight -> count (computable samples)
    infeasible: int
    frac_weight_ge_threshold: float | None
    frac_weight_lt_threshold: float | None
    delta: float
    mean_delta_prime: float | None
    delta_window_flag: bool | None
    oracle_checked: int
    oracle_mismatches: int
    assertions: dict

    @property
    def ok(self) -> bool:
        return all(v for v in self.assertions.values() if v is not None)

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["U"] = list(self.U)
        out["eps"] = str(self.eps)
        out["eps_float"] = float(self.eps)
        out["coset_weights"] = {str(k): v for k, v in sorted(self.coset_weights.items())}
        out["ok"] = self.ok
        return out


def monte_carlo_indexp(code: StabilizerCode, U: Sequence[int], trials: int = 10_000, seed: int = 0,
                       weight_cap: int = DEFAULT_WEIGHT_CAP, independence_level: int | None = None,
                       confidence: float = 0.95, oracle_samples: int = 200, workers: int = 1) -> IndexpReport:
    """Sample errors on S = Gamma(U) and compare with Facts penalty and weight."""
    G = from_code(code)
    k = code.k
    level = k if independence_level is None else independence_level
    U = tuple(int(u) for u in U)
    if U and not is_t_independent(G, U, level):
        raise RobustnessError(f"U={list(U)} is not {level}-independent (Gamma^({level}) balls intersect)")
    S = sorted(G.gamma_left(U))
    eps = set_eps(G, S) if S else Fraction(0)
    gamma_S = len(G.gamma(S))
    proc = RandomErrorProcess.for_code(code, S, seed, k)
    a = alpha(code.d)
    raw, corr, fin = expected_penalty_bounds(len(S), code.D_R, proc.p, float(a), float(eps), k)
    y = y_of_k(max(k, 4))
    threshold = len(S) * proc.p * y

    cache: dict[bytes, tuple[int, int | None]] = {}

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            vecs = list(ex.map(lambda tr: sample_exponents(proc, code.n, tr), range(trials)))
    else:
        vecs = [sample_exponents(proc, code.n, tr) for tr in range(trials)]
    penalties = np.zeros(trials, dtype=np.int64)
    weights: list[int | None] = []
    for tr, vec in enumerate(vecs):
        key = vec.tobytes()
        if key not in cache:
            E = from_symplectic(code.system, vec)
            pen = penalty(code, E)
            try:
                cw = coset_search(code, E, "centralizer", weight_cap).weight
            except CapExceeded:
                cw = None
            cache[key] = (pen, cw)
        pen, cw = cache[key]
        penalties[tr] = pen
        weights.append(cw)
    checked = mism = 0
    for tr in range(min(oracle_samples, trials)):
        E = from_symplectic(code.system, vecs[tr])
        dense = sum(1 for g in range(code.m) if (set(code.supports[g]) & set(E.support)) and not local_dense_commutes(code, g, E))
        checked += 1
        mism += int(dense != penalties[tr])
    mean = float(penalties.mean()) if trials else 0.0
    hw = hoeffding_half_width(gamma_S, trials, confidence) if gamma_S else 0.0
    feasible = [w for w in weights if w is not None]
    hist = dict(sorted(Counter(feasible).items()))
    frac_ge = (sum(1 for w in feasible if w >= threshold) / len(feasible)) if feasible else None
    delta = len(U) / code.n
    mean_dp = (float(np.mean(feasible)) / code.n) if feasible else None
    window = (0.099 * delta < mean_dp < 0.101 * delta) if (mean_dp is not None and delta > 0) else None
    assertions = {
        "mean_minus_ci_le_corrected": mean - hw <= corr + 1e-12,
        "mean_le_corrected_plus_3ci": mean <= corr + 3 * hw + 1e-12,
        "mean_minus_ci_le_final_when_eps_ge_0.32": (mean - hw <= fin + 1e-12) if float(eps) >= 0.32 else None,
        "weight_ge_threshold_in_99pct": (frac_ge >= 0.99) if frac_ge is not None else None,
        "dense_oracle_agrees": mism == 0,
    }
    return IndexpReport(U, level, len(S), gamma_S, eps, proc.p, trials, seed, mean, hw, raw, corr, fin, y,
                        threshold, hist, sum(1 for w in weights if w is None), frac_ge,
                        None if frac_ge is None else 1 - frac_ge, delta, mean_dp, window, checked, mism, assertions)


# ---------------------------------------------------------------------------
# onion fact

_HYP_CACHE: dict = {}


def onion_hypotheses(code: StabilizerCode) -> dict:
    key = (code.system, code.generators)
    if key not in _HYP_CACHE:
        dres = distance(code, max(code.k - 1, 1))
        _HYP_CACHE[key] = {"distance_ge_k": dres.distance is None or dres.distance >= code.k,
                           "succinct": is_succinct(code)}
    return _HYP_CACHE[key]


@dataclass(frozen=True)
class OnionResult:
    u: int
    i: int
    min_weight: int
    bound: int
    region_size: int
    hypotheses: dict

    @property
    def ok(self) -> bool:
        return self.min_weight >= self.bound

    def as_dict(self) -> dict:
        return {"u": self.u, "i": self.i, "min_weight": self.min_weight, "bound": self.bound,
                "region_size": self.region_size, "hypotheses": self.hypotheses, "ok": self.ok}


def onion_min_restricted_weight(code: StabilizerCode, u: int, E: PauliOp, weight_cap: int = DEFAULT_WEIGHT_CAP,
                                check_hypotheses: bool = True, budget: int = DEFAULT_ENUM_BUDGET) -> OnionResult:
    """min over Delta in A of wt((Delta E)|_R), R = Gamma^(k)(u), by increasing-weight pattern search."""
    G = from_code(code)
    gu = set(G.adjacency[u])
    if not set(E.support) <= gu:
        raise RobustnessError(f"E is supported on {E.support}, outside Gamma(u)={sorted(gu)}")
    hyp = onion_hypotheses(code) if check_hypotheses else {}
    if check_hypotheses and not all(hyp.values()):
        raise RobustnessError(f"onion hypotheses fail: {hyp}")
    n, d = code.n, code.d
    region = sorted(gamma_t(G, u, code.k))
    mask = np.zeros(2 * n, dtype=bool)
    mask[region] = True
    mask[[n + q for q in region]] = True
    GR = code.gen_matrix * mask
    tester = SpanTester(GR, d) if len(GR) else None
    e = E.symplectic() * mask
    i = weight(E)
    bound = min(i, code.k - i)

    def reachable(vecs: np.ndarray) -> np.ndarray:
        diff = (vecs - e) % d
        if tester is None:
            return ~np.any(diff, axis=1)
        return tester.contains(diff)

    best = i  # E itself is a witness
    spent = 0
    for w in range(0, min(i, weight_cap + 1)):
        spent += _class_size(len(region), d, w)
        if spent > budget:
            raise BudgetExceeded(f"onion search beyond weight {w} exceeds budget")
        if any(reachable(vecs).any() for vecs in iter_weight_class(n, d, w, qudits=region)):
            best = w
            break
    return OnionResult(u, i, best, bound, len(region), hyp)


# ---------------------------------------------------------------------------
# exhaustive robustness profile

@dataclass(frozen=True)
class ProfileRow:
    w: int
    min_robustness: Fraction
    min_penalty: int
    syndromes: int  # distinct centralizer cosets of weight w
    witness: PauliOp


@dataclass(frozen=True)
class RobustnessProfile:
    rows: tuple[ProfileRow, ...]
    D_R: int
    weight_cap: int
    checks: str

    def as_dict(self) -> dict:
        return {"D_R": self.D_R, "weight_cap": self.weight_cap, "checks": self.checks,
                "rows": [{"w": r.w, "min_robustness": str(r.min_robustness),
                          "min_robustness_float": float(r.min_robustness), "min_penalty": r.min_penalty,
                          "syndromes": r.syndromes, "witness": str(r.witness)} for r in self.rows]}

    def csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["w", "min_robustness", "min_robustness_float", "min_penalty", "syndromes", "witness"])
        for r in self.rows:
            wr.writerow([r.w, str(r.min_robustness), f"{float(r.min_robustness):.12g}", r.min_penalty, r.syndromes,
                         str(r.witness)])
        return buf.getvalue()


def robustness_profile(code: StabilizerCode, weight_cap: int, checks: Sequence[PauliOp] | None = None,
                       budget: int = DEFAULT_ENUM_BUDGET) -> RobustnessProfile:
    """For each w <= cap: min penalty/(D_R w) over errors whose centralizer coset weight is w.

    The coset weight of E is the first weight at which its syndrome appears.
    Penalties are counted against ``checks`` (default: the generators), which
    may include dependent checks such as the two generators the toric builder
    drops; D_R is then the maximum qudit degree of the check list.
    """
    n, d = code.n, code.d
    if checks is None:
        chk_rows = code.check_matrix
        label = "generators"
    else:
        Gm = np.array([c.symplectic() for c in checks], dtype=np.int64)
        chk_rows = np.concatenate([Gm[:, n:], -Gm[:, :n]], axis=1) % d
        label = f"{len(checks)} supplied checks"
    deg = np.count_nonzero((chk_rows[:, :n] | chk_rows[:, n:]) != 0, axis=0)
    D_R = int(deg.max())
    seen: set[bytes] = {np.zeros(code.m, dtype=np.int64).tobytes()}
    rows = []
    spent = 0
    for w in range(1, weight_cap + 1):
        spent += _class_size(n, d, w)
        if spent > budget:
            raise BudgetExceeded(f"profile enumeration beyond weight {w} exceeds budget")
        best = None
        count = 0
        for vecs in iter_weight_class(n, d, w):
            syn = code.syndrome_vectors(vecs)
            pen = np.count_nonzero((vecs @ chk_rows.T) % d, axis=1)
            for j in np.argsort(pen, kind="stable"):
                key = syn[j].tobytes()
                if key in seen:
                    continue
                seen.add(key)
                count += 1
                if best is None or pen[j] < best[0]:
                    best = (int(pen[j]), vecs[j].copy())
        if best is not None:
            rows.append(ProfileRow(w, Fraction(best[0], D_R * w), best[0], count, from_symplectic(code.system, best[1])))
    return RobustnessProfile(tuple(rows), D_R, weight_cap, label)


__all__ = [
    "alpha", "t", "penalty", "measure", "RobustnessMeasurement", "q_of_u", "expander_adversarial_error",
    "alphabet_error", "majority_restriction", "ConstructionResult", "RandomErrorProcess", "sample_random_error",
    "sample_exponents", "expected_penalty_bounds", "y_of_k", "hoeffding_half_width", "monte_carlo_indexp",
    "IndexpReport", "onion_min_restricted_weight", "onion_hypotheses", "OnionResult", "robustness_profile",
    "RobustnessProfile", "ProfileRow", "RobustnessError", "local_dense_commutes",
]
