"""Generalized Pauli group on n qudits of dimension d.

A Pauli word is stored by its symplectic exponents: ``x_exps[q]`` is the
power of the shift ``X_d`` and ``z_exps[q]`` the power of the clock ``P_d``
on qudit ``q``. The scalar factor is ``omega_{2d} ** phase_exp`` with
``omega_{2d} = exp(i*pi/d)``, so that for d=2 the factor ``i`` of ``Y = iXZ``
is representable.

Per-qudit operator order is ``X^x P^z`` and ``P X = omega_d X P``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MATRIX_CAP = 2**14


class PauliError(ValueError):
    pass


@dataclass(frozen=True)
class QuditSystem:
    n: int
    d: int

    def __post_init__(self):
        if self.n < 1:
            raise PauliError(f"need at least one qudit, got n={self.n}")
        if self.d < 2:
            raise PauliError(f"local dimension must be >= 2, got d={self.d}")


@dataclass(frozen=True)
class PauliOp:
    system: QuditSystem
    x_exps: tuple[int, ...]
    z_exps: tuple[int, ...]
    phase_exp: int = 0

    def __post_init__(self):
        n, d = self.system.n, self.system.d
        if len(self.x_exps) != n or len(self.z_exps) != n:
            raise PauliError(f"exponent vectors must have length {n}")
        object.__setattr__(self, "x_exps", tuple(int(a) % d for a in self.x_exps))
        object.__setattr__(self, "z_exps", tuple(int(b) % d for b in self.z_exps))
        object.__setattr__(self, "phase_exp", int(self.phase_exp) % (2 * d))

    @property
    def n(self) -> int:
        return self.system.n

    @property
    def d(self) -> int:
        return self.system.d

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q in range(self.n) if self.x_exps[q] or self.z_exps[q])

    def symplectic(self) -> np.ndarray:
        """Exponent vector ``[x | z]`` of length 2n (phase dropped)."""
        return np.array(self.x_exps + self.z_exps, dtype=np.int64)

    def __mul__(self, other: "PauliOp") -> "PauliOp":
        return multiply(self, other)

    def __str__(self) -> str:
        return format_pauli(self)


def identity(system: QuditSystem) -> PauliOp:
    return PauliOp(system, (0,) * system.n, (0,) * system.n, 0)


def single(system: QuditSystem, q: int, x: int = 0, z: int = 0, phase_exp: int = 0) -> PauliOp:
    """Pauli acting as ``X^x P^z`` on qudit ``q`` and identity elsewhere."""
    if not 0 <= q < system.n:
        raise PauliError(f"qudit index {q} out of range for n={system.n}")
    xs = [0] * system.n
    zs = [0] * system.n
    xs[q], zs[q] = x, z
    return PauliOp(system, tuple(xs), tuple(zs), phase_exp)


def from_terms(system: QuditSystem, terms: Iterable[tuple[int, int, int]], phase_exp: int = 0) -> PauliOp:
    """Build a Pauli from ``(q, x, z)`` triples; repeated qudits multiply in order."""
    op = identity(system)
    for q, x, z in terms:
        op = multiply(op, single(system, q, x, z))
    return PauliOp(system, op.x_exps, op.z_exps, op.phase_exp + phase_exp)


def from_symplectic(system: QuditSystem, vec: Sequence[int], phase_exp: int = 0) -> PauliOp:
    n = system.n
    vec = [int(v) for v in vec]
    return PauliOp(system, tuple(vec[:n]), tuple(vec[n:]), phase_exp)


def _check_same(a: PauliOp, b: PauliOp) -> None:
    if a.system != b.system:
        raise PauliError(f"system mismatch: {a.system} vs {b.system}")


def multiply(a: PauliOp, b: PauliOp) -> PauliOp:
    _check_same(a, b)
    # (X^a P^b)(X^c P^e) = omega_d^{b c} X^{a+c} P^{b+e};  omega_d = omega_{2d}^2
    cross = sum(za * xb for za, xb in zip(a.z_exps, b.x_exps))
    xs = tuple(p + q for p, q in zip(a.x_exps, b.x_exps))
    zs = tuple(p + q for p, q in zip(a.z_exps, b.z_exps))
    return PauliOp(a.system, xs, zs, a.phase_exp + b.phase_exp + 2 * cross)


def inverse(a: PauliOp) -> PauliOp:
    # (X^x P^z)^{-1} = P^{-z} X^{-x} = omega_d^{xz} X^{-x} P^{-z}
    xz = sum(x * z for x, z in zip(a.x_exps, a.z_exps))
    return PauliOp(
        a.system,
        tuple(-x for x in a.x_exps),
        tuple(-z for z in a.z_exps),
        -a.phase_exp + 2 * xz,
    )


def symplectic_product(a: PauliOp, b: PauliOp) -> int:
    """``sum_q x_a z_b - z_a x_b`` mod d; zero iff the two words commute."""
    _check_same(a, b)
    d = a.d
    s = sum(xa * zb - za * xb for xa, za, xb, zb in zip(a.x_exps, a.z_exps, b.x_exps, b.z_exps))
    return s % d


def commutes(a: PauliOp, b: PauliOp) -> bool:
    return symplectic_product(a, b) == 0


def weight(a: PauliOp) -> int:
    return sum(1 for x, z in zip(a.x_exps, a.z_exps) if x or z)


def restrict(a: PauliOp, q: int) -> PauliOp:
    """Component of ``a`` on qudit ``q`` as a one-qudit Pauli (phase 0)."""
    if not 0 <= q < a.n:
        raise PauliError(f"qudit index {q} out of range for n={a.n}")
    return PauliOp(QuditSystem(1, a.d), (a.x_exps[q],), (a.z_exps[q],), 0)


def restrict_complement(a: PauliOp, q: int) -> PauliOp:
    """``a`` with qudit ``q`` dropped; keeps the original phase."""
    if not 0 <= q < a.n:
        raise PauliError(f"qudit index {q} out of range for n={a.n}")
    if a.n == 1:
        raise PauliError("cannot drop the only qudit")
    xs = a.x_exps[:q] + a.x_exps[q + 1:]
    zs = a.z_exps[:q] + a.z_exps[q + 1:]
    return PauliOp(QuditSystem(a.n - 1, a.d), xs, zs, a.phase_exp)


def combine_at(site: PauliOp, rest: PauliOp, q: int) -> PauliOp:
    """Inverse of (restrict, restrict_complement): reinsert ``site`` at position ``q``."""
    if site.n != 1 or site.d != rest.d:
        raise PauliError("site must be a one-qudit Pauli of matching dimension")
    xs = rest.x_exps[:q] + site.x_exps + rest.x_exps[q:]
    zs = rest.z_exps[:q] + site.z_exps + rest.z_exps[q:]
    return PauliOp(QuditSystem(rest.n + 1, rest.d), xs, zs, rest.phase_exp + site.phase_exp)


def shift_matrix(d: int) -> np.ndarray:
    """``X_d |i> = |i+1 mod d>``."""
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def clock_matrix(d: int) -> np.ndarray:
    """``P_d |j> = omega_d^j |j>``."""
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def site_matrix(d: int, x: int, z: int) -> np.ndarray:
    return np.linalg.matrix_power(shift_matrix(d), x % d) @ np.linalg.matrix_power(clock_matrix(d), z % d)


def to_matrix(a: PauliOp, cap: int = MATRIX_CAP) -> np.ndarray:
    dim = a.d**a.n
    if dim > cap:
        raise PauliError(f"matrix of dimension {dim} exceeds cap {cap}")
    out = np.array([[1.0 + 0j]])
    for x, z in zip(a.x_exps, a.z_exps):
        out = np.kron(out, site_matrix(a.d, x, z))
    return np.exp(1j * np.pi * a.phase_exp / a.d) * out


def format_pauli(a: PauliOp) -> str:
    """Text form: ``q:<i>,x:<a>,z:<b>`` tokens for non-identity qudits, then ``phase:<p>``."""
    toks = [f"q:{q},x:{a.x_exps[q]},z:{a.z_exps[q]}" for q in a.support]
    if a.phase_exp:
        toks.append(f"phase:{a.phase_exp}")
    return " ".join(toks) if toks else "I"


def parse_pauli(text: str, system: QuditSystem) -> PauliOp:
    text = text.strip()
    if text in ("", "I"):
        return identity(system)
    xs = [0] * system.n
    zs = [0] * system.n
    phase = 0
    for tok in text.split():
        if tok.startswith("phase:"):
            phase = int(tok[len("phase:"):])
            continue
        try:
            fields = dict(part.split(":", 1) for part in tok.split(","))
            q, x, z = int(fields["q"]), int(fields.get("x", 0)), int(fields.get("z", 0))
        except (KeyError, ValueError) as exc:
            raise PauliError(f"bad Pauli token {tok!r}") from exc
        if not 0 <= q < system.n:
            raise PauliError(f"qudit index {q} out of range in token {tok!r}")
        xs[q], zs[q] = x, z
    return PauliOp(system, tuple(xs), tuple(zs), phase)
