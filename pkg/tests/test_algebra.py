import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssexpand.algebra import (
    DecompositionError, algebra_basis, center_basis, reconstruction_residual, structure_decomposition,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def dims(dec):
    return sorted((b.d_left, b.d_right) for b in dec.blocks)


def test_single_generator_full_left():
    dec = structure_decomposition([X], [], 2)
    assert dims(dec) == [(2, 1)]


def test_commutative_pair_splits():
    dec = structure_decomposition([Z], [Z], 2)
    assert dims(dec) == [(1, 1), (1, 1)]
    assert reconstruction_residual(dec, [Z], [Z]) < 1e-8


def test_two_qubit_tensor_split():
    # spec example: qudit of dimension 4 = qubit (x) qubit, left acts on the first, right on the second
    left = [np.kron(X, I2), np.kron(Z, I2)]
    right = [np.kron(I2, X), np.kron(I2, Z)]
    dec = structure_decomposition(left, right, 4)
    assert dims(dec) == [(2, 2)]
    assert reconstruction_residual(dec, left, right) < 1e-8


def test_commutative_right_algebra_gives_two_blocks():
    left = [np.kron(X, I2)]
    right = [np.kron(I2, Z + 0.3 * X)]
    assert len(structure_decomposition(left, right, 4).blocks) == 2


def test_noncommuting_rejected():
    with pytest.raises(DecompositionError):
        structure_decomposition([X], [Z], 2)


def test_algebra_and_center():
    basis = algebra_basis([Z], 2)
    assert len(basis) == 2  # span{I, Z}
    assert len(center_basis(basis)) == 2
    assert len(center_basis(algebra_basis([X, Z], 2))) == 1


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def direct_sum(mats):
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for m in mats:
        k = m.shape[0]
        out[i:i + k, i:i + k] = m
        i += k
    return out


def rand_mat(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 3), st.integers(1, 3)), min_size=1, max_size=3), st.integers(0, 2**32 - 1))
def test_recovers_hidden_block_structure(structure, seed):
    rng = np.random.default_rng(seed)
    D = sum(a * b for a, b in structure)
    U = random_unitary(rng, D)
    left = [U @ direct_sum([np.kron(rand_mat(rng, a), np.eye(b)) for a, b in structure]) @ U.conj().T
            for _ in range(2)]
    right = [U @ direct_sum([np.kron(np.eye(a), rand_mat(rng, b)) for a, b in structure]) @ U.conj().T
             for _ in range(2)]
    dec = structure_decomposition(left, right, D, rng=np.random.default_rng(seed + 1))
    assert dims(dec) == sorted(structure)
    assert reconstruction_residual(dec, left, right) < 1e-8
    for b in dec.blocks:
        assert np.allclose(b.isometry.conj().T @ b.isometry, np.eye(b.dim), atol=1e-8)


def test_center_with_generators_matches_full_basis():
    rng = np.random.default_rng(3)
    U = random_unitary(rng, 6)
    gens = [U @ direct_sum([np.kron(rand_mat(rng, 1), np.eye(2)), np.kron(np.eye(2), rand_mat(rng, 2))]) @ U.conj().T]
    basis = algebra_basis(gens, 6)
    assert len(center_basis(basis)) == len(center_basis(basis, gens=gens + [g.conj().T for g in gens])) == 2


def test_large_block_structure_stays_small():
    # D = 27 previously built a (dim^4 x dim^2) commutator system for the centre
    import resource
    rng = np.random.default_rng(11)
    structure = [(3, 3)] * 3
    U = random_unitary(rng, 27)
    right = [U @ direct_sum([np.kron(np.eye(a), rand_mat(rng, b)) for a, b in structure]) @ U.conj().T
             for _ in range(2)]
    left = [U @ direct_sum([np.kron(rand_mat(rng, a), np.eye(b)) for a, b in structure]) @ U.conj().T
            for _ in range(2)]
    before = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    dec = structure_decomposition(left, right, 27, rng=np.random.default_rng(1))
    assert dims(dec) == sorted(structure)
    assert resource.getrusage(resource.RUSAGE_SELF).ru_maxrss - before < 500_000  # KiB
