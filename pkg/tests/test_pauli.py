import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssexpand.pauli import (
    PauliError, PauliOp, QuditSystem, combine_at, commutes, format_pauli, from_terms, identity, inverse,
    multiply, parse_pauli, restrict, restrict_complement, single, symplectic_product, to_matrix, weight,
)


@st.composite
def paulis(draw, n=None, d=None):
    d = draw(st.sampled_from([2, 3, 5])) if d is None else d
    n = draw(st.integers(1, 3)) if n is None else n
    sys = QuditSystem(n, d)
    xs = draw(st.lists(st.integers(0, d - 1), min_size=n, max_size=n))
    zs = draw(st.lists(st.integers(0, d - 1), min_size=n, max_size=n))
    ph = draw(st.integers(0, 2 * d - 1))
    return PauliOp(sys, tuple(xs), tuple(zs), ph)


@st.composite
def pauli_pairs(draw):
    d = draw(st.sampled_from([2, 3, 5]))
    n = draw(st.integers(1, 3))
    return draw(paulis(n, d)), draw(paulis(n, d))


def test_spec_example_qubit_anticommute():
    s = QuditSystem(1, 2)
    X, Z = single(s, 0, x=1), single(s, 0, z=1)
    assert not commutes(X, Z)
    assert symplectic_product(X, Z) == 1
    XZ = multiply(X, Z)
    assert np.allclose(to_matrix(XZ), to_matrix(X) @ to_matrix(Z))


def test_two_qubit_xx_zz_commute():
    s = QuditSystem(2, 2)
    XX = from_terms(s, [(0, 1, 0), (1, 1, 0)])
    ZZ = from_terms(s, [(0, 0, 1), (1, 0, 1)])
    assert commutes(XX, ZZ)
    assert weight(XX) == 2


def test_qutrit_commutation_phase():
    s = QuditSystem(1, 3)
    X, P = single(s, 0, x=1), single(s, 0, z=1)
    # P X = omega X P
    lhs = to_matrix(multiply(P, X))
    rhs = np.exp(2j * np.pi / 3) * to_matrix(multiply(X, P))
    assert np.allclose(lhs, rhs)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_exhaustive_single_qudit_oracle(d):
    s = QuditSystem(1, d)
    ops = [PauliOp(s, (x,), (z,), ph) for x in range(d) for z in range(d) for ph in (0, 1)]
    mats = {op: to_matrix(op) for op in ops}
    for a, b in itertools.product(ops, repeat=2):
        A, B = mats[a], mats[b]
        assert np.allclose(mats.get(multiply(a, b), to_matrix(multiply(a, b))), A @ B)
        assert commutes(a, b) == np.allclose(A @ B, B @ A)


@settings(max_examples=300, deadline=None)
@given(pauli_pairs())
def test_multiply_matches_dense(pair):
    a, b = pair
    assert np.allclose(to_matrix(a * b), to_matrix(a) @ to_matrix(b))


@settings(max_examples=300, deadline=None)
@given(pauli_pairs())
def test_commutes_matches_dense(pair):
    a, b = pair
    A, B = to_matrix(a), to_matrix(b)
    assert commutes(a, b) == np.allclose(A @ B, B @ A)
    assert commutes(a, b) == commutes(b, a)


@settings(max_examples=200, deadline=None)
@given(paulis())
def test_inverse(a):
    e = identity(a.system)
    assert multiply(a, inverse(a)) == e
    assert multiply(inverse(a), a) == e


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_associativity(data):
    d = data.draw(st.sampled_from([2, 3, 5]))
    n = data.draw(st.integers(1, 3))
    a, b, c = (data.draw(paulis(n, d)) for _ in range(3))
    assert (a * b) * c == a * (b * c)


@settings(max_examples=200, deadline=None)
@given(paulis())
def test_format_parse_roundtrip(a):
    assert parse_pauli(format_pauli(a), a.system) == a


@settings(max_examples=100, deadline=None)
@given(paulis(n=3))
def test_restrict_combine_roundtrip(a):
    for q in range(a.n):
        assert combine_at(restrict(a, q), restrict_complement(a, q), q) == a


def test_errors():
    with pytest.raises(PauliError):
        QuditSystem(0, 2)
    with pytest.raises(PauliError):
        QuditSystem(1, 1)
    with pytest.raises(PauliError):
        multiply(identity(QuditSystem(1, 2)), identity(QuditSystem(1, 3)))
    with pytest.raises(PauliError):
        parse_pauli("q:5,x:1", QuditSystem(2, 2))
    with pytest.raises(PauliError):
        single(QuditSystem(2, 2), 3, x=1)
    with pytest.raises(PauliError):
        PauliOp(QuditSystem(2, 2), (0,), (0, 0))


def test_exponents_are_reduced():
    a = PauliOp(QuditSystem(1, 3), (4,), (-1,), 7)
    assert a.x_exps == (1,) and a.z_exps == (2,) and a.phase_exp == 1
