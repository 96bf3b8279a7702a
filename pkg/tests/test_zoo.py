from fractions import Fraction

import numpy as np
import pytest

from ssexpand.graphs import BipartiteGraph, expansion_error, random_bipartite_graph
from ssexpand.pauli import QuditSystem, from_terms, to_matrix
from ssexpand.robustness import measure
from ssexpand.stabilizer import distance
from ssexpand.zoo import (
    ZooError, as_projector_clh, chain_error, chain_weight_formula, classical_parity_code,
    classical_robustness_check, random_css_instance, scattered_chains, staircase_path, toric_code,
    unit_eigenprojector,
)


@pytest.mark.parametrize("L,n,m", [(2, 8, 6), (3, 18, 16), (4, 32, 30), (5, 50, 48)])
def test_toric_sizes(L, n, m):
    t = toric_code(L)
    assert (t.code.n, t.code.m, t.code.k, t.code.D_R) == (n, m, 4, 4)
    assert len(t.full_checks) == 2 * L * L


def test_toric_rejects_small():
    with pytest.raises(ZooError):
        toric_code(1)


def test_staircase_and_chain(toric5):
    path = staircase_path(5, (0, 0), 3)
    assert path == [(0, 0), (0, 1), (1, 1), (1, 2)]
    E = chain_error(toric5, path)
    m = measure(toric5.code, E)
    assert (m.nominal_weight, m.coset_weight, m.penalty) == (3, 3, 2)
    assert m.robustness == chain_weight_formula(3) == Fraction(1, 6)
    with pytest.raises(ZooError):
        chain_error(toric5, [(0, 0), (2, 2)])
    with pytest.raises(ZooError):
        chain_error(toric5, [(0, 0)])


def test_scattered_chains():
    t = toric_code(7)
    E, chains = scattered_chains(t, 2, 3, 2)
    m = measure(t.code, E)
    assert len(chains) == 2
    assert (m.penalty, m.coset_weight, m.robustness) == (4, 4, Fraction(1, 4))
    with pytest.raises(ZooError):
        scattered_chains(toric_code(3), 2, 3, 5)


def test_classical_parity_code():
    G = BipartiteGraph(2, 3, ((0, 1), (1, 2)))
    code = classical_parity_code(G)
    assert code.violations([1]) == [0, 1]
    assert code.violations([0, 1, 2]) == []
    with pytest.raises(ZooError):
        classical_parity_code(BipartiteGraph(1, 2, ((),)))


def test_classical_check_matches_bruteforce():
    G = random_bipartite_graph(18, 24, 4, 5)
    rep = classical_robustness_check(classical_parity_code(G), 3)
    assert rep.eps == expansion_error(G, 3).eps
    assert rep.ok and rep.sets_checked == 24 + 276 + 2024


def test_random_css_instance():
    code = random_css_instance(9, 4, 4, 0, 4, 4, min_distance=3)
    assert code.n == 9 and code.k <= 4 and code.D_R <= 4
    assert distance(code, 3).distance == 3
    again = random_css_instance(9, 4, 4, 0, 4, 4, min_distance=3)
    assert again == code
    with pytest.raises(ZooError):
        random_css_instance(3, 4, 4, 0)


def test_unit_eigenprojector():
    s = QuditSystem(1, 3)
    U = to_matrix(from_terms(s, [(0, 1, 0)]))
    P = unit_eigenprojector(U)
    assert np.allclose(P @ P, P) and np.isclose(np.trace(P).real, 1)
    assert np.allclose(U @ P, P)


def test_projector_clh_ground_energy_zero(toric3):
    from ssexpand.clh import validate_clh
    inst = as_projector_clh(toric_code(2).code)
    assert validate_clh(inst).ok
    assert len(inst.terms) == 6
