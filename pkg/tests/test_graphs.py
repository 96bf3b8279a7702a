import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssexpand.graphs import (
    BipartiteGraph, GraphError, IndependentSetError, best_qudit, check_fact_essence, expansion_error, from_code,
    gamma_t, graph_from_dict, graph_to_dict, greedy_k_independent, greedy_L_independent, indset_bounds,
    is_L_independent, is_t_independent, isolation_penalty, iter_sets_with_eps, multi_neighbor_fraction,
    random_bipartite_graph, scan_expander_facts, set_eps,
)


@st.composite
def graphs(draw):
    n = draw(st.integers(2, 9))
    m = draw(st.integers(1, 8))
    deg = draw(st.integers(1, min(n, 4)))
    seed = draw(st.integers(0, 10**6))
    return random_bipartite_graph(m, n, deg, seed)


def brute_eps(G, k):
    best = Fraction(0)
    for s in range(1, min(k, G.n) + 1):
        for S in itertools.combinations(range(G.n), s):
            best = max(best, 1 - Fraction(len(G.gamma(S)), G.D_R * s))
    return best


def test_tiny_example():
    # two constraints sharing qudit 1
    G = BipartiteGraph(2, 3, ((0, 1), (1, 2)))
    assert (G.k, G.D_R, G.right_regular) == (2, 2, False)
    assert set_eps(G, [0]) == Fraction(1, 2)
    assert set_eps(G, [1]) == 0
    assert expansion_error(G, 2).eps == Fraction(1, 2)
    assert isolation_penalty(G, 0) == (0, ())
    assert multi_neighbor_fraction(G, [0, 1, 2]) == Fraction(1)


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_exact_expansion_matches_bruteforce(G):
    k = min(G.k, 3)
    rep = expansion_error(G, k)
    assert rep.eps == brute_eps(G, k)
    if rep.witness:
        assert set_eps(G, rep.witness) == rep.eps
    sampled = expansion_error(G, k, mode="sampled", trials=200, seed=1)
    assert sampled.eps <= rep.eps


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_facts_hold_and_scan_agrees(G):
    k = min(G.n, 3)
    for S, eps, _ in iter_sets_with_eps(G, k):
        assert check_fact_essence(G, S)
        if eps < Fraction(1, 2):
            assert best_qudit(G, S)[1] <= 2 * eps
    assert scan_expander_facts(G, k).ok


def test_workers_do_not_change_expansion():
    G = random_bipartite_graph(20, 30, 4, 3)
    a = expansion_error(G, 3, workers=1)
    b = expansion_error(G, 3, workers=8)
    assert a == b


def test_toric_expansion(toric3):
    G = from_code(toric3.code)
    rep = expansion_error(G, 2)
    # the qubit on both dropped checks sees only 2 of D_R = 4 generators
    assert rep.eps == Fraction(1, 2) and len(G.right_adjacency[rep.witness[0]]) == 2
    full = BipartiteGraph(len(toric3.full_checks), toric3.code.n, tuple(g.support for g in toric3.full_checks))
    # with all checks: two qubits sharing a plaquette and a star have 8 - 2 = 6 neighbours
    assert full.right_regular and expansion_error(full, 2).eps == Fraction(1, 4)


def test_independent_sets(toric4, toric5):
    G4 = from_code(toric4.code)
    U = greedy_L_independent(G4)
    assert len(U) >= 2 and is_L_independent(G4, U)
    assert U[:2] == (0, 10)
    with pytest.raises(IndependentSetError):
        greedy_L_independent(G4, target=G4.m)
    G5 = from_code(toric5.code)
    rep = greedy_k_independent(G5, 4)
    assert rep.chosen == (0,)  # Gamma^(4) of one plaquette already covers the 5x5 torus
    with pytest.raises(IndependentSetError):
        greedy_k_independent(G5, 4, target=2)
    proof, eta = indset_bounds(4, 4)
    assert proof == 4.0 ** -16 and eta == 4.0 ** -9 * 4.0 ** -7


def test_gamma_t_monotone(toric4):
    G = from_code(toric4.code)
    balls = [gamma_t(G, 0, t) for t in range(4)]
    assert all(a <= b for a, b in zip(balls, balls[1:]))
    assert balls[0] == frozenset(G.adjacency[0])
    assert is_t_independent(G, (0,), 5)
    with pytest.raises(GraphError):
        gamma_t(G, 0, -1)


def test_graph_roundtrip_and_errors():
    G = random_bipartite_graph(5, 8, 3, 0)
    assert graph_from_dict(graph_to_dict(G)) == G
    with pytest.raises(GraphError):
        BipartiteGraph(1, 2, ((0, 0),))
    with pytest.raises(GraphError):
        BipartiteGraph(1, 2, ((0, 5),))
    with pytest.raises(GraphError):
        graph_from_dict({"m": 1})
    with pytest.raises(GraphError):
        set_eps(G, [])
