import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssexpand.pauli import QuditSystem, from_terms, identity, multiply, weight
from ssexpand.stabilizer import (
    CapExceeded, CodeValidationError, _class_size, check_generators, check_nocommute_per_qudit, coset_search,
    distance, in_centralizer, in_group, is_succinct, iter_weight_class, syndrome, validate,
)


def five_qudit_code(d: int):
    """Cyclic [[5,1,3]]_d code with generator X Z Z^-1 X^-1 I."""
    s = QuditSystem(5, d)
    pattern = [(1, 0), (0, 1), (0, -1), (-1, 0)]
    gens = [from_terms(s, [((i + j) % 5, x, z) for j, (x, z) in enumerate(pattern)]) for i in range(4)]
    return validate(gens)


@pytest.fixture(scope="module")
def five2():
    return five_qudit_code(2)


@pytest.fixture(scope="module")
def five3():
    return five_qudit_code(3)


def test_validation_failures():
    s = QuditSystem(2, 2)
    X0 = from_terms(s, [(0, 1, 0)])
    Z0 = from_terms(s, [(0, 0, 1)])
    Z1 = from_terms(s, [(1, 0, 1)])
    r = check_generators([X0, Z0])
    assert not r.ok and r.failure == "noncommuting" and r.indices == (0, 1)
    r = check_generators([Z0, Z1, multiply(Z0, Z1)])
    assert r.failure == "dependent" and r.indices == (2,)
    assert check_generators([Z0]).failure == "trivial_qudit"
    assert check_generators([from_terms(s, [(0, 0, 1), (1, 0, 1)])], k=1).failure == "locality"
    assert check_generators([identity(s)]).failure == "dependent"
    with pytest.raises(CodeValidationError):
        validate([X0, Z0])


def test_toric_parameters(toric3, toric4):
    for t, (n, m) in ((toric3, (18, 16)), (toric4, (32, 30))):
        assert (t.code.n, t.code.m, t.code.k, t.code.D_R) == (n, m, 4, 4)
        assert check_nocommute_per_qudit(t.code).ok
        assert is_succinct(t.code)


def test_syndrome_and_membership(toric3):
    code = toric3.code
    g = code.generators[0]
    assert in_group(code, g) and in_centralizer(code, g)
    single = from_terms(code.system, [(0, 0, 1)])
    syn = syndrome(code, single)
    assert len(syn) == 2  # a single Z flips the two stars at the edge's ends
    assert not in_group(code, single)


@pytest.mark.parametrize("method", ["dfs", "enumerate"])
def test_distances(method, toric3, five2, five3):
    assert distance(five2, 4, method).distance == 3
    assert distance(five3, 4, method).distance == 3
    assert distance(toric3.code, 4, method).distance == 3


def test_distance_cosets_method(five2):
    assert distance(five2, 4, "cosets").distance == 3
    from ssexpand.zoo import toric_code
    assert distance(toric_code(2).code, 4, "cosets").distance == 2


def test_distance_above_cap(toric3):
    res = distance(toric3.code, 2)
    assert res.distance is None and res.text() == ">= 3"


def random_error(code, rng, max_w):
    qs = rng.choice(code.n, size=rng.integers(1, max_w + 1), replace=False)
    terms = []
    for q in qs:
        x, z = 0, 0
        while x == 0 and z == 0:
            x, z = rng.integers(0, code.d, size=2)
        terms.append((int(q), int(x), int(z)))
    return from_terms(code.system, terms)


@pytest.mark.parametrize("name", ["five2", "five3", "toric3"])
def test_dfs_matches_enumeration(name, request):
    code = request.getfixturevalue(name)
    code = getattr(code, "code", code)
    rng = np.random.default_rng(7)
    for _ in range(25):
        E = random_error(code, rng, 4)
        a = coset_search(code, E, "centralizer", 5, "dfs").weight
        b = coset_search(code, E, "centralizer", 5, "enumerate").weight
        assert a == b <= weight(E)
        s = coset_search(code, E, "stabilizer", 5).weight
        assert a <= s <= weight(E)


FIVE3 = five_qudit_code(3)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_coset_weight_invariant_under_group(data):
    code = FIVE3
    seed = data.draw(st.integers(0, 10**6))
    rng = np.random.default_rng(seed)
    E = random_error(code, rng, 3)
    coeffs = data.draw(st.lists(st.integers(0, 2), min_size=code.m, max_size=code.m))
    g = identity(code.system)
    for c, gen in zip(coeffs, code.generators):
        for _ in range(c):
            g = multiply(g, gen)
    F = multiply(E, g)
    for mode in ("stabilizer", "centralizer"):
        assert coset_search(code, E, mode, 5).weight == coset_search(code, F, mode, 5).weight
    assert syndrome(code, E) == syndrome(code, F)


def test_representative_is_in_coset(five2):
    rng = np.random.default_rng(3)
    for _ in range(10):
        E = random_error(five2, rng, 4)
        res = coset_search(five2, E, "centralizer", 5)
        assert weight(res.representative) == res.weight
        assert syndrome(five2, res.representative) == syndrome(five2, E)


def test_cap_exceeded(toric4):
    code = toric4.code
    E = from_terms(code.system, [(q, 0, 1) for q in (0, 5, 10, 21, 26)])
    w = coset_search(code, E, "centralizer", 8).weight
    with pytest.raises(CapExceeded):
        coset_search(code, E, "centralizer", w - 1)


@pytest.mark.parametrize("n,d,w", [(4, 2, 2), (5, 3, 2), (3, 2, 3), (6, 2, 0)])
def test_weight_class_enumeration(n, d, w):
    vecs = np.concatenate(list(iter_weight_class(n, d, w))) if w else np.zeros((1, 2 * n), dtype=np.int64)
    assert len(vecs) == _class_size(n, d, w)
    wts = np.count_nonzero(vecs[:, :n] | vecs[:, n:], axis=1)
    assert np.all(wts == w)
    assert len({v.tobytes() for v in vecs}) == len(vecs)
