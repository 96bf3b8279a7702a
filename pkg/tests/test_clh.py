import dataclasses
import json

import numpy as np
import pytest

from ssexpand.clh import (
    CLHInstance, ClhError, Term, approximate_ground, dense_ground_energy, embed, instance_from_dict,
    instance_to_dict, nontrivial_support, random_commuting_instance, state_energy, validate_clh, verify_witness,
    witness_from_dict, witness_json, witness_to_dict,
)
from ssexpand.zoo import as_projector_clh, toric_code

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2)


@pytest.fixture(scope="module")
def toric2_instance():
    return as_projector_clh(toric_code(2).code)


@pytest.fixture(scope="module")
def toric2_result(toric2_instance):
    return approximate_ground(toric2_instance, seed=3)


def bell_instance():
    return CLHInstance(2, 2, (Term((0, 1), (np.eye(4) - np.kron(Z, Z)) / 2), Term((0, 1), (np.eye(4) - np.kron(X, X)) / 2)))


def test_embed_matches_kron():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(2, 2))
    B = rng.normal(size=(3, 3))
    dims = {0: 2, 1: 3, 2: 2}
    assert np.allclose(embed(A, [0], [0, 1], dims), np.kron(A, np.eye(3)))
    assert np.allclose(embed(B, [1], [0, 1], dims), np.kron(np.eye(2), B))
    AB = np.kron(A, B)
    assert np.allclose(embed(AB, [0, 1], [1, 0], dims).reshape(3, 2, 3, 2),
                       AB.reshape(2, 3, 2, 3).transpose(1, 0, 3, 2))
    with pytest.raises(ClhError):
        embed(A, [2], [0, 1], dims)


def test_instance_checks():
    with pytest.raises(ClhError):
        CLHInstance(2, 2, (Term((1, 0), np.eye(4)),))
    with pytest.raises(ClhError):
        CLHInstance(2, 2, (Term((0,), np.eye(4)),))
    bad = CLHInstance(1, 2, (Term((0,), (I2 - Z) / 2), Term((0,), (I2 - X) / 2), Term((0,), 2 * I2)))
    rep = validate_clh(bad)
    assert not rep.ok and rep.projector_failures[0][0] == 2 and rep.commutator_failures[0][:2] == (0, 1)


def test_nontrivial_support():
    t = Term((0, 1), np.kron((I2 - Z) / 2, I2))
    assert nontrivial_support(t, {0: 2, 1: 2}) == (0,)


def test_bell_pair_exact():
    inst = bell_instance()
    assert validate_clh(inst).ok
    res = approximate_ground(inst)
    assert res.ok, res.assertions
    # isolating term 0 removes term 1 (two shared qubits), so only the slack bound applies
    assert res.witness.bad == (1,)
    e0 = dense_ground_energy(inst)
    assert e0 - 1e-8 <= res.energy <= e0 + len(res.witness.bad) + 1e-8
    assert verify_witness(inst, res.witness).ok


def test_noninteracting_instance_needs_no_iterations():
    inst = CLHInstance(3, 2, tuple(Term((q,), (I2 - Z) / 2) for q in range(3)))
    res = approximate_ground(inst)
    assert res.witness.iterations == () and res.energy == pytest.approx(0)


def test_toric2_loop(toric2_instance, toric2_result):
    res = toric2_result
    assert res.ok, res.assertions
    assert len(res.witness.iterations) <= len(toric2_instance.terms)
    assert dense_ground_energy(toric2_instance) == pytest.approx(0, abs=1e-9)
    assert res.energy >= -1e-9
    assert res.energy <= res.good_energy + len(res.witness.bad) + 1e-8
    assert state_energy(toric2_instance, res.state) == pytest.approx(res.energy)
    assert np.isclose(np.linalg.norm(res.state), 1)


def test_witness_roundtrip_and_verify(toric2_instance, toric2_result):
    w = toric2_result.witness
    text = witness_json(w)
    w2 = witness_from_dict(json.loads(text))
    assert witness_json(w2) == text
    rep = verify_witness(toric2_instance, w2)
    assert rep.ok, rep.failures
    assert rep.energy == pytest.approx(toric2_result.energy, abs=1e-8)
    inst2 = instance_from_dict(json.loads(json.dumps(instance_to_dict(toric2_instance))))
    assert verify_witness(inst2, w2).ok


def test_tampered_witness_rejected(toric2_instance, toric2_result):
    w = toric2_result.witness
    lying = dataclasses.replace(w, claimed_energy=w.claimed_energy - 0.5)
    assert not verify_witness(toric2_instance, lying).ok
    data = witness_to_dict(w)
    data["final_digest"] = "0" * 64
    assert not verify_witness(toric2_instance, witness_from_dict(data)).ok
    if w.iterations:
        rec = w.iterations[0]
        other = dataclasses.replace(rec, removed=rec.removed + (999,))
        forged = dataclasses.replace(w, iterations=(other,) + w.iterations[1:])
        rep = verify_witness(toric2_instance, forged)
        assert not rep.ok and "removal set" in rep.failures[0]


def test_prover_indices_replays_exhaustive(toric2_instance, toric2_result):
    chosen = [s.chosen for r in toric2_result.witness.iterations for s in r.steps]
    res = approximate_ground(toric2_instance, strategy="prover-indices", prover_indices=chosen, seed=3)
    assert witness_json(res.witness) == witness_json(toric2_result.witness)
    assert chosen
    with pytest.raises(ClhError):
        approximate_ground(toric2_instance, strategy="prover-indices", prover_indices=[], seed=3)


def test_random_instance_deterministic():
    inst = random_commuting_instance(8, 3, seed=2, D_R=6, n_z=2, n_x=2)
    a = approximate_ground(inst, seed=9)
    b = approximate_ground(inst, seed=9, workers=8)
    assert witness_json(a.witness) == witness_json(b.witness)
    assert a.ok, a.assertions
    assert a.energy >= dense_ground_energy(inst) - 1e-8
    assert verify_witness(inst, a.witness).ok


def test_unknown_strategy(toric2_instance):
    with pytest.raises(ClhError):
        approximate_ground(toric2_instance, strategy="nope")
