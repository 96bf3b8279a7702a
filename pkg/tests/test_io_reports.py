import json

import pytest

from ssexpand.io import ParseError, code_from_dict, code_to_dict, load_code, load_graph, save_code
from ssexpand.pauli import QuditSystem, from_terms
from ssexpand.reports import BudgetError, budgets, build_report, config_hash, derive_seed, report_text
from ssexpand.stabilizer import validate
from ssexpand.zoo import toric_code


def test_code_roundtrip(tmp_path):
    code = toric_code(3).code
    p = tmp_path / "c.json"
    save_code(code, p)
    assert load_code(p) == code


def test_phase_roundtrip():
    s = QuditSystem(2, 3)
    code = validate([from_terms(s, [(0, 1, 0), (1, 2, 0)], phase_exp=2), from_terms(s, [(0, 0, 1), (1, 0, 1)])])
    data = code_to_dict(code)
    assert data["phases"] == [2, 0]
    assert code_from_dict(data) == code


def test_parse_errors_carry_location(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"d": 2,\n "n": }')
    with pytest.raises(ParseError, match=r"bad.json:2:"):
        load_code(p)
    p.write_text(json.dumps({"d": 2, "n": 2, "generators": [[{"q": 5, "z": 1}]]}))
    with pytest.raises(ParseError, match="out of range"):
        load_code(p)
    p.write_text(json.dumps({"m": 1}))
    with pytest.raises(ParseError):
        load_graph(p)
    with pytest.raises(ParseError, match="cannot read"):
        load_code(tmp_path / "missing.json")


def test_budgets(monkeypatch):
    monkeypatch.setenv("SSEXPAND_BUDGETS", "weight_cap=5")
    assert budgets()["weight_cap"] == 5
    monkeypatch.setenv("SSEXPAND_BUDGETS", '{"dense_cap": 16}')
    assert budgets({"dense_cap": 8})["dense_cap"] == 8
    monkeypatch.setenv("SSEXPAND_BUDGETS", "nope=1")
    with pytest.raises(BudgetError):
        budgets()
    monkeypatch.setenv("SSEXPAND_BUDGETS", "garbage")
    with pytest.raises(BudgetError):
        budgets()


def test_seed_derivation_is_stable():
    assert derive_seed(0, "a") == derive_seed(0, "a")
    assert derive_seed(0, "a") != derive_seed(0, "b")
    assert derive_seed(0, "a") != derive_seed(1, "a")
    # pinned value guards against accidental changes of the scheme
    assert derive_seed(7, "x") == 6208276300466537452


def test_report_shape():
    r = build_report("x", {"a": 1}, {"v": 2}, {"p": True, "f": False, "s": None}, seed=3)
    assert r["assertions"] == {"p": "pass", "f": "fail", "s": "skipped"}
    assert r["failures"] == ["f"] and not r["ok"]
    assert r["config_hash"] == config_hash({"a": 1})
    assert r["timing"] == {"recorded": False, "wall_clock_s": None}
    assert report_text(r) == report_text(json.loads(report_text(r)))
