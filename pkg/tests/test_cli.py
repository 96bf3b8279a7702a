import json
import subprocess
import sys

import pytest

from ssexpand.cli import main
from ssexpand.io import save_code, save_graph
from ssexpand.graphs import random_bipartite_graph
from ssexpand.zoo import toric_code


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    paths = {}
    for L in (2, 4):
        paths[f"t{L}"] = str(d / f"toric{L}.json")
        save_code(toric_code(L).code, paths[f"t{L}"])
    paths["graph"] = str(d / "g.json")
    save_graph(random_bipartite_graph(18, 24, 4, 1), paths["graph"])
    paths["dir"] = d
    return paths


def run(argv, tmp_path, name="r.json"):
    out = tmp_path / name
    code = main(argv + ["--json", str(out), "--quiet"])
    return code, json.loads(out.read_text()) if out.exists() else None, out


def test_validate(files, tmp_path):
    code, rep, _ = run(["validate", "--code", files["t4"]], tmp_path)
    assert code == 0 and rep["result"]["ok"] and rep["result"]["nocommute_per_qudit"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"d": 2, "n": 1, "generators": [[{"q": 0, "x": 1}], [{"q": 0, "z": 1}]]}))
    code, rep, _ = run(["validate", "--code", str(bad)], tmp_path, "b.json")
    assert code == 2 and rep["result"]["failure"] == "noncommuting"


def test_input_errors_exit_1(files, tmp_path, capsys):
    assert main(["validate", "--code", str(tmp_path / "missing.json")]) == 1
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    assert main(["distance", "--code", str(broken)]) == 1
    assert "broken.json:1:2" in capsys.readouterr().err


def test_expansion_and_sets(files, tmp_path):
    code, rep, _ = run(["expansion", "--code", files["t4"], "--k", "2"], tmp_path)
    assert code == 0 and rep["result"]["eps"] == "1/2"
    code, rep, _ = run(["expansion", "--graph", files["graph"], "--mode", "sampled", "--trials", "200"], tmp_path)
    assert code == 0 and rep["seed"] == 0
    code, rep, _ = run(["independent-sets", "--code", files["t4"]], tmp_path)
    assert code == 0 and rep["result"]["chosen"][:2] == [0, 10]
    code, rep, _ = run(["independent-sets", "--code", files["t4"], "--kind", "k", "--target", "2"], tmp_path, "k.json")
    assert code == 1 and rep is None


def test_distance(files, tmp_path, capsys):
    code, rep, _ = run(["distance", "--code", files["t4"]], tmp_path)
    assert code == 0 and rep["result"]["distance"] == 4
    main(["distance", "--code", files["t4"], "--cap", "3"])
    assert capsys.readouterr().out.strip() == ">= 4"


def test_robustness_constructions(files, tmp_path):
    for cons in ("expander", "alphabet"):
        code, rep, _ = run(["robustness", "--code", files["t4"], "--construction", cons, "--U-size", "2"], tmp_path)
        assert code == 0, rep
    code, rep, _ = run(["robustness", "--code", files["t4"], "--construction", "random", "--U", "0",
                        "--independence-level", "1", "--trials", "200"], tmp_path)
    assert rep["result"]["trials"] == 200
    assert rep["assertions"]["dense_oracle_agrees"] == "pass"


def test_onion_and_profile(files, tmp_path):
    code, rep, _ = run(["onion", "--code", files["t4"], "--u", "0", "--random", "10"], tmp_path)
    assert code == 0, rep["failures"]
    csv = tmp_path / "p.csv"
    code, rep, _ = run(["profile", "--code", files["t4"], "--cap", "1", "--csv", str(csv)], tmp_path)
    assert code == 0 and csv.read_text().startswith("w,")


def test_zoo_and_clh(files, tmp_path):
    inst = tmp_path / "inst.json"
    wit = tmp_path / "wit.json"
    assert main(["zoo", "projector", "--code", files["t2"], "--out", str(inst), "--quiet"]) == 0
    code, rep, _ = run(["clh", "approx", "--in", str(inst), "--out", str(wit)], tmp_path)
    assert code == 0 and wit.exists(), rep["failures"]
    code, rep, _ = run(["clh", "verify", "--in", str(inst), "--witness", str(wit)], tmp_path, "v.json")
    assert code == 0 and rep["result"]["ok"]
    data = json.loads(wit.read_text())
    data["claimed_energy"] += 1
    wit.write_text(json.dumps(data))
    code, rep, _ = run(["clh", "verify", "--in", str(inst), "--witness", str(wit)], tmp_path, "v2.json")
    assert code == 2
    for sub in (["toric", "--L", "3"], ["random-css", "--n", "9", "--k", "4", "--n-z", "4", "--n-x", "4"],
                ["random-graph", "--m", "6", "--n", "8", "--left-degree", "3"]):
        out = tmp_path / f"{sub[0]}.json"
        assert main(["zoo", *sub, "--out", str(out), "--quiet"]) == 0 and out.exists()
    assert main(["zoo", "classical", "--graph", files["graph"], "--check", "--quiet"]) in (0, 2)


def test_reruns_byte_identical_across_workers(files, tmp_path):
    argv = ["robustness", "--code", files["t4"], "--construction", "random", "--U", "0",
            "--independence-level", "1", "--trials", "300", "--seed", "4"]
    outs = []
    for i, w in enumerate((1, 8, 1)):
        out = tmp_path / f"rep{i}.json"
        main(argv + ["--workers", str(w), "--json", str(out), "--quiet"])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_timing_flag_records_time(files, tmp_path):
    out = tmp_path / "t.json"
    main(["distance", "--code", files["t2"], "--timing", "--json", str(out), "--quiet"])
    timing = json.loads(out.read_text())["timing"]
    assert timing["recorded"] and timing["wall_clock_s"] >= 0 and timing["workers"] == 1


def test_console_script_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "ssexpand.cli", "distance", "--code", files["t2"]],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "2"
