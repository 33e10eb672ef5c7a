import json
import subprocess
import sys

import pytest

from clifford_forge.cli import main
from clifford_forge.serialization import SchemaError, load_system, system_to_json, system_from_json


def run(*args):
    return main([str(a) for a in args])


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("systems")
    out = {}
    for key, (m, r, dd) in {"40": (4, 0, 1), "44": (4, 4, 1), "42": (4, 2, 1), "30": (3, 0, 1)}.items():
        path = d / f"s{key}.json"
        assert run("construct", "--m", m, "--r", r, "--d", dd, "--out", path) == 0
        out[key] = path
    return out


def read(path):
    return json.loads(path.read_text())


def test_construct_files(files):
    data = read(files["40"])
    assert data["header"]["l"] == 8 and data["header"]["m"] == 4
    assert data["operators"][0]["kind"] == "signed_perm"
    assert min(data["operators"][0]["data"]["image"]) == 1
    assert read(files["44"])["header"]["l"] == 8
    assert data["certificate"]["status"] == "pass"


def test_construct_range_errors():
    assert run("construct", "--m", 1, "--r", 0) == 2
    assert run("construct", "--m", 4, "--r", 5) == 2
    assert run("construct", "--m", 4, "--r", 0, "--d", 0) == 2


def test_system_roundtrip(files):
    system = load_system(files["44"])
    again = system_from_json(json.loads(json.dumps(system_to_json(system))))
    assert again.operators == system.operators and again.header() == system.header()


def test_malformed_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"header": {"m": 4}}')
    assert run("analyze", "--in", bad) == 2
    bad.write_text("not json")
    with pytest.raises(SchemaError):
        load_system(bad)
    assert run("verify", "--in", tmp_path / "missing.json") == 2


def test_analyze_examples(files, tmp_path):
    out = tmp_path / "a.json"
    assert run("analyze", "--in", files["40"], "--out", out) == 0
    rep = read(out)
    assert rep["case"] == "a" and rep["component_count"] == 2
    assert rep["eigensplit"] == {"dims": [8, 8], "s1": 4, "s2": 4}
    assert all(r["passed"] for r in rep["inhomogeneity_witness"])
    assert run("analyze", "--in", files["44"], "--out", out) == 0
    rep = read(out)
    assert rep["case"] == "d3" and rep["component_count"] == 1


def test_analyze_outside_parity(files, tmp_path):
    assert run("analyze", "--in", files["30"], "--out", tmp_path / "x.json") == 3


def test_tampered_file(files, tmp_path):
    data = read(files["40"])
    data["operators"][1]["data"]["sign"][0] *= -1
    bad = tmp_path / "tampered.json"
    bad.write_text(json.dumps(data))
    out = tmp_path / "r.json"
    assert run("analyze", "--in", bad, "--out", out) == 1
    rep = read(out)
    assert rep["failed_check"] in ("clifford_relations", "symmetric_wrt_metric")
    assert rep["counterexample"]
    assert run("verify", "--in", bad, "--out", out) == 1


def test_witness_exit_codes(files, tmp_path):
    out = tmp_path / "w.json"
    assert run("witness", "--in", files["40"], "--out", out) == 0
    rep = read(out)
    assert [r["component"] for r in rep["inhomogeneity_witness"]] == ["M+,1", "M+,2"]
    assert run("witness", "--in", files["44"], "--out", out) == 0
    assert len(read(out)["inhomogeneity_witness"]) == 1
    assert run("witness", "--in", files["42"], "--out", out) == 3
    assert read(out)["status"] == "hypothesis_unmet"


def test_sample(files, tmp_path):
    out = tmp_path / "s.json"
    assert run("sample", "--in", files["40"], "--c", 0, "--count", 30, "--out", out) == 0
    assert read(out)["max_f_residual"] < 1e-9
    assert run("sample", "--in", files["44"], "--c", "27.308232836016487", "--count", 30, "--out", out) == 0
    assert read(out)["max_normal_residual"] < 1e-8
    assert run("sample", "--in", files["40"], "--c", 2) == 2


def test_example_commands(tmp_path):
    out = tmp_path / "e.json"
    assert run("example", "5.1", "--out", out) == 0
    rep = read(out)
    assert rep["passed"] and rep["bases"]["scale2"] == "1/2"
    assert run("example", "5.2", "--out", out) == 0
    assert run("example", "5.3") == 2


def test_byte_identical_output(files, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run("sample", "--in", files["44"], "--c", 3, "--count", 20, "--seed", 5, "--out", p) == 0
    assert a.read_bytes() == b.read_bytes()
    for p in (a, b):
        assert run("analyze", "--in", files["40"], "--out", p) == 0
    assert a.read_bytes() == b.read_bytes()


def test_threads_env_does_not_change_output(files, tmp_path, monkeypatch):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("sample", "--in", files["40"], "--c", 0.5, "--count", 16, "--out", a) == 0
    monkeypatch.setenv("CLIFFORD_FORGE_THREADS", "4")
    assert run("sample", "--in", files["40"], "--c", 0.5, "--count", 16, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    monkeypatch.setenv("CLIFFORD_FORGE_THREADS", "many")
    assert run("sample", "--in", files["40"], "--c", 0.5, "--count", 2) == 2


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "clifford_forge", "verify", "--in", str(files["42"])],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["certificate"]["status"] == "pass"
