import json
import subprocess
import sys

import pytest

from faabruno.cli import main
from faabruno.multilinear import tower_from_dict
from faabruno.partitions import bell

POLY_F = {"kind": "polynomial", "in": 1, "out": 2,
          "terms": [{"coeff": "1", "exponents": [2], "out_index": 0},
                    {"coeff": "1", "exponents": [1], "out_index": 1}]}
POLY_G = {"kind": "polynomial", "in": 2, "out": 1,
          "terms": [{"coeff": "1", "exponents": [1, 1], "out_index": 0}]}


@pytest.fixture
def specs(tmp_path):
    paths = {}
    for name, spec in [("f", POLY_F), ("g", POLY_G), ("exp", {"kind": "exp"}),
                       ("sin2", {"kind": "sin", "dim": 2})]:
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(spec))
        paths[name] = str(p)
    return paths


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bell(capsys):
    assert run(["bell", "--n", "3"], capsys)[:2] == (0, "5\n")


def test_partitions_json(capsys):
    code, out, _ = run(["partitions", "--n", "3", "--format", "json"], capsys)
    data = json.loads(out)
    assert code == 0 and len(data) == bell(3) and data[0] == [[0, 1, 2]]


def test_compose_json_round_trip(specs, capsys):
    code, out, _ = run(["compose", "--f", specs["f"], "--g", specs["g"], "--x", "1",
                        "--order", "3", "--format", "json"], capsys)
    assert code == 0
    data = json.loads(out)
    tower = tower_from_dict(data)
    assert [tower.deriv(k).coeff((0,) * k)[0] for k in (1, 2, 3)] == [3, 6, 6]
    assert data["value"] == ["1"]


def test_compose_float(specs, capsys):
    code, out, _ = run(["compose", "--f", specs["exp"], "--g", specs["exp"], "--x", "0",
                        "--order", "4"], capsys)
    assert code == 0 and json.loads(out)["ring"] == "float"


def test_compose_dimension_mismatch(specs, capsys):
    code, _, err = run(["compose", "--f", specs["g"], "--g", specs["g"], "--x", "1,2",
                        "--order", "2"], capsys)
    assert code == 2 and "dimension" in err


def test_compose_bad_point(specs, capsys):
    code, _, err = run(["compose", "--f", specs["f"], "--g", specs["g"], "--x", "1,2",
                        "--order", "2"], capsys)
    assert code == 2 and "--x" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(["compose", "--f", str(tmp_path / "nope.json"), "--g", "x", "--x", "1",
                        "--order", "1"], capsys)
    assert code == 2 and "--f" in err


def test_usage_error_names_flag(capsys):
    code, _, err = run(["bell", "--n", "x"], capsys)
    assert code == 2 and "--n" in err
    assert run(["nope"], capsys)[0] == 2


def test_diff_check(specs, capsys):
    code, out, _ = run(["diff-check", "--f", specs["sin2"], "--x", "0.1,0.2", "--order", "2",
                        "--richardson", "--dirs", "1,0;0.6,0.8", "--format", "json"], capsys)
    data = json.loads(out)
    assert code == 0 and data["relative_error"] < 1e-4 and len(data["chain_rule"]) == 2


def test_diff_check_bad_h(specs, capsys):
    code, _, err = run(["diff-check", "--f", specs["exp"], "--x", "0", "--order", "1",
                        "--h", "-1"], capsys)
    assert code == 2 and "--h" in err


@pytest.mark.parametrize("suite", ["leibniz", "split", "alg7"])
def test_series_check(suite, capsys):
    code, out, _ = run(["series-check", "--suite", suite, "--vars", "2", "--cap", "4",
                        "--trials", "10", "--seed", "3"], capsys)
    assert code == 0 and "PASS" in out


def test_series_check_json(capsys):
    code, out, _ = run(["series-check", "--suite", "leibniz", "--trials", "5", "--format",
                        "json"], capsys)
    data = json.loads(out)
    assert code == 0 and data["cases"] == 5 and data["failures"] == []


def test_lemma2(capsys, tmp_path):
    code, out, _ = run(["lemma2", "--n", "2"], capsys)
    assert code == 0 and out.startswith("PASS")
    code, out, _ = run(["lemma2", "--n", "3", "--dump", str(tmp_path)], capsys)
    lhs = (tmp_path / "lemma2_n3_lhs.json").read_bytes()
    assert code == 0 and lhs == (tmp_path / "lemma2_n3_rhs.json").read_bytes()
    assert run(["lemma2", "--n", "9"], capsys)[0] == 2


def test_help_documents_prng():
    out = subprocess.run([sys.executable, "-m", "faabruno.cli", "verify-all", "--help"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "PCG64" in out.stdout


def test_verify_all_json(capsys):
    code, out, _ = run(["verify-all", "--seed", "7", "--format", "json"], capsys)
    data = json.loads(out)
    assert code == 0
    assert [s["suite"] for s in data["suites"]][:2] == ["partitions_bell", "lemma2"]
    assert all(s["failures"] == [] and "wall_time" not in s for s in data["suites"])
