import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from clockham.cli import main
from clockham.specfile import BUILTIN_SPECS
from clockham.walks import (analytic_spectrum_full_penalty, analytic_spectrum_half_penalty,
                            one_minus_cos)

SPECS = Path(__file__).resolve().parent.parent / "demos" / "specs"


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# -- spectrum -----------------------------------------------------------------

def test_spectrum_full_penalty(capsys):
    code, out, _ = run(["spectrum", "--endpoint", "8", "--mu", "1"], capsys)
    assert code == 0
    lam = np.array([float(r["eigenvalue"]) for r in rows(out)])
    assert lam.size == 8
    assert np.max(np.abs(lam - analytic_spectrum_full_penalty(8))) < 1e-10


def test_spectrum_half_penalty_json(capsys):
    code, out, _ = run(["spectrum", "--endpoint", "8", "--mu", "0.5", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["mode"] == "endpoint"
    assert np.max(np.abs(np.array(doc["eigenvalues"]) - analytic_spectrum_half_penalty(8))) < 1e-10


def test_spectrum_walk_matches_dense(capsys):
    code, out, _ = run(["spectrum", "--walk", "8", "--penalty", "3:1"], capsys)
    assert code == 0
    m = np.diag([0.5] + [1.0] * 6 + [0.5]) - 0.5 * (np.eye(8, k=1) + np.eye(8, k=-1))
    m[2, 2] += 1
    lam = np.array([float(r["eigenvalue"]) for r in rows(out)])
    assert np.max(np.abs(lam - np.linalg.eigvalsh(m))) < 1e-12


@pytest.mark.parametrize("argv", [
    ["spectrum", "--endpoint", "8"],
    ["spectrum", "--endpoint", "8", "--mu", "2"],
    ["spectrum", "--walk", "8", "--mu", "0.5"],
    ["spectrum", "--walk", "8", "--penalty", "9:1"],
    ["spectrum", "--walk", "0"],
])
def test_spectrum_bad_flags(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert "error" in err


@pytest.mark.parametrize("argv", [
    [],
    ["spectrum"],
    ["spectrum", "--walk", "8", "--penalty", "3-1"],
    ["verify", "nonsense"],
    ["assemble", "--builtin", "nope"],
])
def test_argparse_errors_exit_two(argv, capsys):
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == 2


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.csv"
    code, out, _ = run(["spectrum", "--endpoint", "4", "--mu", "1", "-o", str(target)], capsys)
    assert code == 0 and out == ""
    assert target.read_text().startswith("index,eigenvalue\n")


# -- verify -------------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["verify", "starting-penalty", "--tmax", "32"],
    ["verify", "uncoupling", "--tmax", "12"],
    ["verify", "kkr", "--samples", "60"],
    ["verify", "eqma"],
    ["verify", "qma-window", "--tmax", "8"],
    ["verify", "constant-rejection"],
    ["verify", "scaling", "--k", "1", "--tmax", "1024"],
    ["verify", "eqma", "--spec", str(SPECS / "no_circuit.json")],
    ["verify", "eqma", "--spec", str(SPECS / "yes_circuit.json"), str(SPECS / "explicit_cycle.json")],
    ["verify", "qma-window", "--spec", str(SPECS / "biased_no.json"), "--instance", "NO"],
])
def test_verify_suites_pass(argv, capsys):
    code, out, err = run(argv + ["--jobs", "1"], capsys)
    assert code == 0, err
    table = rows(out)
    assert table and all(r["verdict"] == "holds" for r in table)


def test_verify_scaling_reports_band(capsys):
    code, out, _ = run(["verify", "scaling", "--k", "1", "--tmax", "4096", "--jobs", "1"], capsys)
    assert code == 0
    table = rows(out)
    assert [int(r["T"]) for r in table] == [64, 128, 256, 512, 1024, 2048, 4096]
    ratios = [float(r["computed"]) for r in table]
    assert max(ratios) / min(ratios) < 10


def test_verify_violation_exits_three(capsys):
    # a band factor of 1 cannot hold unless every ratio is identical
    code, out, err = run(["verify", "scaling", "--k", "1", "2", "--T", "64", "4096",
                          "--factor", "1", "--jobs", "1"], capsys)
    assert code == 3
    assert "violated" in out and "violated:" in err


def test_verify_instance_contract_violation_exits_three(capsys):
    code, _, err = run(["verify", "eqma", "--spec", str(SPECS / "no_circuit.json"),
                        "--instance", "YES", "--jobs", "1"], capsys)
    assert code == 3
    assert "verification failed" in err


def test_verify_usage_errors(capsys):
    assert run(["verify", "qma-window", "--spec", str(SPECS / "biased_no.json")], capsys)[0] == 2
    assert run(["verify", "starting-penalty", "--tmin", "9", "--tmax", "4"], capsys)[0] == 2
    assert run(["verify", "constant-rejection", "--mu", "1.5"], capsys)[0] == 2


def test_verify_output_is_deterministic_across_jobs(tmp_path, capsys):
    outs = []
    for jobs in ("1", "3", "1"):
        target = tmp_path / f"run{len(outs)}.csv"
        code, _, _ = run(["verify", "qma-window", "--tmax", "16", "--jobs", jobs, "-o", str(target)], capsys)
        assert code == 0
        outs.append(target.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_verify_json(capsys):
    code, out, _ = run(["verify", "constant-rejection", "--T", "36", "--mu", "1/3",
                        "--format", "json", "--jobs", "1"], capsys)
    assert code == 0
    doc = json.loads(out)
    names = {d["bound"] for d in doc}
    assert "constant-rejection-trial" in names and "constant-rejection-assembled" in names


# -- assemble -----------------------------------------------------------------

def test_assemble_identity_reports_kernel(capsys):
    code, out, _ = run(["assemble", "--builtin", "identity"], capsys)
    assert code == 0
    (r,) = rows(out)
    assert r["kind"] == "legal-only" and int(r["kernel_dim"]) == 2


def test_assemble_no_example(capsys):
    code, out, _ = run(["assemble", "--builtin", "no", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    (legal,) = [s for s in doc["subspaces"] if s["kind"] == "legal-only"]
    assert abs(legal["lambda0"] - one_minus_cos(math.pi / 12)) < 1e-12
    assert doc["predicted_no"] == one_minus_cos(math.pi / 12)


def test_assemble_malformed_gate_matrix(tmp_path, capsys):
    doc = dict(BUILTIN_SPECS["no"])
    doc["gates"] = [{"t": 2, "targets": [0], "matrix": [[1, 0], [1, 0], [1, 0], [0, 0]]}]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(["assemble", "--spec", str(path)], capsys)
    assert code == 2
    assert "gates[0].matrix" in err


def test_assemble_is_byte_deterministic(capsys):
    a = run(["assemble", "--spec", str(SPECS / "phase_branches.json")], capsys)[1]
    b = run(["assemble", "--spec", str(SPECS / "phase_branches.json")], capsys)[1]
    assert a == b


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "clockham", "spectrum", "--endpoint", "3", "--mu", "1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "index,eigenvalue"
