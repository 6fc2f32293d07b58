import csv
import io
import json

import numpy as np
import pytest

from thermal_coset.cli import main, parse_axis, parse_complex


def read_csv(path):
    lines = path.read_text().splitlines()
    meta = {}
    body = []
    for line in lines:
        if line.startswith("# "):
            key, value = line[2:].split(": ", 1)
            meta[key] = json.loads(value)
        else:
            body.append(line)
    return meta, list(csv.DictReader(io.StringIO("\n".join(body))))


def test_parse_helpers():
    assert parse_complex("0.3,-0.4") == 0.3 - 0.4j
    assert parse_complex("2") == 2
    assert parse_axis("-4,4,41") == (-4.0, 4.0, 41)
    with pytest.raises(ValueError):
        parse_axis("1,2")


def test_rho_json(tmp_path):
    out = tmp_path / "rho.json"
    assert main(["rho", "--algebra", "su2", "--j", "0.5", "--z", "0.1", "--x", "1", "--cutoff", "25", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    mat = np.array(doc["payload"]["matrix"])
    rho = mat[..., 0] + 1j * mat[..., 1]
    assert rho.shape == (26**2, 26**2)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-8)
    assert doc["payload"]["labels"][1] == [0, 1]


def test_rho_csv_su11(tmp_path):
    out = tmp_path / "rho.csv"
    args = ["rho", "--algebra", "su11", "--q", "1", "--zeta", "0.2", "--x", "2", "--format", "csv", "-o", str(out)]
    assert main(args) == 0
    meta, rows = read_csv(out)
    assert meta["command"] == "rho"
    trace = sum(float(r["re"]) for r in rows if r["row_label"] == r["col_label"])
    assert trace == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize(
    "argv, code",
    [
        (["rho", "--algebra", "su11", "--q", "0", "--zeta", "1.5", "--x", "1"], 2),
        (["rho", "--algebra", "su2", "--j", "0.5", "--z", "0.1"], 2),
        (["rho", "--algebra", "su2", "--j", "0.5", "--z", "0.1", "--x", "1", "--cutoff", "3"], 3),
        (["rho", "--algebra", "su2", "--j", "3", "--z", "0.1", "--omega-hz", "1e7", "--temp-k", "0.005"], 3),
        (["wigner", "--algebra", "su2", "--j", "1", "--z", "0.1", "--x", "0.1", "--truncation", "5"], 3),
    ],
)
def test_exit_codes(tmp_path, argv, code, capsys):
    assert main(argv + ["-o", str(tmp_path / "out")]) == code
    assert "error:" in capsys.readouterr().err


def test_fidelity_scan(tmp_path):
    out = tmp_path / "fid.csv"
    argv = ["fidelity", "--algebra", "su2", "--j", "1", "--z", "0.3", "--x-min", "0.1", "--x-max", "10",
            "--steps", "7", "--omega-hz", "1e7", "-o", str(out)]
    assert main(argv) == 0
    meta, rows = read_csv(out)
    assert len(rows) == 7
    assert max(float(r["abs_diff"]) for r in rows) < 1e-12
    assert rows[0]["T_equivalent_K"]
    assert meta["bounds"]["max_abs_diff"] < 1e-12


def test_fidelity_su11(tmp_path):
    out = tmp_path / "fid.csv"
    assert main(["fidelity", "--algebra", "su11", "--q", "0", "--zeta", "0.2", "--x", "1", "-o", str(out)]) == 0
    _, rows = read_csv(out)
    assert float(rows[0]["abs_diff"]) < 1e-6


def test_wigner_deterministic_and_certified(tmp_path):
    argv = ["wigner", "--algebra", "su11", "--q", "1", "--zeta", "0.2,0.1", "--x", "0.5",
            "--axis1=-2,2,9", "--axis2=-2,2,9"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["-o", str(a)]) == 0
    assert main(argv + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.csv.json").read_bytes() == (tmp_path / "b.csv.json").read_bytes()
    meta, rows = read_csv(a)
    assert len(rows) == 81
    bounds = meta["bounds"]
    assert bounds["raw_tail"] <= bounds["raw_tail_target"]
    assert bounds["series_vs_resummed_max_abs"] <= bounds["raw_tail"] + 1e-12
    for r in rows:
        assert float(r["f_w_normalized"]) == pytest.approx(float(r["f_w"]) / (4 * np.pi**2))


def test_wigner_vacuum_peak(tmp_path):
    out = tmp_path / "w.csv"
    argv = ["wigner", "--algebra", "su11", "--q", "0", "--zeta", "0", "--x", "40", "--axis1=-1,1,3", "--axis2=-1,1,3"]
    assert main(argv + ["-o", str(out)]) == 0
    _, rows = read_csv(out)
    centre = [r for r in rows if float(r["coord1"]) == 0 and float(r["coord2"]) == 0][0]
    assert float(centre["f_w"]) == pytest.approx(4.0, abs=1e-9)


def test_verify_quick_and_tamper(tmp_path):
    report = tmp_path / "r.json"
    assert main(["verify", "--level", "quick", "--report", str(report)]) == 0
    doc = json.loads(report.read_text())
    assert doc["passed"] and not doc["tampered"]
    assert main(["verify", "--level", "quick", "--tamper-c"]) == 1
