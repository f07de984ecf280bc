import json
import math
import subprocess
import sys

import pytest

from alrestrict.cli import main
from alrestrict.config import KINDS
from alrestrict.report import COLUMNS, read_csv

RESTRICT_CFG = """\
[experiment]
kind = restrict
id = u1-naive
[group]
kind = U1
[words]
alphabet = a
xi = a; a^2
[function]
f = cos(2*h1 - h2)
[schedule]
radii = 0.8 0.4 0.2 0.1
extension = naive
[run]
samples = 20000
seed = 1
"""


@pytest.fixture
def restrict_cfg(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text(RESTRICT_CFG)
    return p


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_restrict_byte_identical(tmp_path, restrict_cfg):
    outs = []
    for i in range(2):
        csv_path, js_path = tmp_path / f"r{i}.csv", tmp_path / f"r{i}.json"
        code = main(["restrict", "--config", str(restrict_cfg), "--seed", "7",
                     "--out", str(csv_path), "--summary", str(js_path)])
        assert code == 0
        outs.append((csv_path.read_bytes(), js_path.read_bytes()))
    assert outs[0] == outs[1]
    rows = read_csv(outs[0][0].decode())
    assert [r["parameter"] for r in rows] == ["0.8", "0.4", "0.2", "0.1"]
    assert all(r["seed"] == "7" for r in rows)


def test_other_seed_changes_output(capsys, restrict_cfg):
    _, a, _ = run(capsys, "restrict", "--config", str(restrict_cfg), "--seed", "7")
    _, b, _ = run(capsys, "restrict", "--config", str(restrict_cfg), "--seed", "8")
    assert a != b


def test_run_matches_subcommand(capsys, restrict_cfg):
    _, a, _ = run(capsys, "run", "--config", str(restrict_cfg))
    _, b, _ = run(capsys, "restrict", "--config", str(restrict_cfg))
    assert a == b


def test_csv_schema_and_json_round_trip(capsys, restrict_cfg):
    _, csv_text, _ = run(capsys, "restrict", "--config", str(restrict_cfg))
    _, js_text, _ = run(capsys, "restrict", "--config", str(restrict_cfg), "--format", "json")
    assert csv_text.splitlines()[0] == ",".join(COLUMNS)
    rows = read_csv(csv_text)
    doc = json.loads(js_text)
    assert len(rows) == len(doc["rows"]) == 4
    for r, j in zip(rows, doc["rows"]):
        for key in ("value", "stderr"):
            assert f"{float(r[key]):.15g}" == f"{j[key]:.15g}"
            assert float(r[key]) == j[key]
        assert r["wall_ms"] == "" and j["wall_ms"] is None
    limit = doc["summary"]["limit"]
    assert limit["extrapolated_value"] == pytest.approx(1.0, abs=0.05)
    assert {"fit_exponent", "residual", "converged"} <= set(limit)


def test_timing_fills_wall_ms(capsys, restrict_cfg):
    code, out, _ = run(capsys, "restrict", "--config", str(restrict_cfg), "--timing")
    assert code == 0
    assert all(float(r["wall_ms"]) >= 0 for r in read_csv(out))


def test_gate_failure_exits_2(tmp_path, capsys):
    p = tmp_path / "g.cfg"
    p.write_text("[experiment]\nkind = al-integrate\n[run]\nsamples = 20000\n[gate]\nexpect = 0.9\n")
    code, out, err = run(capsys, "run", "--config", str(p))
    assert code == 2 and "FAIL gate" in err
    p.write_text("[experiment]\nkind = al-integrate\n[run]\nsamples = 20000\n[gate]\nexpect = 0.5\natol = 0.02\n")
    code, out, err = run(capsys, "run", "--config", str(p))
    assert code == 0 and "PASS gate" in err


def test_config_error_exits_1_with_line(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("[experiment]\nkind = tube\n[run]\nsampels = 5000\n")
    code, out, err = run(capsys, "run", "--config", str(p))
    assert code == 1 and f"{p}:4:" in err and out == ""


@pytest.mark.parametrize(
    "argv",
    [
        ["restrict", "--bogus"],
        ["run"],
        ["tube", "--samples", "10"],
        ["tube", "--format", "xml"],
        [],
        ["teleport"],
    ],
)
def test_usage_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and "usage" in err


def test_bad_runtime_values_exit_1(tmp_path, capsys):
    p = tmp_path / "w.cfg"
    p.write_text("[experiment]\nkind = al-integrate\n[words]\nxi = a z\n")
    assert run(capsys, "run", "--config", str(p))[0] == 1


def test_al_integrate_default(capsys):
    code, out, _ = run(capsys, "al-integrate", "--samples", "200000")
    rows = read_csv(out)
    assert code == 0 and len(rows) == 1
    v, s = float(rows[0]["value"]), float(rows[0]["stderr"])
    assert abs(v - 0.5) <= 3 * s
    assert rows[0]["group"] == "SU2" and rows[0]["n_samples"] == "200000"


def test_tube_and_support_tail(capsys):
    code, out, _ = run(capsys, "tube", "--samples", "100000")
    rows = read_csv(out)
    assert code == 0 and len(rows) == 4
    for r in rows:
        d = float(r["parameter"])
        assert abs(float(r["value"]) - (2 * d + math.pi * d * d)) <= 3 * float(r["stderr"]) + 1e-12
    code, out, err = run(capsys, "support-tail", "--samples", "20000")
    assert code == 0 and "FAIL" not in err
    assert len(read_csv(out)) == 8


def test_hausdorff_json(capsys):
    code, out, _ = run(capsys, "hausdorff", "--samples", "200000", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["summary"]["normalized_limit"]["extrapolated_value"] == pytest.approx(2 * math.pi, rel=0.03)


def test_every_kind_has_a_subcommand(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out, _ = capsys.readouterr()
    for kind in KINDS:
        assert kind in out


def test_module_entry_point(restrict_cfg):
    cmd = [sys.executable, "-m", "alrestrict", "restrict", "--config", str(restrict_cfg), "--samples", "5000"]
    a = subprocess.run(cmd, capture_output=True)
    b = subprocess.run(cmd, capture_output=True)
    assert a.returncode == 0 and a.stdout == b.stdout and a.stdout
