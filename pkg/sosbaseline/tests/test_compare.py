import csv
import io
import json
import subprocess

import pytest

from sosbarrier.cli import main
from sosbarrier.compare import COLUMNS, compare, compare_csv


BERN = {"problem": "2d-s", "m": 6, "kappa": 4, "wall_time_s": 0.5,
        "delta_s": 0.8812, "variables": 51, "constraints": 7408}
SOS = {"delta_s": 0.9039,
       "meta": {"problem": "2d-s", "m": 12, "m_lambda": 4,
                "wall_time_s": 0.4, "variables": 3229, "constraints": 637}}


def test_fixed_column_count():
    rows = compare([BERN], [SOS])
    assert rows[0] == list(COLUMNS)
    assert all(len(r) == 10 for r in rows)


def test_bernstein_only_table():
    rows = compare([BERN], [])
    assert len(rows) == 2
    assert rows[1][5:] == [""] * 5


def test_mismatched_problems_flagged():
    other = dict(BERN, problem="2d-h")
    with pytest.raises(ValueError):
        compare([BERN, other], [SOS])


def test_csv_round_trip():
    text = compare_csv([BERN], [SOS])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[1][0] == "6" and rows[1][5] == "12"
    assert rows[1][4] == "51/7408"


def test_cli_lagrange_demo(capsys):
    code = main(["lagrange-demo", "--m-lambda", "2"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["feasible"] is False


def test_cli_synth_and_compare(problem_path, tmp_path, capsys):
    cert = tmp_path / "cert.json"
    code = main(["synth", str(problem_path("2d-s")), "--m", "4",
                 "--m-lambda", "2", "--out", str(cert)])
    assert code == 0
    capsys.readouterr()
    run_rec = tmp_path / "cert.run.json"
    assert run_rec.exists()

    # run record from the LP lane via its public command line
    bern_cert = tmp_path / "bern.json"
    proc = subprocess.run(
        ["barrierlp", "synth", "2d-s", "--m", "4", "--kappa", "2",
         "--out", str(bern_cert)], capture_output=True, text=True)
    assert proc.returncode == 0
    code = main(["compare", "--bernstein", str(tmp_path / "bern.run.json"),
                 "--sos", str(run_rec)])
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert code == 0
    assert len(rows) == 2 and len(rows[1]) == 10
