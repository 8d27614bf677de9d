import json

import numpy as np
import pytest

from conslab import theory
from conslab.cli import main


def test_usage_errors_exit_2(capsys):
    for argv in ([], ["bogus"], ["train", "--widths", "x,y"],
                 ["train", "--activation", "gelu"],
                 ["predict", "--spectrum", "s.json", "--eta-grid", "bad"],
                 ["predict", "--spectrum", "s.json", "--eta-grid", "0.1:0.01:5"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2
        capsys.readouterr()


def test_gen_data(tmp_path, capsys):
    code = main(["gen-data", "--n", "30", "--dim", "6", "--classes", "3",
                 "--out", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "30 samples" in out
    csvs = list(tmp_path.glob("mixture_*.csv"))
    assert len(csvs) == 1
    assert len(csvs[0].read_text().splitlines()) == 31


def test_train_and_flow(tmp_path, capsys):
    code = main(["train", "--widths", "6,8,3", "--n", "40", "--steps", "30",
                 "--eta", "0.05", "--out", str(tmp_path / "t")])
    assert code == 0
    out = capsys.readouterr().out
    assert "status=ok" in out and "total_drift=" in out
    assert (tmp_path / "t" / "trace.csv").exists()
    assert json.loads((tmp_path / "t" / "summary.json").read_text())["steps_run"] == 30

    code = main(["flow", "--widths", "6,8,3", "--n", "40", "--duration", "0.1",
                 "--step-size", "1e-3", "--out", str(tmp_path / "f")])
    assert code == 0
    out = capsys.readouterr().out
    assert "max_relative_drift=" in out
    assert (tmp_path / "f" / "flow.csv").exists()


def test_experiment_and_report(tmp_path, capsys):
    code = main(["experiment", "E1", "--out", str(tmp_path)])
    assert code == 0
    assert "E1: pass" in capsys.readouterr().out
    assert (tmp_path / "E1" / "results.json").exists()

    code = main(["report", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "| E1 |" in out and "1 passed, 0 failed" in out
    assert (tmp_path / "figures").is_dir()

    code = main(["report", str(tmp_path / "missing")])
    assert code == 1
    capsys.readouterr()


def test_suite_command(tmp_path, capsys):
    code = main(["suite", "E1,E2", "--out", str(tmp_path)])
    assert code == 0
    assert "2 passed, 0 failed" in capsys.readouterr().out
    assert (tmp_path / "summary.md").exists()


def test_predict_matches_theory(tmp_path, capsys):
    spec = {"lambdas": [2.0, 0.5], "coeffs": [0.7, 0.3], "steps": 400}
    spec_path = tmp_path / "spectrum.json"
    spec_path.write_text(json.dumps(spec))
    code = main(["predict", "--spectrum", str(spec_path),
                 "--eta-grid", "0.001:0.1:5", "--out", str(tmp_path)])
    assert code == 0
    capsys.readouterr()
    rows = (tmp_path / "prediction.csv").read_text().splitlines()[1:]
    assert len(rows) == 5
    for row in rows:
        eta, total, _ = (float(v) for v in row.split(","))
        m = theory.SpectralModel(spec["lambdas"], spec["coeffs"], eta, 400)
        assert total == pytest.approx(theory.crossover_sum(m)[0], rel=1e-12)
    etas = np.array([float(r.split(",")[0]) for r in rows])
    np.testing.assert_allclose(etas, np.logspace(-3, -1, 5), rtol=1e-12)


def test_runtime_error_exit_1(tmp_path, capsys):
    code = main(["predict", "--spectrum", str(tmp_path / "nope.json"),
                 "--eta-grid", "0.001:0.1:5"])
    assert code == 1
    assert "conslab:" in capsys.readouterr().err


def test_experiment_unknown_id_exit_1(capsys):
    code = main(["experiment", "E99"])
    assert code == 1
    capsys.readouterr()
