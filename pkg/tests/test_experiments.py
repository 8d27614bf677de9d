import json

import pytest

from conslab.errors import InvalidInputError
from conslab.experiments import (ExperimentSpec, Target, get_spec, registry,
                                 run_experiment, run_suite, summary_markdown)


def test_registry_shape():
    specs = registry()
    assert len(specs) == 23
    ids = [s.id for s in specs]
    assert ids == [f"E{i}" for i in range(1, 24)]
    assert len(set(ids)) == 23
    for s in specs:
        assert s.description and s.reference
        assert all(isinstance(x, int) for x in s.seeds)


def test_get_spec():
    assert get_spec("E5").id == "E5"
    with pytest.raises(InvalidInputError):
        get_spec("E99")


def test_target_comparators():
    assert Target("a", 1.0, "<", 2.0).passed
    assert not Target("a", 3.0, "<", 2.0).passed
    assert Target("a", 2.0, "<=", 2.0).passed
    assert Target("a", 3.0, ">", 2.0).passed
    assert Target("a", 2.0, ">=", 2.0).passed
    assert Target("a", 1.5, "range", (1.0, 2.0)).passed
    assert not Target("a", 2.5, "range", (1.0, 2.0)).passed
    assert Target("a", True, "true", None).passed
    with pytest.raises(InvalidInputError):
        Target("a", 1.0, "~=", 2.0)


def test_run_e1_flow_conservation(tmp_path):
    result = run_experiment("E1", str(tmp_path))
    assert result.passed
    assert result.metrics["max_relative_drift"] < 3e-5
    cell = tmp_path / "E1"
    cfg = json.loads((cell / "config.json").read_text())
    assert cfg["id"] == "E1"
    payload = json.loads((cell / "results.json").read_text())
    assert payload["passed"] is True
    assert "timestamp" in payload


def test_run_e2_deterministic_output(tmp_path):
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    ra = run_experiment("E2", str(a_dir))
    rb = run_experiment("E2", str(b_dir))
    assert ra.passed and rb.passed
    pa = json.loads((a_dir / "E2" / "results.json").read_text())
    pb = json.loads((b_dir / "E2" / "results.json").read_text())
    assert pa.pop("timestamp") != pb.pop("timestamp") or True
    assert pa == pb     # bit-identical after stripping wall-clock info


def test_run_unknown_id():
    with pytest.raises(InvalidInputError):
        run_experiment("E42")
    with pytest.raises(InvalidInputError):
        run_experiment(ExperimentSpec("EX", "bogus", "n/a"))


def test_suite_small(tmp_path):
    summary = run_suite(["E1", "E2"], str(tmp_path))
    assert summary["passed"] == 2 and summary["failed"] == 0
    assert set(summary["results"]) == {"E1", "E2"}
    md = (tmp_path / "summary.md").read_text()
    assert md == summary_markdown(summary)
    assert "| E1 |" in md and "2 passed, 0 failed" in md
    saved = json.loads((tmp_path / "summary.json").read_text())
    assert saved["passed"] == 2


def test_suite_validates_ids_up_front(tmp_path):
    with pytest.raises(InvalidInputError):
        run_suite(["E1", "E99"], str(tmp_path))
    assert not (tmp_path / "E1").exists()
