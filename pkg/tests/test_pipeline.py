import json

import pytest

from focusarea.gateway import BackendError, ScriptedBackend, ScriptRule, TemplateId
from focusarea.pipeline import (
    add_gold_focus,
    evaluate,
    gold_focus,
    no_focus,
    run_fixture_pipeline,
    run_purity_fixture,
    summarize_dataset,
    write_eval,
)
from focusarea.synthetic import fixture_dataset, focus_quality, scripted_backend


@pytest.fixture(scope="module")
def ready():
    backend = scripted_backend()
    samples = add_gold_focus(summarize_dataset(fixture_dataset(6, 0), backend), backend)
    return backend, samples


def test_fixture_dataset_shape():
    samples = fixture_dataset(6, 0)
    assert len(samples) == 6
    for s in samples:
        assert len(s.users) == 6 and len(s.gold_c1) == len(s.gold_c2) == 3


def test_gold_focus_names_a_discriminative_entity(ready):
    _, samples = ready
    for s in samples:
        assert s.gold_focus_area.startswith("Focus on ")
        summaries = [u.summary for u in s.users]
        assert focus_quality(s.gold_focus_area, summaries) >= 1


def test_scripted_detector_rewards_better_focus(ready):
    backend, samples = ready
    none = evaluate(samples, backend, no_focus).summary["dataset_coverage"]
    gold = evaluate(samples, backend, gold_focus).summary["dataset_coverage"]
    assert gold > none


def test_evaluate_skips_failing_samples(ready):
    _, samples = ready
    flaky = scripted_backend()
    calls = {"n": 0}
    detect = flaky.responders[TemplateId.DETECT_COMMUNITY]

    def sometimes(req):
        calls["n"] += 1
        if calls["n"] == 1:
            raise BackendError("boom")
        return detect(req)

    flaky.responders[TemplateId.DETECT_COMMUNITY] = sometimes
    result = evaluate(samples, flaky, no_focus)
    assert len(result.summary["skipped"]) == 1
    assert result.summary["n_samples"] == len(samples) - 1


def test_evaluate_raises_when_nothing_survives(ready):
    _, samples = ready
    broken = ScriptedBackend([ScriptRule("x", pattern="^never$")])
    with pytest.raises(BackendError):
        evaluate(samples, broken, no_focus)


def test_write_eval_files(ready, tmp_path):
    backend, samples = ready
    write_eval(evaluate(samples, backend, gold_focus), tmp_path, {"seed": 3})
    summary = json.loads((tmp_path / "eval_summary.json").read_text())
    assert summary["seed"] == 3 and summary["n_samples"] == len(samples)
    header = (tmp_path / "eval_samples.csv").read_text().splitlines()[0]
    assert header.startswith("sample_id,focus_source,focus_area")


def test_fixture_pipeline_is_byte_identical(tmp_path):
    run_fixture_pipeline(tmp_path / "a", seed=5, n_pairs=6)
    run_fixture_pipeline(tmp_path / "b", seed=5, n_pairs=6)
    for name in ("dataset.jsonl", "summarized.jsonl", "eval_samples.csv", "eval_summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_fixture_pipeline_depends_on_seed(tmp_path):
    run_fixture_pipeline(tmp_path / "a", seed=1, n_pairs=6)
    run_fixture_pipeline(tmp_path / "b", seed=2, n_pairs=6)
    assert (tmp_path / "a" / "dataset.jsonl").read_bytes() != (tmp_path / "b" / "dataset.jsonl").read_bytes()


def test_purity_fixture_adds_edges():
    result = run_purity_fixture(seed=1, n_samples=5)
    assert result["edges_added"] > 0
    assert 0 < result["before"] <= 1 and 0 < result["after"] <= 1
