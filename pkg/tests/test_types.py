import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import IDS, make_sample
from focusarea.types import (
    CommunityPrediction,
    DatasetValidationError,
    FocusArea,
    FocusSource,
    Platform,
    RewardVector,
    SampleSextet,
    UserRecord,
    anonymize_id,
    deserialize_dataset,
    serialize_dataset,
)


def test_empty_dataset_round_trip(tmp_path):
    path = tmp_path / "d.jsonl"
    serialize_dataset([], path)
    assert path.read_text() == ""
    assert deserialize_dataset(path) == []


def test_single_sextet_round_trip(tmp_path, sample):
    path = tmp_path / "d.jsonl"
    serialize_dataset([sample], path)
    assert len(path.read_text().splitlines()) == 1
    assert deserialize_dataset(path) == [sample]


def test_overlapping_gold_rejected():
    with pytest.raises(DatasetValidationError) as err:
        make_sample().replace(gold_c2=frozenset({"a1", "b2", "b3"}))
    assert err.value.sample_id == "s0"


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda d: d.pop("gold_c1"), "gold_c1"),
        (lambda d: d.update(gold_c1=["a1", "a2"]), "gold_c1"),
        (lambda d: d.update(presentation_order=["a1"] * 6), "presentation_order"),
        (lambda d: d.update(split="holdout"), "split"),
        (lambda d: d.update(schema="v0"), "schema"),
        (lambda d: d["users"][0].update(user_id=""), "users.user_id"),
    ],
)
def test_deserialize_names_offending_field(tmp_path, sample, mutate, field):
    d = sample.to_dict()
    mutate(d)
    path = tmp_path / "bad.jsonl"
    path.write_text(json.dumps(d) + "\n")
    with pytest.raises(DatasetValidationError) as err:
        deserialize_dataset(path)
    assert err.value.field == field


def test_user_needs_texts_or_summary():
    with pytest.raises(DatasetValidationError):
        UserRecord("u", Platform.REDDIT, ())
    UserRecord("u", Platform.REDDIT, (), summary="The user mentions X.")


def test_anonymize_is_salted_and_stable():
    assert anonymize_id("bob", "s1") == anonymize_id("bob", "s1")
    assert anonymize_id("bob", "s1") != anonymize_id("bob", "s2")
    assert "bob" not in anonymize_id("bob", "s1")


def test_prediction_rejects_overlap():
    with pytest.raises(ValueError):
        CommunityPrediction(frozenset({"a"}), frozenset({"a", "b"}))


def test_reward_vector_bounds():
    with pytest.raises(ValueError):
        RewardVector(rf1_coverage=1.5)
    assert RewardVector(rouge=0.3).as_dict()["rouge"] == 0.3


def test_none_focus_area():
    fa = FocusArea.none()
    assert fa.source is FocusSource.NONE and fa.text == ""


_text = st.text(st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=30).filter(str.strip)


@st.composite
def sextets(draw):
    ids = draw(st.lists(st.from_regex(r"u[0-9a-f]{6}", fullmatch=True), min_size=6, max_size=6, unique=True))
    summaries = [draw(st.one_of(st.none(), _text)) for _ in ids]
    order = draw(st.permutations(ids))
    gold = draw(st.one_of(st.none(), _text))
    return make_sample(draw(_text), ids, summaries, order, gold)


@settings(max_examples=60, deadline=None)
@given(st.lists(sextets(), max_size=4))
def test_round_trip_property(tmp_path_factory, samples):
    path = tmp_path_factory.mktemp("rt") / "d.jsonl"
    serialize_dataset(samples, path)
    assert deserialize_dataset(path) == samples


def test_ordered_views(sample):
    s = sample.replace(presentation_order=tuple(reversed(IDS)))
    assert [u.user_id for u in s.ordered_users()] == list(reversed(IDS))
    assert [u.user_id for u in s.gold_sorted_users()] == list(IDS)
    assert isinstance(s, SampleSextet)
