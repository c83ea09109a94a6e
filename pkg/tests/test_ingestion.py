import json
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from focusarea.ingestion import (
    RedditComment,
    RedditPost,
    TwiBotUser,
    build_reddit_dataset,
    build_reddit_sextet,
    build_twibot_sextets,
    load_reddit_dump,
    load_twibot_json,
    make_twibot_sextet,
    pair_posts,
    qualifying_commenters,
)
from focusarea.rewards import DictionaryNER
from focusarea.synthetic import fixture_dataset, write_synthetic_dump
from focusarea.types import serialize_dataset

NER = DictionaryNER(["gun bill", "Trump", "Senate"])
T0 = datetime(2023, 3, 1, tzinfo=timezone.utc)


def post(pid, title, days=0.0, comments=(), sub="a"):
    return RedditPost(pid, sub, title, T0 + timedelta(days=days), comments)


def test_pair_within_window():
    a, b = post("a1", "Trump signs gun bill"), post("b1", "Senate debates gun bill", days=10, sub="b")
    pairs = pair_posts([a], [b], NER)
    assert len(pairs) == 1 and pairs[0][2] == {"gun bill"}


def test_pair_window_edges():
    a = post("a1", "Trump signs gun bill")
    assert not pair_posts([a], [post("b1", "gun bill vote", days=25, sub="b")], NER)
    assert pair_posts([a], [post("b1", "gun bill vote", days=21, sub="b")], NER)
    assert not pair_posts([a], [post("b1", "nothing shared", days=1, sub="b")], NER)


def test_pairs_are_greedy_and_disjoint():
    a = post("a1", "gun bill")
    b_far, b_near = post("b1", "gun bill", days=5, sub="b"), post("b2", "gun bill", days=1, sub="b")
    pairs = pair_posts([a], [b_far, b_near], NER)
    assert [(x.post_id, y.post_id) for x, y, _ in pairs] == [("a1", "b2")]


def _comments(prefix, n, score=1):
    return tuple(RedditComment(f"{prefix}{i}", f"text {i}", score) for i in range(n))


def test_cumulative_score_filter():
    p = post("a1", "x", comments=(RedditComment("u", "one", 2), RedditComment("u", "two", -3), RedditComment("v", "ok", 1)))
    assert set(qualifying_commenters(p)) == {"v"}


def test_build_sextet_deterministic():
    pair = (post("a1", "t", comments=_comments("x", 5)), post("b1", "t", comments=_comments("y", 5), sub="b"), frozenset({"t"}))
    s1 = build_reddit_sextet(pair, seed=4, salt="k")
    s2 = build_reddit_sextet(pair, seed=4, salt="k")
    assert s1 == s2
    assert len(s1.gold_c1) == len(s1.gold_c2) == 3
    assert s1.topic_entities == {"t"}
    assert all(u.metadata["subreddit"] == "a" for u in s1.users if u.user_id in s1.gold_c1)


def test_build_sextet_insufficient():
    pair = (post("a1", "t", comments=_comments("x", 2)), post("b1", "t", comments=_comments("y", 5), sub="b"), frozenset())
    assert build_reddit_sextet(pair) is None


def test_users_unique_within_split():
    shared = _comments("x", 3)
    posts_a = [post("a1", "gun bill", comments=shared), post("a2", "Trump", days=40, comments=shared)]
    posts_b = [post("b1", "gun bill", sub="b", comments=_comments("y", 3)),
               post("b2", "Trump", days=40, sub="b", comments=_comments("z", 3))]
    samples = build_reddit_dataset(posts_a, posts_b, NER)
    assert len(samples) == 1


def test_dump_loader_layouts(tmp_path):
    embedded = tmp_path / "posts.jsonl"
    embedded.write_text(json.dumps({"id": "p1", "subreddit": "a", "title": "T", "created_utc": 1_600_000_000,
                                    "comments": [{"author": "u", "body": "hi", "score": 3}]}) + "\n")
    utterances = tmp_path / "utt.jsonl"
    utterances.write_text("\n".join(json.dumps(r) for r in [
        {"id": "p1", "root": "p1", "speaker": "op", "text": "", "timestamp": 1_600_000_000,
         "meta": {"subreddit": "a", "title": "T"}},
        {"id": "c1", "root": "p1", "speaker": "u", "text": "hi", "timestamp": 1_600_000_100, "meta": {"score": 3}},
    ]) + "\n")
    for path in (embedded, utterances):
        (p,) = load_reddit_dump(path)
        assert p.title == "T" and p.comments == (RedditComment("u", "hi", 3),)


def test_synthetic_dump_determinism(tmp_path):
    a = write_synthetic_dump(tmp_path / "a.jsonl", 6, seed=2)
    b = write_synthetic_dump(tmp_path / "b.jsonl", 6, seed=2)
    assert a.read_bytes() == b.read_bytes()
    s1, s2 = fixture_dataset(6, 2), fixture_dataset(6, 2)
    serialize_dataset(s1, tmp_path / "s1.jsonl")
    serialize_dataset(s2, tmp_path / "s2.jsonl")
    assert (tmp_path / "s1.jsonl").read_bytes() == (tmp_path / "s2.jsonl").read_bytes()


def test_splits_are_user_disjoint():
    train, test = fixture_dataset(6, 1, "train"), fixture_dataset(6, 3, "test")
    users = lambda ss: {u for s in ss for u in s.user_ids}  # noqa: E731
    assert not users(train) & users(test)


def tb(uid, cat, bot):
    return TwiBotUser(uid, cat, bot, (f"tweet by {uid}",))


def test_twibot_exact_fit():
    group = [tb(f"b{i}", "politics", True) for i in range(3)] + [tb(f"h{i}", "politics", False) for i in range(3)]
    (s,) = build_twibot_sextets(group)
    assert s.gold_c1 == {"b0", "b1", "b2"} and s.gold_c2 == {"h0", "h1", "h2"}


def test_twibot_mixed_categories_rejected():
    group = [tb("b0", "politics", True), tb("b1", "politics", True), tb("b2", "sports", True)] + [
        tb(f"h{i}", "politics", False) for i in range(3)]
    with pytest.raises(ValueError):
        make_twibot_sextet(group, sample_id="x")


def test_twibot_category_exhaustion():
    users = [tb(f"pb{i}", "politics", True) for i in range(9)] + [tb(f"ph{i}", "politics", False) for i in range(7)]
    users += [tb(f"sb{i}", "sports", True) for i in range(3)] + [tb(f"sh{i}", "sports", False) for i in range(3)]
    samples = build_twibot_sextets(users, seed=1)
    assert len(samples) == 2 + 1
    ids = [u for s in samples for u in s.user_ids]
    assert len(ids) == len(set(ids))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["politics", "business"]), st.booleans()), max_size=40), st.integers(0, 5))
def test_twibot_sextets_valid(spec, seed):
    users = [tb(f"u{i}", cat, bot) for i, (cat, bot) in enumerate(spec)]
    for s in build_twibot_sextets(users, seed=seed):
        cats = {u.user_id: c for u, (c, _) in zip(users, spec)}
        assert len({cats[u] for u in s.user_ids}) == 1
        assert all(u.is_bot for u in users if u.user_id in s.gold_c1)


def test_twibot_loader(tmp_path):
    path = tmp_path / "tb.json"
    path.write_text(json.dumps([
        {"ID": "1", "label": "1", "domain": ["Politics"], "tweet": ["a", " "], "profile": {"description": "bio"}},
        {"ID": "2", "label": "0", "domain": None, "tweet": ["b"]},
    ]))
    (u,) = load_twibot_json(path)
    assert u.is_bot and u.category == "politics" and u.tweets == ("a",) and u.metadata["bio"] == "bio"
