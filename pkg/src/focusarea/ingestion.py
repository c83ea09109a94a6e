"""Build sextet datasets from Reddit and TwiBot-style dumps."""

from __future__ import annotations

import json
import logging
import random
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .rewards.entities import EntityExtractor, normalize_entity
from .types import (
    COMMUNITY_SIZE,
    Platform,
    SampleSextet,
    Split,
    UserRecord,
    anonymize_id,
)

log = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400
DEFAULT_WINDOW_DAYS = 21


def parse_timestamp(value) -> datetime:
    """Epoch seconds (int/float/numeric str) or ISO-8601 to an aware UTC datetime."""
    if isinstance(value, datetime):
        return value if value.tzinfo else value.replace(tzinfo=timezone.utc)
    if isinstance(value, (int, float)):
        return datetime.fromtimestamp(float(value), tz=timezone.utc)
    if isinstance(value, str):
        try:
            return datetime.fromtimestamp(float(value), tz=timezone.utc)
        except ValueError:
            dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
            return dt if dt.tzinfo else dt.replace(tzinfo=timezone.utc)
    raise ValueError(f"unparseable timestamp {value!r}")


@dataclass(frozen=True)
class RedditComment:
    user_id: str
    text: str
    upvote_score: int


@dataclass(frozen=True)
class RedditPost:
    post_id: str
    subreddit: str
    title: str
    created_at: datetime
    comments: tuple[RedditComment, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "created_at", parse_timestamp(self.created_at))
        object.__setattr__(
            self,
            "comments",
            tuple(c if isinstance(c, RedditComment) else RedditComment(*c) for c in self.comments),
        )


@dataclass(frozen=True)
class TwiBotUser:
    user_id: str
    category: str
    is_bot: bool
    tweets: tuple[str, ...]
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.category:
            raise ValueError(f"TwiBot user {self.user_id!r} has no category")
        object.__setattr__(self, "category", self.category.lower())
        object.__setattr__(self, "tweets", tuple(self.tweets))


TWIBOT_CATEGORIES = ("politics", "business", "entertainment", "sports")


def pair_posts(
    posts_a: Sequence[RedditPost],
    posts_b: Sequence[RedditPost],
    ner: EntityExtractor,
    window_days: int = DEFAULT_WINDOW_DAYS,
) -> list[tuple[RedditPost, RedditPost, frozenset[str]]]:
    """Pair posts across two subreddits that share a title entity within the window.

    Each post is used at most once; candidate pairs are taken greedily in
    order of increasing time gap (ties by post ids).
    """
    window = window_days * SECONDS_PER_DAY
    ents_a = {p.post_id: {normalize_entity(e) for e in ner(p.title)} for p in posts_a}
    ents_b = {p.post_id: {normalize_entity(e) for e in ner(p.title)} for p in posts_b}
    candidates = []
    for a in posts_a:
        for b in posts_b:
            gap = abs((a.created_at - b.created_at).total_seconds())
            if gap > window:
                continue
            shared = ents_a[a.post_id] & ents_b[b.post_id]
            if shared:
                candidates.append((gap, a.post_id, b.post_id, a, b, frozenset(shared)))
    candidates.sort(key=lambda c: c[:3])
    used_a, used_b, pairs = set(), set(), []
    for _, aid, bid, a, b, shared in candidates:
        if aid in used_a or bid in used_b:
            continue
        used_a.add(aid)
        used_b.add(bid)
        pairs.append((a, b, shared))
    return pairs


def qualifying_commenters(post: RedditPost) -> dict[str, list[str]]:
    """Commenters whose up-vote score summed over their comments on ``post`` is positive."""
    score: dict[str, int] = defaultdict(int)
    texts: dict[str, list[str]] = defaultdict(list)
    for c in post.comments:
        score[c.user_id] += c.upvote_score
        texts[c.user_id].append(c.text)
    return {u: texts[u] for u in sorted(score) if score[u] > 0 and any(t.strip() for t in texts[u])}


def build_reddit_sextet(
    pair: tuple[RedditPost, RedditPost, frozenset[str]],
    *,
    seed: int = 0,
    users_per_side: int = COMMUNITY_SIZE,
    exclude: set[str] | None = None,
    salt: str = "",
    split: Split | str = Split.TEST,
) -> SampleSextet | None:
    """Sample three qualifying commenters per post; ``None`` if a side falls short.

    ``exclude`` holds raw user ids already used in the split; ids chosen here
    are added to it.
    """
    a, b, shared = pair
    exclude = exclude if exclude is not None else set()
    sample_id = f"reddit-{a.post_id}-{b.post_id}"
    rng = random.Random(f"{seed}:{sample_id}")
    side_a, side_b = qualifying_commenters(a), qualifying_commenters(b)
    both = set(side_a) & set(side_b)
    pools = []
    for side in (side_a, side_b):
        pool = [u for u in side if u not in exclude and u not in both]
        if len(pool) < users_per_side:
            return None
        pools.append(pool)
    chosen = [rng.sample(pool, users_per_side) for pool in pools]

    users, groups = [], []
    for post, side, picked in zip((a, b), (side_a, side_b), chosen):
        ids = []
        for raw_id in sorted(picked):
            uid = anonymize_id(raw_id, salt, Platform.REDDIT)
            users.append(UserRecord(uid, Platform.REDDIT, tuple(side[raw_id]), {"subreddit": post.subreddit}))
            ids.append(uid)
        groups.append(frozenset(ids))
    order = [u.user_id for u in users]
    rng.shuffle(order)
    exclude.update(chosen[0])
    exclude.update(chosen[1])
    return SampleSextet(
        sample_id=sample_id,
        users=tuple(users),
        gold_c1=groups[0],
        gold_c2=groups[1],
        presentation_order=tuple(order),
        split=split,
        topic_entities=shared,
    )


def build_reddit_dataset(
    posts_a: Sequence[RedditPost],
    posts_b: Sequence[RedditPost],
    ner: EntityExtractor,
    *,
    seed: int = 0,
    window_days: int = DEFAULT_WINDOW_DAYS,
    salt: str = "",
    split: Split | str = Split.TEST,
) -> list[SampleSextet]:
    used: set[str] = set()
    out = []
    for pair in pair_posts(posts_a, posts_b, ner, window_days):
        s = build_reddit_sextet(pair, seed=seed, exclude=used, salt=salt, split=split)
        if s is not None:
            out.append(s)
    return sorted(out, key=lambda s: s.sample_id)


def make_twibot_sextet(
    group: Sequence[TwiBotUser],
    *,
    sample_id: str,
    seed: int = 0,
    salt: str = "",
    split: Split | str = Split.TEST,
    bots_per_sample: int = COMMUNITY_SIZE,
) -> SampleSextet:
    """One sextet from six same-category users; bots form gold_c1."""
    cats = {u.category for u in group}
    if len(cats) != 1:
        raise ValueError(f"mixed categories in candidate group: {sorted(cats)}")
    bots = [u for u in group if u.is_bot]
    humans = [u for u in group if not u.is_bot]
    if len(group) != 2 * COMMUNITY_SIZE or len(bots) != bots_per_sample:
        raise ValueError(f"group needs {bots_per_sample} bots and {len(group) - bots_per_sample} humans")

    def record(u: TwiBotUser) -> UserRecord:
        uid = anonymize_id(u.user_id, salt, Platform.TWITTER) if salt else u.user_id
        return UserRecord(uid, Platform.TWITTER, u.tweets, dict(u.metadata))

    users = [record(u) for u in bots + humans]
    order = [u.user_id for u in users]
    random.Random(f"{seed}:{sample_id}").shuffle(order)
    return SampleSextet(
        sample_id=sample_id,
        users=tuple(users),
        gold_c1=frozenset(u.user_id for u in users[: len(bots)]),
        gold_c2=frozenset(u.user_id for u in users[len(bots):]),
        presentation_order=tuple(order),
        split=split,
        topic_entities=frozenset({cats.pop()}),
    )


def build_twibot_sextets(
    users: Iterable[TwiBotUser],
    per_sample: int = 2 * COMMUNITY_SIZE,
    *,
    bots_per_sample: int = COMMUNITY_SIZE,
    seed: int = 0,
    salt: str = "",
    split: Split | str = Split.TEST,
    limit: int | None = None,
) -> list[SampleSextet]:
    """Disjoint bot/human sextets within each category.

    A category stops emitting once it runs out of bots or humans.
    """
    humans_per_sample = per_sample - bots_per_sample
    by_cat: dict[str, tuple[list, list]] = defaultdict(lambda: ([], []))
    for u in users:
        if not u.tweets:
            continue
        by_cat[u.category][0 if u.is_bot else 1].append(u)
    out = []
    for cat in sorted(by_cat):
        bots, humans = (sorted(x, key=lambda u: u.user_id) for x in by_cat[cat])
        rng = random.Random(f"{seed}:{cat}")
        rng.shuffle(bots)
        rng.shuffle(humans)
        n = min(len(bots) // bots_per_sample, len(humans) // humans_per_sample)
        for i in range(n):
            group = bots[i * bots_per_sample:(i + 1) * bots_per_sample] + humans[
                i * humans_per_sample:(i + 1) * humans_per_sample
            ]
            out.append(
                make_twibot_sextet(
                    group, sample_id=f"twibot-{cat}-{i:04d}", seed=seed, salt=salt, split=split,
                    bots_per_sample=bots_per_sample,
                )
            )
    out.sort(key=lambda s: s.sample_id)
    return out[:limit] if limit is not None else out


def _iter_jsonl(path: str | Path) -> Iterator[dict]:
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield json.loads(line)


def load_reddit_dump(path: str | Path) -> list[RedditPost]:
    """Read posts from JSONL.

    Two layouts are accepted. Post records with embedded comments::

        {"id", "subreddit", "title", "created_utc", "comments": [{"author", "body", "score"}]}

    or ConvoKit-style utterances, one per line, where a post is the
    utterance whose ``id`` equals its ``root``::

        {"id", "root", "speaker", "text", "timestamp", "meta": {"score", "subreddit", "title"}}
    """
    records = list(_iter_jsonl(path))
    posts: dict[str, dict] = {}
    comments: dict[str, list[RedditComment]] = defaultdict(list)
    for r in records:
        if "comments" in r:
            posts[r["id"]] = r
            comments[r["id"]].extend(
                RedditComment(str(c["author"]), c.get("body", ""), int(c.get("score", 0))) for c in r["comments"]
            )
            continue
        meta = r.get("meta", {})
        if r.get("id") == r.get("root"):
            posts[r["id"]] = {
                "id": r["id"],
                "subreddit": r.get("subreddit") or meta.get("subreddit", ""),
                "title": meta.get("title") or r.get("title", ""),
                "created_utc": r.get("timestamp"),
            }
        else:
            comments[r["root"]].append(
                RedditComment(str(r["speaker"]), r.get("text", ""), int(meta.get("score", r.get("score", 0))))
            )
    out = []
    for pid in sorted(posts):
        p = posts[pid]
        out.append(
            RedditPost(
                post_id=str(pid),
                subreddit=p.get("subreddit", ""),
                title=p.get("title", ""),
                created_at=p.get("created_utc", p.get("created_at")),
                comments=tuple(comments.get(pid, ())),
            )
        )
    return out


def load_twibot_json(path: str | Path) -> list[TwiBotUser]:
    """Read TwiBot-20 style records (``ID``, ``profile``, ``tweet``, ``label``, ``domain``)."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    users = []
    for r in data:
        domain = r.get("domain") or r.get("category")
        if isinstance(domain, list):
            domain = domain[0] if domain else None
        if not domain:
            log.warning("skipping TwiBot user %s without category", r.get("ID"))
            continue
        profile = r.get("profile") or {}
        meta = {
            "bio": profile.get("description", ""),
            "followers": profile.get("followers_count", ""),
            "following": profile.get("friends_count", ""),
            "likes": profile.get("favourites_count", ""),
            "tweets": profile.get("statuses_count", ""),
            "verified": profile.get("verified", ""),
        }
        users.append(
            TwiBotUser(
                user_id=str(r["ID"]),
                category=str(domain),
                is_bot=str(r.get("label")) == "1",
                tweets=tuple(t for t in (r.get("tweet") or []) if t and t.strip()),
                metadata={k: str(v).strip() for k, v in meta.items() if str(v).strip()},
            )
        )
    return users
