"""Synthetic fixtures: a small debate world, a Reddit-style dump drawn from it,
a scripted task LLM that reacts to focus areas, and a planted-partition graph.

Everything is seeded and offline. The scripted detector returns more of the
correct community the more world entities the focus area names that also
appear in the user summaries, so the quality of a focus area is observable.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from .gateway import ScriptedBackend, TemplateId
from .gateway.parsing import SEPARATOR
from .graph import SocialGraph
from .rewards.entities import DictionaryNER, normalize_entity


@dataclass(frozen=True)
class Topic:
    name: str
    side_a: tuple[str, ...]
    side_b: tuple[str, ...]


TOPICS = (
    Topic("Riverton Dam", ("Harbor Union", "Mayor Quill", "Green Delta Fund"), ("Stone Ridge Council", "Senator Vale", "Farmers Guild")),
    Topic("Copper Rail Line", ("Transit Alliance", "Governor Hale", "Metro Riders"), ("Taxpayer League", "Judge Orrin", "Valley Chamber")),
    Topic("Northfield Vaccine Plan", ("Health Board", "Doctor Amsel", "Parents Network"), ("Liberty Forum", "Pastor Crane", "Freedom Caucus")),
    Topic("Lakeshore Stadium", ("Comets Fan Club", "Owner Brandt", "Jobs Coalition"), ("Neighbors First", "Professor Lind", "Budget Watch")),
    Topic("Port Ellis Wind Farm", ("Clean Coast Group", "Engineer Moss", "Sunrise Youth"), ("Fishermen Union", "Captain Rourke", "Shoreline Trust")),
    Topic("Kestrel Mine Expansion", ("Miners Local", "Director Faye", "Kestrel Corp"), ("Wildlands Society", "Elder Ansa", "River Keepers")),
)

_OPINIONS = (
    "{e} is right about {t}.",
    "Nobody listens to {e} on {t} but they should.",
    "I back {e} and {f} here.",
    "{e} made the only sensible point about {t}.",
)
_VAGUE = (
    "Focus on what they say.",
    "Focus on their views.",
    "Focus on the topic.",
    "Focus on opinions.",
    "Focus on the discussion.",
    "Focus on how they feel.",
)


def world_entities(topics: Sequence[Topic] = TOPICS) -> list[str]:
    return sorted({e for t in topics for e in (t.name, *t.side_a, *t.side_b)})


def side_entities(topics: Sequence[Topic] = TOPICS) -> list[str]:
    return sorted({e for t in topics for e in (*t.side_a, *t.side_b)})


def world_ner(topics: Sequence[Topic] = TOPICS) -> DictionaryNER:
    return DictionaryNER(world_entities(topics))


def _user_comments(rng: random.Random, topic: Topic, side: Sequence[str]) -> list[str]:
    ents = list(side)
    rng.shuffle(ents)
    out = []
    for i, e in enumerate(ents):
        tmpl = rng.choice(_OPINIONS)
        out.append(tmpl.format(e=e, f=ents[(i + 1) % len(ents)], t=topic.name))
    return out


def synthetic_reddit_records(
    n_pairs: int = 20,
    seed: int = 0,
    commenters_per_side: int = 4,
    topics: Sequence[Topic] = TOPICS,
) -> list[dict]:
    """Post records with embedded comments, one pair of opposing posts per sample.

    Pairs are 30 days apart so only the intended posts fall in the same
    pairing window. Each side gets one down-voted commenter who should be
    filtered out.
    """
    rng = random.Random(seed)
    start = datetime(2022, 1, 1, tzinfo=timezone.utc)
    records = []
    for i in range(n_pairs):
        topic = topics[i % len(topics)]
        when = start + timedelta(days=30 * i)
        for sub, side in (("r_alpha", topic.side_a), ("r_beta", topic.side_b)):
            comments = []
            for j in range(commenters_per_side):
                author = f"{sub}_{seed}_{i:03d}_{j}"
                for text in _user_comments(rng, topic, side):
                    comments.append({"author": author, "body": text, "score": rng.randint(1, 40)})
            troll = f"{sub}_{seed}_{i:03d}_neg"
            comments.append({"author": troll, "body": f"{topic.name} is a scam.", "score": -5})
            records.append(
                {
                    "id": f"{sub[2:]}{seed}x{i:03d}",
                    "subreddit": sub,
                    "title": f"Debate over the {topic.name}",
                    "created_utc": int((when + timedelta(hours=rng.randint(0, 12))).timestamp()),
                    "comments": comments,
                }
            )
    return records


def write_synthetic_dump(path: str | Path, n_pairs: int = 20, seed: int = 0) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for r in synthetic_reddit_records(n_pairs, seed):
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    return path


def fixture_dataset(n_pairs: int = 20, seed: int = 0, split: str = "test"):
    """Sextets built through the regular ingestion path from a synthetic dump."""
    from .ingestion import RedditPost, build_reddit_dataset

    posts = {"r_alpha": [], "r_beta": []}
    for r in synthetic_reddit_records(n_pairs, seed):
        posts[r["subreddit"]].append(
            RedditPost(
                r["id"],
                r["subreddit"],
                r["title"],
                r["created_utc"],
                tuple((c["author"], c["body"], c["score"]) for c in r["comments"]),
            )
        )
    return build_reddit_dataset(posts["r_alpha"], posts["r_beta"], world_ner(), seed=seed, split=split)


# scripted task LLM

_USER_LINE = re.compile(r"^(user_\d+): (.*)$", re.MULTILINE)


def _user_summaries(prompt: str) -> list[tuple[str, str]]:
    return _USER_LINE.findall(prompt)


def _focus_from_detection_prompt(prompt: str) -> str:
    lines = prompt.rstrip("\n").split("\n")
    last_instruction = max(i for i, line in enumerate(lines) if SEPARATOR in line)
    return " ".join(" ".join(lines[last_instruction + 1:]).split())


def _mentioned(text: str, entities: Sequence[str]) -> set[str]:
    return {normalize_entity(e) for e in DictionaryNER(entities)(text)}


def _side_of(summary: str, topics: Sequence[Topic]) -> tuple[int, int] | None:
    """(topic index, side) of the first side entity found in ``summary``."""
    low = summary.lower()
    for ti, t in enumerate(topics):
        for side, ents in enumerate((t.side_a, t.side_b)):
            if any(e.lower() in low for e in ents):
                return ti, side
    return None


def focus_quality(focus: str, summaries: Sequence[str], topics: Sequence[Topic] = TOPICS) -> int:
    """Number of distinct side entities named in ``focus`` that some summary also names."""
    named = _mentioned(focus, side_entities(topics))
    present = _mentioned(" ".join(summaries), side_entities(topics))
    return len(named & present)


def scripted_detection_response(prompt: str, topics: Sequence[Topic] = TOPICS) -> str:
    """``k = min(3, q + 1)`` correct members of user_1's side, then the rest."""
    users = _user_summaries(prompt)
    q = focus_quality(_focus_from_detection_prompt(prompt), [s for _, s in users], topics)
    sides = {name: _side_of(s, topics) for name, s in users}
    anchor = users[0][0]
    same = [name for name, _ in users if sides[name] == sides[anchor]]
    k = min(3, q + 1, len(same))
    community = same[:k]
    rest = [name for name, _ in users if name not in community]
    return f"{', '.join(community)} {SEPARATOR} {', '.join(rest)}"


def scripted_gold_focus_response(prompt: str, topics: Sequence[Topic] = TOPICS) -> str:
    """Names the first side entity shared by at least two of the first three users."""
    users = _user_summaries(prompt)
    first, others = [s for _, s in users[:3]], " ".join(s for _, s in users[3:])
    ents = side_entities(topics)
    counts = {e: sum(1 for s in first if _mentioned(s, [e])) for e in ents}
    others_m = _mentioned(others, ents)
    picks = [e for e in ents if counts[e] >= 2 and normalize_entity(e) not in others_m]
    if not picks:
        return "Focus on what they say."
    return f"Focus on {picks[0]}."


def scripted_informative_response(prompt: str, topics: Sequence[Topic] = TOPICS) -> str:
    """Expands a focus area naming one side entity into one naming both sides."""
    focus = prompt.rsplit("communities:\n", 1)[-1].split("\n\n", 1)[0]
    named = _mentioned(focus, side_entities(topics))
    for t in topics:
        for own, other in ((t.side_a, t.side_b), (t.side_b, t.side_a)):
            if any(normalize_entity(e) in named for e in own):
                return (
                    f"Focus on how {own[0]}, {own[1]} and {own[2]} clash with "
                    f"{other[0]} over the {t.name}."
                )
    return focus


def scripted_summary_response(prompt: str) -> str:
    texts = [line.split(": ", 1)[1] for line in prompt.split("\n") if line.startswith(("Reddit Comment: ", "Tweet: "))]
    return "The user mentions " + " ".join(texts)


def scripted_backend(topics: Sequence[Topic] = TOPICS) -> ScriptedBackend:
    """Offline task LLM reacting to the world of ``topics``."""
    return ScriptedBackend(
        responders={
            TemplateId.SUMMARIZE_USER: lambda r: scripted_summary_response(r.rendered_text),
            TemplateId.DETECT_COMMUNITY: lambda r: scripted_detection_response(r.rendered_text, topics),
            TemplateId.GEN_GOLD_FOCUS: lambda r: scripted_gold_focus_response(r.rendered_text, topics),
            TemplateId.MAKE_INFORMATIVE: lambda r: scripted_informative_response(r.rendered_text, topics),
        }
    )


def informativeness_corpus(n: int = 200, seed: int = 0, topics: Sequence[Topic] = TOPICS) -> list[tuple[str, int]]:
    """Separable corpus: vague one-liners (0) against entity-rich sentences (1)."""
    rng = random.Random(seed)
    out = []
    for i in range(n):
        if i % 2 == 0:
            out.append((rng.choice(_VAGUE), 0))
        else:
            t = rng.choice(topics)
            own, other = rng.sample([t.side_a, t.side_b], 2)
            a, b = rng.sample(list(own), 2)
            out.append((f"Focus on how {a} and {b} clash with {rng.choice(other)} over the {t.name}.", 1))
    rng.shuffle(out)
    return out


# downstream graph fixture


def planted_partition_graph(
    n_users: int = 60,
    seed: int = 0,
    dim: int = 8,
    separation: float = 0.5,
    edge_prob: float = 0.04,
) -> tuple[SocialGraph, dict[str, np.ndarray], dict[str, int]]:
    """Two user classes with weakly separated features and class-blind user edges.

    Class 0 users follow two of three high-factuality sources, class 1 users
    two of three low ones. Returns the graph, raw features and true classes.
    """
    rng = np.random.default_rng(seed)
    r = random.Random(seed)
    g = SocialGraph()
    high = [f"src_high_{i}" for i in range(3)]
    low = [f"src_low_{i}" for i in range(3)]
    for s in high:
        g.add_source(s, factuality="high")
    for s in low:
        g.add_source(s, factuality="low")
    features, classes = {}, {}
    axis = np.eye(dim)[0]
    for i in range(n_users):
        uid = f"user_{i:03d}"
        c = i % 2
        g.add_user(uid)
        classes[uid] = c
        features[uid] = rng.normal(0.0, 1.0, dim) + (separation if c else -separation) * axis
        for s in r.sample(high if c == 0 else low, 2):
            g.add_edge(uid, s)
    users = g.users()
    for a in range(len(users)):
        for b in range(a + 1, len(users)):
            if r.random() < edge_prob:
                g.add_edge(users[a], users[b])
    return g, features, classes


def oracle_communities(sextet: Sequence[str], classes: dict[str, int]) -> list[list[str]]:
    """True split of a sampled sextet: the anchor's class, then the others."""
    anchor = classes[sextet[0]]
    same = [u for u in sextet if classes[u] == anchor]
    other = [u for u in sextet if classes[u] != anchor]
    return [same, other]
