"""Domain types shared across the pipeline, plus JSONL (de)serialization.

Every record is an immutable dataclass validated on construction. A dataset
file holds one :class:`SampleSextet` per line, each line carrying
``"schema": "v1"`` and the full user records, so a file is self-contained.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Sequence

SCHEMA_VERSION = "v1"
SEXTET_SIZE = 6
COMMUNITY_SIZE = 3


class DatasetValidationError(ValueError):
    """A record violates a type invariant.

    ``sample_id`` and ``field`` identify the offending record and attribute.
    """

    def __init__(self, message: str, *, sample_id: str | None = None, field: str | None = None):
        self.sample_id = sample_id
        self.field = field
        where = []
        if sample_id is not None:
            where.append(f"sample_id={sample_id!r}")
        if field is not None:
            where.append(f"field={field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class Platform(str, enum.Enum):
    REDDIT = "reddit"
    TWITTER = "twitter"


class Split(str, enum.Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


class FocusSource(str, enum.Enum):
    GOLD_LLM = "gold_llm"
    SUPERVISED_MODEL = "supervised_model"
    RL_MODEL = "rl_model"
    NONE = "none"


def anonymize_id(platform_id: str, salt: str, platform: Platform | str = Platform.REDDIT) -> str:
    """Salted hash of a platform user id; stable for a given salt."""
    platform = Platform(platform).value
    digest = hashlib.sha256(f"{salt}\x1f{platform}\x1f{platform_id}".encode()).hexdigest()
    return "u" + digest[:15]


@dataclass(frozen=True)
class UserRecord:
    user_id: str
    platform: Platform
    raw_texts: tuple[str, ...]
    metadata: Mapping[str, str] = field(default_factory=dict)
    summary: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.user_id, str) or not self.user_id.strip():
            raise DatasetValidationError("user_id must be a nonempty string", field="user_id")
        object.__setattr__(self, "platform", Platform(self.platform))
        object.__setattr__(self, "raw_texts", tuple(self.raw_texts))
        object.__setattr__(
            self, "metadata", MappingProxyType({str(k): str(v) for k, v in dict(self.metadata).items()})
        )
        if self.summary is not None and not self.summary.strip():
            raise DatasetValidationError(
                f"summary of user {self.user_id!r} is set but empty", field="summary"
            )
        if self.summary is None and not self.raw_texts:
            raise DatasetValidationError(
                f"user {self.user_id!r} has no raw_texts and no summary", field="raw_texts"
            )

    def with_summary(self, summary: str) -> "UserRecord":
        return UserRecord(self.user_id, self.platform, self.raw_texts, dict(self.metadata), summary)

    def to_dict(self) -> dict[str, Any]:
        return {
            "user_id": self.user_id,
            "platform": self.platform.value,
            "raw_texts": list(self.raw_texts),
            "metadata": dict(self.metadata),
            "summary": self.summary,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "UserRecord":
        return cls(
            user_id=d["user_id"],
            platform=d["platform"],
            raw_texts=tuple(d.get("raw_texts", ())),
            metadata=d.get("metadata", {}),
            summary=d.get("summary"),
        )


@dataclass(frozen=True)
class SampleSextet:
    """Six users drawn from two gold communities of three."""

    sample_id: str
    users: tuple[UserRecord, ...]
    gold_c1: frozenset[str]
    gold_c2: frozenset[str]
    presentation_order: tuple[str, ...]
    split: Split = Split.TEST
    topic_entities: frozenset[str] = frozenset()
    gold_focus_area: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "users", tuple(self.users))
        object.__setattr__(self, "gold_c1", frozenset(self.gold_c1))
        object.__setattr__(self, "gold_c2", frozenset(self.gold_c2))
        object.__setattr__(self, "topic_entities", frozenset(self.topic_entities))
        object.__setattr__(self, "presentation_order", tuple(self.presentation_order))
        sid = self.sample_id
        try:
            object.__setattr__(self, "split", Split(self.split))
        except ValueError:
            raise DatasetValidationError(f"unknown split {self.split!r}", sample_id=sid, field="split")
        if not isinstance(sid, str) or not sid:
            raise DatasetValidationError("sample_id must be a nonempty string", field="sample_id")
        if len(self.users) != SEXTET_SIZE:
            raise DatasetValidationError(
                f"expected {SEXTET_SIZE} users, got {len(self.users)}", sample_id=sid, field="users"
            )
        ids = [u.user_id for u in self.users]
        if len(set(ids)) != SEXTET_SIZE:
            raise DatasetValidationError("duplicate user ids", sample_id=sid, field="users")
        for name in ("gold_c1", "gold_c2"):
            if len(getattr(self, name)) != COMMUNITY_SIZE:
                raise DatasetValidationError(
                    f"{name} must hold exactly {COMMUNITY_SIZE} users", sample_id=sid, field=name
                )
        if self.gold_c1 & self.gold_c2:
            raise DatasetValidationError("gold communities overlap", sample_id=sid, field="gold_c2")
        if (self.gold_c1 | self.gold_c2) != set(ids):
            raise DatasetValidationError(
                "gold communities do not partition the six users", sample_id=sid, field="gold_c1"
            )
        if sorted(self.presentation_order) != sorted(ids):
            raise DatasetValidationError(
                "presentation_order is not a permutation of the user ids",
                sample_id=sid,
                field="presentation_order",
            )
        if self.gold_focus_area is not None and not self.gold_focus_area.strip():
            raise DatasetValidationError("gold_focus_area is empty", sample_id=sid, field="gold_focus_area")

    @property
    def user_ids(self) -> frozenset[str]:
        return frozenset(u.user_id for u in self.users)

    def user(self, user_id: str) -> UserRecord:
        for u in self.users:
            if u.user_id == user_id:
                return u
        raise KeyError(user_id)

    def ordered_users(self) -> list[UserRecord]:
        """Users in presentation order."""
        return [self.user(uid) for uid in self.presentation_order]

    def gold_sorted_users(self) -> list[UserRecord]:
        """Users of gold_c1 then gold_c2, each side sorted by id."""
        return [self.user(uid) for uid in sorted(self.gold_c1)] + [
            self.user(uid) for uid in sorted(self.gold_c2)
        ]

    def replace(self, **changes: Any) -> "SampleSextet":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return SampleSextet(**values)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": SCHEMA_VERSION,
            "sample_id": self.sample_id,
            "split": self.split.value,
            "users": [u.to_dict() for u in self.users],
            "gold_c1": sorted(self.gold_c1),
            "gold_c2": sorted(self.gold_c2),
            "presentation_order": list(self.presentation_order),
            "topic_entities": sorted(self.topic_entities),
            "gold_focus_area": self.gold_focus_area,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SampleSextet":
        sid = d.get("sample_id")
        if d.get("schema") != SCHEMA_VERSION:
            raise DatasetValidationError(
                f"unsupported schema {d.get('schema')!r}", sample_id=sid, field="schema"
            )
        for key in ("sample_id", "users", "gold_c1", "gold_c2", "presentation_order"):
            if key not in d:
                raise DatasetValidationError(f"missing field {key!r}", sample_id=sid, field=key)
        try:
            users = tuple(UserRecord.from_dict(u) for u in d["users"])
        except DatasetValidationError as exc:
            raise DatasetValidationError(str(exc), sample_id=sid, field=f"users.{exc.field}") from exc
        return cls(
            sample_id=d["sample_id"],
            users=users,
            gold_c1=frozenset(d["gold_c1"]),
            gold_c2=frozenset(d["gold_c2"]),
            presentation_order=tuple(d["presentation_order"]),
            split=d.get("split", Split.TEST),
            topic_entities=frozenset(d.get("topic_entities", ())),
            gold_focus_area=d.get("gold_focus_area"),
        )


@dataclass(frozen=True)
class FocusArea:
    text: str
    source: FocusSource = FocusSource.NONE
    # ordering references or other issues noticed by post-filters
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "source", FocusSource(self.source))
        object.__setattr__(self, "flags", tuple(self.flags))
        if self.source is not FocusSource.NONE and not self.text.strip():
            raise DatasetValidationError("focus area text is empty", field="text")

    @classmethod
    def none(cls) -> "FocusArea":
        return cls("", FocusSource.NONE)


@dataclass(frozen=True)
class CommunityPrediction:
    community: frozenset[str]
    remainder: frozenset[str]
    raw_response: str = ""
    dropped: tuple[str, ...] = ()
    parse_warning: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "community", frozenset(self.community))
        object.__setattr__(self, "remainder", frozenset(self.remainder))
        object.__setattr__(self, "dropped", tuple(self.dropped))
        if self.community & self.remainder:
            raise ValueError("community and remainder overlap")


REWARD_COMPONENTS = ("rf1_coverage", "rf2_entity", "rf3_informativeness", "rf4_length", "rouge")


@dataclass(frozen=True)
class RewardVector:
    """Per-sample reward components; unset components are ``None``."""

    rf1_coverage: float | None = None
    rf2_entity: float | None = None
    rf3_informativeness: float | None = None
    rf4_length: float | None = None
    rouge: float | None = None
    combined: float | None = None

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValueError(f"{f.name}={v!r} outside [0, 1]")

    def as_dict(self) -> dict[str, float | None]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def serialize_dataset(samples: Iterable[SampleSextet], path: str | Path) -> None:
    """Write samples as JSONL, one line per sample."""
    lines = []
    for s in samples:
        # re-run validation so hand-built or mutated records cannot slip through
        SampleSextet.from_dict(s.to_dict())
        lines.append(json.dumps(s.to_dict(), sort_keys=True, ensure_ascii=False))
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


def deserialize_dataset(path: str | Path) -> list[SampleSextet]:
    samples = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetValidationError(f"line {lineno}: invalid JSON ({exc})") from exc
            samples.append(SampleSextet.from_dict(record))
    return samples


def digest_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
