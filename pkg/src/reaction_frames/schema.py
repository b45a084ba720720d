"""Canonical data model: headlines, reaction frames, themes, corpus stats.

A reaction frame bundles six dimensions of how readers respond to a news
headline: free-text writer intents, reader perceptions and reader actions,
an ordinal 1-5 spread score, the label readers perceived, and the
fact-checked gold label.
"""
from __future__ import annotations

import datetime as dt
import hashlib
import json
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence


class Topic(str, Enum):
    COVID = "covid"
    CLIMATE = "climate"
    CANCER = "cancer"


class GoldLabel(str, Enum):
    REAL = "real"
    MISINFO = "misinfo"


class PerceivedLabel(str, Enum):
    REAL = "real"
    MISINFO = "misinfo"
    UNSURE = "unsure"


class Split(str, Enum):
    TRAIN = "train"
    DEV = "dev"
    TEST = "test"


class Dimension(str, Enum):
    """The six annotated frame dimensions."""

    WRITER_INTENT = "writer_intent"
    READER_PERCEPTION = "reader_perception"
    READER_ACTION = "reader_action"
    SPREAD = "spread"
    PERCEIVED_LABEL = "perceived_label"
    GOLD_LABEL = "gold_label"


FREE_TEXT_DIMENSIONS = (
    Dimension.WRITER_INTENT,
    Dimension.READER_PERCEPTION,
    Dimension.READER_ACTION,
)

CATEGORICAL_DIMENSIONS = (
    Dimension.SPREAD,
    Dimension.PERCEIVED_LABEL,
    Dimension.GOLD_LABEL,
)


class Theme(str, Enum):
    CLIMATE_STATISTICS = "climate statistics"
    NATURAL_DISASTERS = "natural disasters"
    ENTERTAINMENT = "entertainment"
    IDEOLOGY = "ideology"
    DISEASE_TRANSMISSION = "disease transmission"
    DISEASE_STATISTICS = "disease statistics"
    HEALTH_TREATMENTS = "health treatments"
    PROTECTIVE_GEAR = "protective gear"
    GOVERNMENT_ENTITIES = "government entities"
    SOCIETY = "society"
    TECHNOLOGY = "technology"

    @property
    def applicable_topics(self) -> frozenset[Topic]:
        return THEME_TOPICS[self]


# Which news topics each theme occurs in. Cancer is a transfer-only topic
# and carries no theme inventory of its own.
THEME_TOPICS: dict[Theme, frozenset[Topic]] = {
    Theme.CLIMATE_STATISTICS: frozenset({Topic.CLIMATE}),
    Theme.NATURAL_DISASTERS: frozenset({Topic.CLIMATE}),
    Theme.ENTERTAINMENT: frozenset({Topic.CLIMATE}),
    Theme.IDEOLOGY: frozenset({Topic.CLIMATE}),
    Theme.DISEASE_TRANSMISSION: frozenset({Topic.COVID}),
    Theme.DISEASE_STATISTICS: frozenset({Topic.COVID}),
    Theme.HEALTH_TREATMENTS: frozenset({Topic.COVID}),
    Theme.PROTECTIVE_GEAR: frozenset({Topic.COVID}),
    Theme.GOVERNMENT_ENTITIES: frozenset({Topic.CLIMATE, Topic.COVID}),
    Theme.SOCIETY: frozenset({Topic.CLIMATE, Topic.COVID}),
    Theme.TECHNOLOGY: frozenset({Topic.CLIMATE, Topic.COVID}),
}

UNKNOWN_INTENT = "unknown intent"


@dataclass(frozen=True)
class HeadlineRecord:
    """One news headline with provenance and (optionally) a split."""

    id: str
    text: str
    topic: Topic
    gold_label: GoldLabel
    source: str = ""
    date: Optional[dt.date] = None
    split: Optional[Split] = None


@dataclass(frozen=True)
class ReactionFrame:
    """Annotation bundle for one headline across the six dimensions."""

    headline_id: str
    writer_intents: tuple[str, ...] = ()
    reader_perceptions: tuple[str, ...] = ()
    reader_actions: tuple[str, ...] = ()
    spread: int = 3
    perceived_label: PerceivedLabel = PerceivedLabel.UNSURE
    gold_label: GoldLabel = GoldLabel.REAL
    themes: frozenset[Theme] = frozenset()

    def free_text(self, dimension: Dimension) -> tuple[str, ...]:
        if dimension is Dimension.WRITER_INTENT:
            return self.writer_intents
        if dimension is Dimension.READER_PERCEPTION:
            return self.reader_perceptions
        if dimension is Dimension.READER_ACTION:
            return self.reader_actions
        raise ValueError(f"{dimension.value} is not a free-text dimension")

    def categorical_text(self, dimension: Dimension) -> str:
        """Surface form used when a categorical dimension is a generation target."""
        if dimension is Dimension.SPREAD:
            return str(self.spread)
        if dimension is Dimension.PERCEIVED_LABEL:
            return self.perceived_label.value
        if dimension is Dimension.GOLD_LABEL:
            return self.gold_label.value
        raise ValueError(f"{dimension.value} is not a categorical dimension")


@dataclass(frozen=True)
class DatasetStats:
    headlines: int
    unique_intents: int
    unique_perceptions: int
    unique_actions: int
    total_pairs: int


@dataclass(frozen=True)
class Record:
    """A headline together with its (possibly absent) reaction frame."""

    headline: HeadlineRecord
    frame: Optional[ReactionFrame] = None


def normalize_text(text: str) -> str:
    """Normalization used for uniqueness counting and exact dedup."""
    return text.strip().lower()


def validate_record(
    frame: ReactionFrame,
    headline: HeadlineRecord,
    postprocessed: bool = True,
) -> list[str]:
    """Check type invariants; returns one message per violation.

    Emptiness of the free-text lists is only an invariant once
    post-processing has run, so it is gated on ``postprocessed``.
    """
    violations: list[str] = []
    if not headline.text.strip():
        violations.append("text empty")
    if frame.headline_id != headline.id:
        violations.append("headline_id mismatch")
    if frame.spread not in (1, 2, 3, 4, 5):
        violations.append("spread out of range")
    if frame.gold_label is not headline.gold_label:
        violations.append("gold_label mismatch")
    if postprocessed:
        if not frame.writer_intents:
            violations.append("writer_intents empty")
        if not frame.reader_perceptions:
            violations.append("reader_perceptions empty")
        if not frame.reader_actions:
            violations.append("reader_actions empty")
    for value in (
        frame.writer_intents + frame.reader_perceptions + frame.reader_actions
    ):
        if not value.strip():
            violations.append("blank free-text annotation")
            break
    return violations


def compute_stats(records: Sequence[Record]) -> DatasetStats:
    """Dataset-level counts for one split.

    Unique counts are over normalized (lowercased, trimmed) strings per
    free-text dimension. ``total_pairs`` counts every (headline, annotation
    value) pair, the three categorical dimensions included.
    """
    splits = {r.headline.split for r in records}
    if len(splits) > 1:
        raise ValueError(f"records span multiple splits: {sorted(s.value if s else 'none' for s in splits)}")

    intents: set[str] = set()
    perceptions: set[str] = set()
    actions: set[str] = set()
    pairs = 0
    for record in records:
        frame = record.frame
        if frame is None:
            continue
        intents.update(normalize_text(v) for v in frame.writer_intents)
        perceptions.update(normalize_text(v) for v in frame.reader_perceptions)
        actions.update(normalize_text(v) for v in frame.reader_actions)
        pairs += (
            len(frame.writer_intents)
            + len(frame.reader_perceptions)
            + len(frame.reader_actions)
            + len(CATEGORICAL_DIMENSIONS)
        )
    return DatasetStats(
        headlines=len(records),
        unique_intents=len(intents),
        unique_perceptions=len(perceptions),
        unique_actions=len(actions),
        total_pairs=pairs,
    )


TEST_CUTOFF = dt.date(2020, 11, 1)


def split_by_date(
    records: Sequence[Record],
    dev_fraction: float = 0.1,
    seed: int = 0,
) -> list[Record]:
    """Assign train/dev/test splits.

    Headlines dated on or after 2020-11-01 go to test; everything else
    (undated included) forms the train/dev pool. Dev is a seeded sample of
    the pool, stratified by gold label. Pool headlines whose normalized text
    also appears in test are removed so no text crosses splits.
    """
    test: list[Record] = []
    pool: list[Record] = []
    for record in records:
        date = record.headline.date
        if date is not None and date >= TEST_CUTOFF:
            test.append(record)
        else:
            pool.append(record)

    test_texts = {normalize_text(r.headline.text) for r in test}
    pool = [r for r in pool if normalize_text(r.headline.text) not in test_texts]

    rng = random.Random(seed)
    dev_ids: set[str] = set()
    by_label: dict[GoldLabel, list[Record]] = {}
    for record in pool:
        by_label.setdefault(record.headline.gold_label, []).append(record)
    for label in sorted(by_label, key=lambda l: l.value):
        group = by_label[label]
        k = round(dev_fraction * len(group))
        chosen = rng.sample(sorted(group, key=lambda r: r.headline.id), k)
        dev_ids.update(r.headline.id for r in chosen)

    out = []
    for record in test:
        out.append(replace(record, headline=replace(record.headline, split=Split.TEST)))
    for record in pool:
        split = Split.DEV if record.headline.id in dev_ids else Split.TRAIN
        out.append(replace(record, headline=replace(record.headline, split=split)))
    return out


# -- JSON-lines corpus files --
#
# One object per headline, frame fields embedded alongside the headline
# fields. headline_id and gold_label of the frame coincide with the
# headline's id/gold_label and are not duplicated on disk.


def record_to_dict(record: Record) -> dict:
    h = record.headline
    doc: dict = {
        "id": h.id,
        "text": h.text,
        "topic": h.topic.value,
        "gold_label": h.gold_label.value,
        "source": h.source,
        "date": h.date.isoformat() if h.date else None,
        "split": h.split.value if h.split else None,
    }
    if record.frame is not None:
        f = record.frame
        doc.update(
            {
                "writer_intents": list(f.writer_intents),
                "reader_perceptions": list(f.reader_perceptions),
                "reader_actions": list(f.reader_actions),
                "spread": f.spread,
                "perceived_label": f.perceived_label.value,
                "themes": sorted(t.value for t in f.themes),
            }
        )
    return doc


def record_from_dict(doc: dict) -> Record:
    headline = HeadlineRecord(
        id=str(doc["id"]),
        text=doc["text"],
        topic=Topic(doc["topic"]),
        gold_label=GoldLabel(doc["gold_label"]),
        source=doc.get("source", ""),
        date=dt.date.fromisoformat(doc["date"]) if doc.get("date") else None,
        split=Split(doc["split"]) if doc.get("split") else None,
    )
    frame = None
    if "writer_intents" in doc or "spread" in doc:
        frame = ReactionFrame(
            headline_id=headline.id,
            writer_intents=tuple(doc.get("writer_intents", ())),
            reader_perceptions=tuple(doc.get("reader_perceptions", ())),
            reader_actions=tuple(doc.get("reader_actions", ())),
            spread=int(doc.get("spread", 3)),
            perceived_label=PerceivedLabel(doc.get("perceived_label", "unsure")),
            gold_label=headline.gold_label,
            themes=frozenset(Theme(t) for t in doc.get("themes", ())),
        )
    return Record(headline=headline, frame=frame)


def write_jsonl(path: str | Path, records: Iterable[Record]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record), ensure_ascii=False) + "\n")


def read_jsonl(path: str | Path) -> list[Record]:
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(record_from_dict(json.loads(line)))
    return records


def derive_seed(root_seed: int, stage: str) -> int:
    """Stable per-stage seed so all pipeline randomness flows from one root."""
    digest = hashlib.sha256(f"{root_seed}:{stage}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
