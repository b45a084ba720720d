"""Turn raw source exports into labeled HeadlineRecords.

Two source families are supported: news-aggregation dumps whose sources
carry a 3-way reliability score, and fact-check claim lists with
supported/refuted/not-enough-info labels. Rows from the middle category of
either family are discarded rather than forced into the binary scheme.
"""
from __future__ import annotations

import csv
import datetime as dt
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from .schema import GoldLabel, HeadlineRecord, Record, Topic, normalize_text

CLIMATE_KEYWORDS = ("environment", "climate", "greenhouse gas", "carbon tax")

# Keyword filtering mislabels headlines about e.g. workplace culture as
# climate news; these phrases are excluded by default.
DEFAULT_CLIMATE_EXCLUSIONS = ("toxic work environment", "political climate")


class Reliability(str, Enum):
    RELIABLE = "reliable"
    SOMETIMES_RELIABLE = "sometimes_reliable"
    UNRELIABLE = "unreliable"


class ClaimLabel(str, Enum):
    SUPPORTED = "supported"
    REFUTED = "refuted"
    NOT_ENOUGH_INFO = "not_enough_info"


class Discard:
    """Sentinel for rows dropped by a label-mapping rule."""

    __slots__ = ("reason",)

    def __init__(self, reason: str):
        self.reason = reason

    def __repr__(self):
        return f"Discard({self.reason!r})"


@dataclass(frozen=True)
class RawSourceRow:
    """One export row. Exactly one of reliability/claim_label is set."""

    text: str
    source_name: str = ""
    reliability: Optional[Reliability] = None
    claim_label: Optional[ClaimLabel] = None
    date: Optional[dt.date] = None
    row_id: str = ""

    def __post_init__(self):
        if (self.reliability is None) == (self.claim_label is None):
            raise ValueError(
                f"row {self.row_id or self.text[:40]!r}: exactly one of "
                "reliability/claim_label must be present"
            )


class IngestError(ValueError):
    pass


def map_reliability(row: RawSourceRow) -> GoldLabel | Discard:
    """reliable -> real, unreliable -> misinfo, sometimes_reliable -> Discard."""
    if row.reliability is None:
        raise IngestError(f"row {row.row_id!r}: reliability missing")
    if row.reliability is Reliability.RELIABLE:
        return GoldLabel.REAL
    if row.reliability is Reliability.UNRELIABLE:
        return GoldLabel.MISINFO
    return Discard("sometimes_reliable source")


def map_claim_label(row: RawSourceRow) -> GoldLabel | Discard:
    """supported -> real, refuted -> misinfo, not_enough_info -> Discard."""
    if row.claim_label is None:
        raise IngestError(f"row {row.row_id!r}: claim_label missing")
    if row.claim_label is ClaimLabel.SUPPORTED:
        return GoldLabel.REAL
    if row.claim_label is ClaimLabel.REFUTED:
        return GoldLabel.MISINFO
    return Discard("not enough info to infer a label")


def climate_keyword_filter(text: str) -> bool:
    """True iff the lowercased text contains any climate keyphrase."""
    lowered = text.lower()
    return any(keyword in lowered for keyword in CLIMATE_KEYWORDS)


@dataclass
class IngestReport:
    kept: int = 0
    discarded: int = 0
    filtered_out: int = 0
    excluded: int = 0
    duplicates: int = 0
    errors: list[str] = field(default_factory=list)


def build_corpus(
    rows: Iterable[RawSourceRow],
    topic: Topic,
    aggregator: bool = True,
    exclusions: Iterable[str] = DEFAULT_CLIMATE_EXCLUSIONS,
    id_prefix: str = "",
    report: Optional[IngestReport] = None,
) -> list[Record]:
    """Map labels, filter, dedupe by normalized text and assign ids.

    The climate keyword filter (plus the exclusion phrases that stand in
    for manual cleaning of its false hits) only applies to general
    aggregator rows with topic=climate; claim datasets are already topical.
    """
    report = report if report is not None else IngestReport()
    exclusion_phrases = [normalize_text(p) for p in exclusions]
    records: list[Record] = []
    seen: set[str] = set()
    index = 0
    for row in rows:
        text = row.text.strip()
        if not text:
            report.errors.append(f"row {row.row_id!r}: empty text")
            continue
        if topic is Topic.CLIMATE and aggregator:
            if not climate_keyword_filter(text):
                report.filtered_out += 1
                continue
            lowered = text.lower()
            if any(phrase in lowered for phrase in exclusion_phrases):
                report.excluded += 1
                continue
        mapper = map_reliability if row.reliability is not None else map_claim_label
        label = mapper(row)
        if isinstance(label, Discard):
            report.discarded += 1
            continue
        key = normalize_text(text)
        if key in seen:
            report.duplicates += 1
            continue
        seen.add(key)
        records.append(
            Record(
                headline=HeadlineRecord(
                    id=f"{id_prefix}{topic.value}-{index:06d}",
                    text=text,
                    topic=topic,
                    gold_label=label,
                    source=row.source_name,
                    date=row.date,
                )
            )
        )
        index += 1
    report.kept = len(records)
    return records


# -- file adapters --
#
# Original export schemas vary, so adapters take a column mapping from the
# canonical names (text, source, reliability/label, date) to whatever the
# file uses. Values are normalized: case-insensitive, spaces/hyphens
# collapsed to underscores for the categorical columns.

AGGREGATOR_COLUMNS = {"text": "text", "source": "source", "reliability": "reliability", "date": "date"}
CLAIMS_COLUMNS = {"text": "text", "source": "source", "label": "label", "date": "date"}

_RELIABILITY_ALIASES = {
    "reliable": Reliability.RELIABLE,
    "sometimes_reliable": Reliability.SOMETIMES_RELIABLE,
    "unreliable": Reliability.UNRELIABLE,
}

_CLAIM_ALIASES = {
    "supported": ClaimLabel.SUPPORTED,
    "supports": ClaimLabel.SUPPORTED,
    "refuted": ClaimLabel.REFUTED,
    "refutes": ClaimLabel.REFUTED,
    "not_enough_info": ClaimLabel.NOT_ENOUGH_INFO,
}


def _norm_categorical(raw: str) -> str:
    return raw.strip().lower().replace("-", "_").replace(" ", "_")


def _parse_date(raw: Optional[str]) -> Optional[dt.date]:
    if not raw or not raw.strip():
        return None
    return dt.date.fromisoformat(raw.strip()[:10])


def _row_from_doc(doc: dict, kind: str, columns: dict, row_id: str) -> RawSourceRow:
    text = str(doc.get(columns["text"], "") or "")
    source = str(doc.get(columns.get("source", "source"), "") or "")
    date = _parse_date(doc.get(columns.get("date", "date")))
    if kind == "aggregator":
        raw = _norm_categorical(str(doc.get(columns["reliability"], "")))
        if raw not in _RELIABILITY_ALIASES:
            raise IngestError(f"row {row_id}: unknown reliability {raw!r}")
        return RawSourceRow(
            text=text, source_name=source, reliability=_RELIABILITY_ALIASES[raw],
            date=date, row_id=row_id,
        )
    raw = _norm_categorical(str(doc.get(columns["label"], "")))
    if raw not in _CLAIM_ALIASES:
        raise IngestError(f"row {row_id}: unknown claim label {raw!r}")
    return RawSourceRow(
        text=text, source_name=source, claim_label=_CLAIM_ALIASES[raw],
        date=date, row_id=row_id,
    )


def load_rows(
    path: str | Path,
    kind: str,
    columns: Optional[dict] = None,
) -> list[RawSourceRow]:
    """Read aggregator/claims rows from a .jsonl, .csv or .tsv export."""
    if kind not in ("aggregator", "claims"):
        raise IngestError(f"unknown source kind {kind!r}")
    defaults = AGGREGATOR_COLUMNS if kind == "aggregator" else CLAIMS_COLUMNS
    mapping = {**defaults, **(columns or {})}
    path = Path(path)
    rows: list[RawSourceRow] = []
    if path.suffix == ".jsonl":
        with path.open("r", encoding="utf-8") as fh:
            for i, line in enumerate(fh):
                line = line.strip()
                if line:
                    rows.append(_row_from_doc(json.loads(line), kind, mapping, f"{path.name}:{i}"))
    elif path.suffix in (".csv", ".tsv"):
        delimiter = "\t" if path.suffix == ".tsv" else ","
        with path.open("r", encoding="utf-8", newline="") as fh:
            for i, doc in enumerate(csv.DictReader(fh, delimiter=delimiter)):
                rows.append(_row_from_doc(doc, kind, mapping, f"{path.name}:{i}"))
    else:
        raise IngestError(f"unsupported export format {path.suffix!r}")
    return rows


def load_exclusions(path: Optional[str | Path]) -> tuple[str, ...]:
    if path is None:
        return DEFAULT_CLIMATE_EXCLUSIONS
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return tuple(line.strip() for line in lines if line.strip())
