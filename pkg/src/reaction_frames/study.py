"""A/B trust study backend: sessions, phase machine, journal, results.

Raters first score a headline's trustworthiness with the machine-written
implication hidden, then re-score after the reveal. The two-phase item
state machine (pre_pending -> revealed -> complete) is enforced here, so
no client can obtain an implication before committing a pre rating.
Judgements persist to an append-only JSON-lines journal; results are
always computed by replaying it.
"""
from __future__ import annotations

import datetime as dt
import json
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

from .evaluation import JudgementRow, human_eval_report, rater_accuracy_report
from .schema import GoldLabel, derive_seed

import random

IMPLICATION_TEMPLATE = "The writer is implying that {implication}"


class StudyError(Exception):
    code = "ValidationError"


class ValidationError(StudyError):
    code = "ValidationError"


class PhaseError(StudyError):
    code = "PhaseError"


class ExhaustedError(StudyError):
    code = "Exhausted"


class Phase(str, Enum):
    PRE_PENDING = "pre_pending"
    REVEALED = "revealed"
    COMPLETE = "complete"


class Acceptability(str, Enum):
    MAJORITY = "majority"
    FRINGE = "fringe"


@dataclass(frozen=True)
class StudyItem:
    headline_id: str
    headline_text: str
    implication_text: str  # already templated
    model_id: str
    gold_label: GoldLabel  # never shown to raters

    def __post_init__(self):
        if not self.implication_text.strip():
            raise ValidationError(f"{self.headline_id}: empty implication")


def make_study_item(
    headline_id: str,
    headline_text: str,
    implication: str,
    model_id: str,
    gold_label: GoldLabel,
) -> StudyItem:
    """Apply the reveal template exactly once."""
    text = implication.strip()
    if not text:
        raise ValidationError(f"{headline_id}: empty implication")
    prefix = IMPLICATION_TEMPLATE.split("{", 1)[0]
    if not text.startswith(prefix):
        text = IMPLICATION_TEMPLATE.format(implication=text)
    return StudyItem(
        headline_id=headline_id,
        headline_text=headline_text,
        implication_text=text,
        model_id=model_id,
        gold_label=gold_label,
    )


@dataclass
class _ItemState:
    item: StudyItem
    phase: Phase = Phase.PRE_PENDING
    pre_trust: Optional[int] = None


@dataclass
class StudySession:
    session_id: str
    rater_id: str
    queue: list[_ItemState] = field(default_factory=list)

    def state_for(self, headline_id: str) -> _ItemState:
        for state in self.queue:
            if state.item.headline_id == headline_id:
                return state
        raise ValidationError(f"headline {headline_id!r} not in session")

    def next_pending(self) -> Optional[_ItemState]:
        for state in self.queue:
            if state.phase is not Phase.COMPLETE:
                return state
        return None

    def completed(self) -> int:
        return sum(1 for s in self.queue if s.phase is Phase.COMPLETE)


@dataclass(frozen=True)
class SamplingConfig:
    queue_size: int = 8
    seed: int = 0
    judgements_per_item: int = 3  # unique raters collected per (headline, model)


def _require_likert(value, name: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 5:
        raise ValidationError(f"{name} must be an integer in 1..5, got {value!r}")
    return value


class StudyService:
    """Session management over a fixed item pool with a JSONL journal."""

    def __init__(self, items: Sequence[StudyItem], journal_path: str | Path):
        self.items = list(items)
        self.journal_path = Path(journal_path)
        self.sessions: dict[str, StudySession] = {}
        self._lock = threading.Lock()
        self._session_counter = 0
        # (rater_id, headline_id) pairs already judged, and per-item rater sets
        self._judged_pairs: set[tuple[str, str]] = set()
        self._item_raters: dict[tuple[str, str], set[str]] = {}
        if self.journal_path.exists():
            for row in self.load_journal():
                self._note_judgement(row.rater_id, row.headline_id, row.model_id)

    def _note_judgement(self, rater_id: str, headline_id: str, model_id: str) -> None:
        self._judged_pairs.add((rater_id, headline_id))
        self._item_raters.setdefault((headline_id, model_id), set()).add(rater_id)

    # -- sampling --

    def _eligible(self, rater_id: str, config: SamplingConfig) -> list[StudyItem]:
        out = []
        for item in self.items:
            if (rater_id, item.headline_id) in self._judged_pairs:
                continue
            raters = self._item_raters.get((item.headline_id, item.model_id), set())
            if len(raters) >= config.judgements_per_item:
                continue
            out.append(item)
        return out

    def create_session(self, rater_id: str, config: SamplingConfig) -> StudySession:
        """Sample a queue balanced by gold label and by model id.

        Headlines this rater already judged are excluded, as are items
        that already collected their quota of unique raters.
        """
        with self._lock:
            eligible = self._eligible(rater_id, config)
            if not eligible:
                raise ExhaustedError("item pool exhausted for this rater")
            rng = random.Random(derive_seed(config.seed, f"session:{rater_id}"))
            groups: dict[tuple[str, str], list[StudyItem]] = {}
            for item in eligible:
                groups.setdefault((item.gold_label.value, item.model_id), []).append(item)
            for group in groups.values():
                group.sort(key=lambda i: (i.headline_id, i.model_id))
                rng.shuffle(group)
            labels = sorted({label for label, _ in groups})
            models_by_label = {
                label: sorted(m for l, m in groups if l == label) for label in labels
            }
            model_cursor = {label: 0 for label in labels}

            queue: list[StudyItem] = []
            taken_headlines: set[str] = set()
            while len(queue) < config.queue_size:
                progressed = False
                for label in labels:
                    if len(queue) >= config.queue_size:
                        break
                    models = models_by_label[label]
                    for offset in range(len(models)):
                        model = models[(model_cursor[label] + offset) % len(models)]
                        group = groups.get((label, model), [])
                        while group and group[-1].headline_id in taken_headlines:
                            group.pop()
                        if group:
                            item = group.pop()
                            queue.append(item)
                            taken_headlines.add(item.headline_id)
                            model_cursor[label] = (model_cursor[label] + offset + 1) % len(models)
                            progressed = True
                            break
                if not progressed:
                    break
            if not queue:
                raise ExhaustedError("item pool exhausted for this rater")

            self._session_counter += 1
            session = StudySession(
                session_id=f"s{self._session_counter:06d}",
                rater_id=rater_id,
                queue=[_ItemState(item=i) for i in queue],
            )
            self.sessions[session.session_id] = session
            return session

    def session(self, session_id: str) -> StudySession:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise ValidationError(f"unknown session {session_id!r}") from None

    # -- item views --

    @staticmethod
    def item_view(state: _ItemState, position: int, total: int) -> dict:
        view = {
            "headline_id": state.item.headline_id,
            "headline_text": state.item.headline_text,
            "phase": state.phase.value,
            "position": position,
            "total": total,
        }
        # the implication stays server-side until the pre rating lands
        if state.phase is Phase.REVEALED:
            view["implication_text"] = state.item.implication_text
        return view

    def next_item(self, session_id: str) -> dict:
        session = self.session(session_id)
        state = session.next_pending()
        if state is None:
            return {"done": True, "completed": session.completed(), "total": len(session.queue)}
        return self.item_view(state, session.completed() + 1, len(session.queue))

    # -- phase transitions --

    def submit_pre_rating(self, session_id: str, headline_id: str, pre_trust) -> dict:
        session = self.session(session_id)
        state = session.state_for(headline_id)
        pre_trust = _require_likert(pre_trust, "trust")
        with self._lock:
            if state.phase is not Phase.PRE_PENDING:
                raise PhaseError(
                    f"pre rating for {headline_id!r} in phase {state.phase.value}"
                )
            state.pre_trust = pre_trust
            state.phase = Phase.REVEALED
        return self.item_view(state, session.completed() + 1, len(session.queue))

    def submit_post_rating(
        self,
        session_id: str,
        headline_id: str,
        post_trust,
        quality,
        acceptability,
        perceived_label: Optional[str] = None,
    ) -> JudgementRow:
        session = self.session(session_id)
        state = session.state_for(headline_id)
        post_trust = _require_likert(post_trust, "trust")
        quality = _require_likert(quality, "quality")
        try:
            acceptability = Acceptability(acceptability)
        except ValueError:
            raise ValidationError(
                f"acceptability must be one of {[a.value for a in Acceptability]}"
            ) from None
        if perceived_label is not None and perceived_label not in ("real", "misinfo"):
            raise ValidationError("perceived_label must be 'real' or 'misinfo'")
        with self._lock:
            if state.phase is Phase.PRE_PENDING:
                raise PhaseError(f"post rating before pre rating for {headline_id!r}")
            if state.phase is Phase.COMPLETE:
                raise PhaseError(f"item {headline_id!r} already complete")
            judgement = JudgementRow(
                headline_id=headline_id,
                model_id=state.item.model_id,
                pre_trust=state.pre_trust,
                post_trust=post_trust,
                quality=quality,
                acceptability=acceptability.value,
                gold_label=state.item.gold_label.value,
                rater_id=session.rater_id,
                perceived_label=perceived_label,
            )
            self._append_journal(judgement, session.session_id)
            self._note_judgement(session.rater_id, headline_id, state.item.model_id)
            state.phase = Phase.COMPLETE
        return judgement

    # -- journal --

    def _append_journal(self, row: JudgementRow, session_id: str) -> None:
        self.journal_path.parent.mkdir(parents=True, exist_ok=True)
        doc = {
            "session_id": session_id,
            "headline_id": row.headline_id,
            "model_id": row.model_id,
            "rater_id": row.rater_id,
            "pre_trust": row.pre_trust,
            "post_trust": row.post_trust,
            "quality": row.quality,
            "acceptability": row.acceptability,
            "gold_label": row.gold_label,
            "perceived_label": row.perceived_label,
            "timestamp": dt.datetime.now(dt.timezone.utc).isoformat(),
        }
        with self.journal_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, ensure_ascii=False) + "\n")

    def load_journal(self) -> list[JudgementRow]:
        return load_journal(self.journal_path)

    def results(self, model_id: Optional[str] = None) -> dict:
        """Study report computed by replaying the journal."""
        rows = self.load_journal()
        if model_id is not None:
            rows = [r for r in rows if r.model_id == model_id]
        if not rows:
            raise ValidationError("no completed judgements")
        report = human_eval_report(rows)
        if any(r.perceived_label is not None for r in rows):
            report["rater_accuracy"] = rater_accuracy_report(rows)
        return report


def load_journal(path: str | Path) -> list[JudgementRow]:
    path = Path(path)
    if not path.exists():
        return []
    rows = []
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            rows.append(
                JudgementRow(
                    headline_id=doc["headline_id"],
                    model_id=doc["model_id"],
                    pre_trust=doc["pre_trust"],
                    post_trust=doc["post_trust"],
                    quality=doc["quality"],
                    acceptability=doc["acceptability"],
                    gold_label=doc["gold_label"],
                    rater_id=doc.get("rater_id", ""),
                    perceived_label=doc.get("perceived_label"),
                )
            )
    return rows


def load_study_items(path: str | Path) -> list[StudyItem]:
    """Item pool file: one JSON object per line with headline_id,
    headline_text, implication, model_id and gold_label fields."""
    items = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            items.append(
                make_study_item(
                    headline_id=str(doc["headline_id"]),
                    headline_text=doc["headline_text"],
                    implication=doc.get("implication", doc.get("implication_text", "")),
                    model_id=doc["model_id"],
                    gold_label=GoldLabel(doc["gold_label"]),
                )
            )
    return items
