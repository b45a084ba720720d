"""Annotation cleaning: dedup, copy removal, reclassification and imputation.

The pass runs per headline and is idempotent, so re-running it over an
already-cleaned corpus is a no-op. All sampling is seeded per headline id,
making the pipeline safe to parallelize and byte-stable across runs.
"""
from __future__ import annotations

import random
import string
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .schema import (
    PerceivedLabel,
    ReactionFrame,
    Record,
    UNKNOWN_INTENT,
    derive_seed,
)

ROUGE_DUP_THRESHOLD = 0.8

_PUNCT_TABLE = str.maketrans({c: " " for c in string.punctuation})


def _tokens(text: str) -> list[str]:
    return text.lower().translate(_PUNCT_TABLE).split()


def _ngram_counts(tokens: Sequence[str], n: int) -> dict[tuple[str, ...], int]:
    counts: dict[tuple[str, ...], int] = {}
    for i in range(len(tokens) - n + 1):
        gram = tuple(tokens[i : i + n])
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def rouge2(candidate: str, reference: str) -> float:
    """Bigram-overlap F1 between two strings.

    Tokenization is lowercase, punctuation-stripped, whitespace split.
    If either side has fewer than two tokens the comparison falls back to
    unigram overlap; two empty strings count as identical.
    """
    cand = _tokens(candidate)
    ref = _tokens(reference)
    n = 2 if len(cand) >= 2 and len(ref) >= 2 else 1
    a = _ngram_counts(cand, n)
    b = _ngram_counts(ref, n)
    total_a = sum(a.values())
    total_b = sum(b.values())
    if total_a == 0 and total_b == 0:
        return 1.0
    if total_a == 0 or total_b == 0:
        return 0.0
    overlap = sum(min(count, b.get(gram, 0)) for gram, count in a.items())
    return 2.0 * overlap / (total_a + total_b)


def dedupe_annotations(values: Sequence[str]) -> list[str]:
    """Drop values that near-duplicate an earlier kept one (rouge2 >= .8)."""
    kept: list[str] = []
    for value in values:
        if all(rouge2(value, existing) < ROUGE_DUP_THRESHOLD for existing in kept):
            kept.append(value)
    return kept


def remove_copied_intents(intents: Sequence[str], headline_text: str) -> list[str]:
    """Drop intents that merely restate the headline (rouge2 >= .8)."""
    return [i for i in intents if rouge2(i, headline_text) < ROUGE_DUP_THRESHOLD]


# -- emotion lexicon --

_STRIP_SUFFIXES = ("s", "ed", "ing")


@dataclass(frozen=True)
class EmotionLexicon:
    words: frozenset[str]

    def __post_init__(self):
        if not self.words:
            raise ValueError("emotion lexicon is empty")

    @classmethod
    def load(cls, path: Optional[str | Path] = None) -> "EmotionLexicon":
        if path is None:
            text = resources.files("reaction_frames.data").joinpath("emotion_words.txt").read_text("utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        words = frozenset(
            line.strip().lower()
            for line in text.splitlines()
            if line.strip() and not line.startswith("#")
        )
        return cls(words)

    def matches(self, word: str) -> bool:
        """Exact lookup after lowering, retried with -s/-ed/-ing stripped."""
        word = word.strip(string.punctuation).lower()
        if word in self.words:
            return True
        for suffix in _STRIP_SUFFIXES:
            if word.endswith(suffix) and word[: -len(suffix)] in self.words:
                return True
        return False


# -- imputation table --


@dataclass(frozen=True)
class ImputationRow:
    spread_condition: str  # "<3", "=3" or ">3"
    perceived_condition: str  # "misinfo", "real_or_unsure" or "any"
    perceptions: tuple[str, ...]
    actions: tuple[str, ...]


IMPUTATION_TABLE: tuple[ImputationRow, ...] = (
    ImputationRow(
        "<3",
        "misinfo",
        (
            "feel lied to",
            "feel disinterested",
            "feel disbelief",
            "feel this is false",
            "feel suspicious",
        ),
        (
            "fact-check this article",
            "skip this article",
            "check the facts",
            "avoid sharing this article",
            "do something else",
        ),
    ),
    ImputationRow(
        "<3",
        "real_or_unsure",
        (
            "feel unsure",
            "feel like they need more information to process this",
        ),
        (
            "move on to the next thing",
            "read more",
            "learn more",
        ),
    ),
    ImputationRow(
        ">3",
        "any",
        (
            "feel curious",
            "feel interested",
            "feel like this is something others might want to know about",
        ),
        (
            "talk to a friend about it",
            "share the article",
            "learn more",
            "read more",
            "try to understand",
        ),
    ),
    ImputationRow(
        "=3",
        "any",
        ("feel indifferent",),
        ("move on to something else",),
    ),
)

# Canonical table perceptions are exempt from the "want" reclassification
# rule; otherwise a second pass would move an imputed perception to the
# actions list and break idempotence.
_CANONICAL_PERCEPTIONS = frozenset(
    value for row in IMPUTATION_TABLE for value in row.perceptions
)


def imputation_row(spread: int, perceived: PerceivedLabel) -> ImputationRow:
    if spread < 3:
        if perceived is PerceivedLabel.MISINFO:
            return IMPUTATION_TABLE[0]
        return IMPUTATION_TABLE[1]
    if spread > 3:
        return IMPUTATION_TABLE[2]
    return IMPUTATION_TABLE[3]


# -- per-frame transforms --


def reclassify(frame: ReactionFrame, lexicon: EmotionLexicon) -> ReactionFrame:
    """Move single emotion-word actions to perceptions and "want" perceptions
    to actions, preserving order within each list."""
    perceptions = list(frame.reader_perceptions)
    actions = []
    for action in frame.reader_actions:
        words = action.split()
        if len(words) == 1 and lexicon.matches(words[0]):
            perceptions.append(action)
        else:
            actions.append(action)
    moved_perceptions = []
    for perception in perceptions:
        words = {w.strip(string.punctuation).lower() for w in perception.split()}
        if "want" in words and perception not in _CANONICAL_PERCEPTIONS:
            actions.append(perception)
        else:
            moved_perceptions.append(perception)
    return ReactionFrame(
        headline_id=frame.headline_id,
        writer_intents=frame.writer_intents,
        reader_perceptions=tuple(moved_perceptions),
        reader_actions=tuple(actions),
        spread=frame.spread,
        perceived_label=frame.perceived_label,
        gold_label=frame.gold_label,
        themes=frame.themes,
    )


MIN_INTENT_WORDS = 3
MIN_REACTION_CHARS = 3


def length_filter(frame: ReactionFrame) -> ReactionFrame:
    """Intents need >= 3 words; perceptions/actions >= 3 characters."""
    return ReactionFrame(
        headline_id=frame.headline_id,
        writer_intents=tuple(
            i for i in frame.writer_intents if len(i.split()) >= MIN_INTENT_WORDS
        ),
        reader_perceptions=tuple(
            p for p in frame.reader_perceptions if len(p) >= MIN_REACTION_CHARS
        ),
        reader_actions=tuple(
            a for a in frame.reader_actions if len(a) >= MIN_REACTION_CHARS
        ),
        spread=frame.spread,
        perceived_label=frame.perceived_label,
        gold_label=frame.gold_label,
        themes=frame.themes,
    )


def finalize(frame: ReactionFrame, seed: int = 0) -> Optional[ReactionFrame]:
    """Impute missing lists, or drop the headline if nothing survived.

    Returns None for the drop case. Imputed values are drawn uniformly
    from the table row matching (spread, perceived label), with the RNG
    seeded per headline so parallel order cannot change outputs.
    """
    if not (frame.writer_intents or frame.reader_perceptions or frame.reader_actions):
        return None
    intents = frame.writer_intents or (UNKNOWN_INTENT,)
    perceptions = frame.reader_perceptions
    actions = frame.reader_actions
    if not perceptions or not actions:
        row = imputation_row(frame.spread, frame.perceived_label)
        rng = random.Random(derive_seed(seed, f"impute:{frame.headline_id}"))
        if not perceptions:
            perceptions = (rng.choice(row.perceptions),)
        if not actions:
            actions = (rng.choice(row.actions),)
    return ReactionFrame(
        headline_id=frame.headline_id,
        writer_intents=intents,
        reader_perceptions=perceptions,
        reader_actions=actions,
        spread=frame.spread,
        perceived_label=frame.perceived_label,
        gold_label=frame.gold_label,
        themes=frame.themes,
    )


@dataclass
class PostprocessReport:
    headlines_in: int = 0
    headlines_dropped: int = 0
    unknown_intent: int = 0
    imputed_perceptions: int = 0
    imputed_actions: int = 0
    reclassified_to_perception: int = 0
    reclassified_to_action: int = 0
    deduped: int = 0
    blocklisted: int = 0

    def summary(self) -> str:
        kept = self.headlines_in - self.headlines_dropped
        drop_pct = 100.0 * self.headlines_dropped / self.headlines_in if self.headlines_in else 0.0
        unk_pct = 100.0 * self.unknown_intent / kept if kept else 0.0
        return (
            f"headlines {self.headlines_in} -> {kept} "
            f"(dropped {self.headlines_dropped}, {drop_pct:.1f}%); "
            f"unknown intent {self.unknown_intent} ({unk_pct:.1f}% of kept); "
            f"imputed perceptions {self.imputed_perceptions}, actions {self.imputed_actions}; "
            f"reclassified {self.reclassified_to_perception}+{self.reclassified_to_action}; "
            f"near-duplicates removed {self.deduped}; blocklisted {self.blocklisted}"
        )


def load_blocklist(path: Optional[str | Path]) -> frozenset[str]:
    """Single-word misspelling blocklist; default empty."""
    if path is None:
        return frozenset()
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(l.strip().lower() for l in lines if l.strip() and not l.startswith("#"))


def _apply_blocklist(values: Sequence[str], blocklist: frozenset[str]) -> list[str]:
    out = []
    for value in values:
        words = value.split()
        if len(words) == 1 and words[0].strip(string.punctuation).lower() in blocklist:
            continue
        out.append(value)
    return out


def postprocess_frame(
    frame: ReactionFrame,
    headline_text: str,
    lexicon: EmotionLexicon,
    seed: int = 0,
    blocklist: frozenset[str] = frozenset(),
    report: Optional[PostprocessReport] = None,
) -> Optional[ReactionFrame]:
    """Full cleaning pass for one headline's frame. None means drop."""
    report = report if report is not None else PostprocessReport()

    intents = dedupe_annotations(frame.writer_intents)
    perceptions = dedupe_annotations(frame.reader_perceptions)
    actions = dedupe_annotations(frame.reader_actions)
    report.deduped += (
        len(frame.writer_intents) + len(frame.reader_perceptions) + len(frame.reader_actions)
        - len(intents) - len(perceptions) - len(actions)
    )
    intents = remove_copied_intents(intents, headline_text)

    staged = ReactionFrame(
        headline_id=frame.headline_id,
        writer_intents=tuple(intents),
        reader_perceptions=tuple(perceptions),
        reader_actions=tuple(actions),
        spread=frame.spread,
        perceived_label=frame.perceived_label,
        gold_label=frame.gold_label,
        themes=frame.themes,
    )
    report.reclassified_to_perception += sum(
        1
        for a in staged.reader_actions
        if len(a.split()) == 1 and lexicon.matches(a)
    )
    report.reclassified_to_action += sum(
        1
        for p in staged.reader_perceptions
        if "want" in {w.strip(string.punctuation).lower() for w in p.split()}
        and p not in _CANONICAL_PERCEPTIONS
    )
    staged = reclassify(staged, lexicon)

    if blocklist:
        pruned = ReactionFrame(
            headline_id=staged.headline_id,
            writer_intents=tuple(_apply_blocklist(staged.writer_intents, blocklist)),
            reader_perceptions=tuple(_apply_blocklist(staged.reader_perceptions, blocklist)),
            reader_actions=tuple(_apply_blocklist(staged.reader_actions, blocklist)),
            spread=staged.spread,
            perceived_label=staged.perceived_label,
            gold_label=staged.gold_label,
            themes=staged.themes,
        )
        report.blocklisted += (
            len(staged.writer_intents) + len(staged.reader_perceptions) + len(staged.reader_actions)
            - len(pruned.writer_intents) - len(pruned.reader_perceptions) - len(pruned.reader_actions)
        )
        staged = pruned

    staged = length_filter(staged)
    # Reclassification can move a value next to a near-duplicate in its new
    # list, so dedupe once more before imputation.
    staged = ReactionFrame(
        headline_id=staged.headline_id,
        writer_intents=tuple(dedupe_annotations(staged.writer_intents)),
        reader_perceptions=tuple(dedupe_annotations(staged.reader_perceptions)),
        reader_actions=tuple(dedupe_annotations(staged.reader_actions)),
        spread=staged.spread,
        perceived_label=staged.perceived_label,
        gold_label=staged.gold_label,
        themes=staged.themes,
    )

    final = finalize(staged, seed=seed)
    if final is None:
        report.headlines_dropped += 1
        return None
    if final.writer_intents == (UNKNOWN_INTENT,) and not staged.writer_intents:
        report.unknown_intent += 1
    if not staged.reader_perceptions:
        report.imputed_perceptions += 1
    if not staged.reader_actions:
        report.imputed_actions += 1
    return final


def postprocess_corpus(
    records: Iterable[Record],
    lexicon: Optional[EmotionLexicon] = None,
    seed: int = 0,
    blocklist: frozenset[str] = frozenset(),
) -> tuple[list[Record], PostprocessReport]:
    lexicon = lexicon or EmotionLexicon.load()
    report = PostprocessReport()
    out: list[Record] = []
    for record in records:
        report.headlines_in += 1
        if record.frame is None:
            report.headlines_dropped += 1
            continue
        cleaned = postprocess_frame(
            record.frame,
            record.headline.text,
            lexicon,
            seed=seed,
            blocklist=blocklist,
            report=report,
        )
        if cleaned is None:
            continue
        out.append(Record(headline=record.headline, frame=cleaned))
    return out, report
