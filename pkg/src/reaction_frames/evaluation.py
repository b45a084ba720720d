"""Automatic metrics, agreement statistics and study-report aggregation.

Everything here is a pure function over rows; results do not depend on row
order. Percentages are computed in percent space (100 * tp / total summed
before averaging) so the structural identities of constant predictors
(macro recall 50.00 on binary gold, 20.00 on 5-class spread) hold exactly
in floating point.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Optional, Protocol, Sequence

import numpy as np
from scipy import stats as scipy_stats

# Reference constant for reports: measured human F1 at telling real news
# from misinformation, counting rater disagreements as misinformation.
HUMAN_GOLD_F1_REFERENCE = 75.21


class Unparseable:
    """Prediction that could not be decoded; always scored as incorrect."""

    _instance: Optional["Unparseable"] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNPARSEABLE"


UNPARSEABLE = Unparseable()


@dataclass(frozen=True)
class GenerationEvalRow:
    headline_id: str
    dimension: str
    candidate: str
    references: tuple[str, ...]

    def __post_init__(self):
        if not self.references:
            raise ValueError(f"{self.headline_id}: references empty")


@dataclass(frozen=True)
class ClassificationEvalRow:
    headline_id: str
    predicted: Hashable
    gold: Hashable


# -- n-gram overlap --


def _bleu_tokens(text: str) -> list[str]:
    return text.lower().split()


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu4(rows: Sequence[GenerationEvalRow]) -> float:
    """Corpus-level BLEU with n-gram orders up to 4, in [0, 100].

    Multi-reference clipping, brevity penalty against the shortest
    reference length (which keeps scores monotone under reference
    removal), and add-one smoothing of zero counts for orders >= 2 (so
    candidates sharing no unigram with any reference still score 0).
    Orders with no candidate n-grams anywhere drop out of the mean.
    """
    if not rows:
        raise ValueError("no rows to score")
    matches = [0] * 5
    totals = [0] * 5
    candidate_length = 0
    reference_length = 0
    for row in rows:
        cand = _bleu_tokens(row.candidate)
        refs = [_bleu_tokens(r) for r in row.references]
        candidate_length += len(cand)
        reference_length += min(len(r) for r in refs)
        for n in range(1, 5):
            cand_grams = _ngrams(cand, n)
            if not cand_grams:
                continue
            clipped = Counter()
            for ref in refs:
                ref_grams = _ngrams(ref, n)
                for gram, count in cand_grams.items():
                    clipped[gram] = max(clipped[gram], min(count, ref_grams.get(gram, 0)))
            matches[n] += sum(clipped.values())
            totals[n] += sum(cand_grams.values())

    log_precisions = []
    for n in range(1, 5):
        if totals[n] == 0:
            continue
        if matches[n] == 0:
            if n == 1:
                return 0.0
            precision = 1.0 / (totals[n] + 1.0)
        else:
            precision = matches[n] / totals[n]
        log_precisions.append(math.log(precision))
    if not log_precisions:
        return 0.0
    geo_mean = math.exp(sum(log_precisions) / len(log_precisions))
    if candidate_length == 0:
        return 0.0
    brevity = 1.0 if candidate_length > reference_length else math.exp(
        1.0 - reference_length / candidate_length
    )
    return 100.0 * brevity * geo_mean


# -- embedding greedy match --


class TokenEmbedder(Protocol):
    def embed_token(self, token: str) -> np.ndarray: ...


def _directional_match(src: list[np.ndarray], dst: list[np.ndarray]) -> float:
    total = 0.0
    for vec in src:
        best = 0.0
        norm = float(np.linalg.norm(vec))
        if norm > 0:
            for other in dst:
                other_norm = float(np.linalg.norm(other))
                if other_norm > 0:
                    best = max(best, float(np.dot(vec, other)) / (norm * other_norm))
        total += best
    return total / len(src)


def greedy_match_f(
    candidate: str,
    references: str | Sequence[str],
    token_embedder: TokenEmbedder,
) -> float:
    """Token-level greedy max-cosine matching F1; max over references."""
    if isinstance(references, str):
        references = [references]
    cand_tokens = candidate.lower().split()
    if not cand_tokens:
        return 0.0
    cand_vecs = [token_embedder.embed_token(t) for t in cand_tokens]
    best = 0.0
    for reference in references:
        ref_tokens = reference.lower().split()
        if not ref_tokens:
            continue
        ref_vecs = [token_embedder.embed_token(t) for t in ref_tokens]
        precision = _directional_match(cand_vecs, ref_vecs)
        recall = _directional_match(ref_vecs, cand_vecs)
        if precision + recall > 0:
            best = max(best, 2.0 * precision * recall / (precision + recall))
    return best


def greedy_match_corpus(
    rows: Sequence[GenerationEvalRow], token_embedder: TokenEmbedder
) -> float:
    if not rows:
        raise ValueError("no rows to score")
    return sum(
        greedy_match_f(r.candidate, r.references, token_embedder) for r in rows
    ) / len(rows)


# -- classification --


def macro_prf(rows: Sequence[ClassificationEvalRow]) -> tuple[float, float, float]:
    """Macro-averaged precision/recall/F1 as percentages.

    Classes are the distinct gold labels; unparseable or out-of-set
    predictions count against recall of the gold class and are never a
    true or false positive for any class.
    """
    if not rows:
        raise ValueError("no rows to score")
    classes = sorted({r.gold for r in rows}, key=str)
    precision_sum = recall_sum = f1_sum = 0.0
    for cls in classes:
        tp = sum(1 for r in rows if r.gold == cls and r.predicted == cls)
        fp = sum(1 for r in rows if r.gold != cls and r.predicted == cls)
        fn = sum(1 for r in rows if r.gold == cls and r.predicted != cls)
        precision = 100.0 * tp / (tp + fp) if tp + fp else 0.0
        recall = 100.0 * tp / (tp + fn) if tp + fn else 0.0
        f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
        precision_sum += precision
        recall_sum += recall
        f1_sum += f1
    n = len(classes)
    return precision_sum / n, recall_sum / n, f1_sum / n


def spread_to_class(value: float) -> int:
    """Round half away from zero, clamped to the 1..5 scale."""
    rounded = math.floor(value + 0.5) if value >= 0 else math.ceil(value - 0.5)
    return max(1, min(5, rounded))


# -- agreement --


def pairwise_agreement(labels_a: Sequence, labels_b: Sequence) -> float:
    if len(labels_a) != len(labels_b):
        raise ValueError("label vectors differ in length")
    if not labels_a:
        raise ValueError("no labels")
    return sum(a == b for a, b in zip(labels_a, labels_b)) / len(labels_a)


def cohens_kappa(labels_a: Sequence, labels_b: Sequence) -> float:
    """Chance-corrected agreement with marginal-product expected agreement."""
    if len(labels_a) != len(labels_b):
        raise ValueError("label vectors differ in length")
    n = len(labels_a)
    if n < 1:
        raise ValueError("no labels")
    observed = sum(a == b for a, b in zip(labels_a, labels_b)) / n
    counts_a = Counter(labels_a)
    counts_b = Counter(labels_b)
    expected = sum(
        (counts_a[c] / n) * (counts_b.get(c, 0) / n) for c in counts_a
    )
    if expected == 1.0:
        raise ValueError("degenerate marginals: expected agreement is 1")
    return (observed - expected) / (1.0 - expected)


def pearson_r(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Sample Pearson correlation with a two-sided t-test p-value."""
    if len(x) != len(y):
        raise ValueError("vectors differ in length")
    n = len(x)
    if n < 3:
        raise ValueError("need at least 3 points")
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    var_x = float(np.dot(dx, dx))
    var_y = float(np.dot(dy, dy))
    if var_x == 0.0 or var_y == 0.0:
        raise ValueError("zero variance")
    r = float(np.dot(dx, dy)) / math.sqrt(var_x * var_y)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(scipy_stats.t.sf(abs(t), n - 2))
    return r, p


def cohens_d(sample_a: Sequence[float], sample_b: Sequence[float]) -> float:
    """Standardized mean difference (mean_b - mean_a over pooled sd)."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("need at least 2 elements per sample")
    pooled_var = (
        (len(a) - 1) * a.var(ddof=1) + (len(b) - 1) * b.var(ddof=1)
    ) / (len(a) + len(b) - 2)
    if pooled_var == 0.0:
        raise ValueError("zero pooled variance")
    return float((b.mean() - a.mean()) / math.sqrt(pooled_var))


# -- study aggregation --


@dataclass(frozen=True)
class JudgementRow:
    """One completed trust judgement, as read back from the study journal."""

    headline_id: str
    model_id: str
    pre_trust: int
    post_trust: int
    quality: int
    acceptability: str  # "majority" or "fringe"
    gold_label: str  # "real" or "misinfo"
    rater_id: str = ""
    perceived_label: Optional[str] = None


def _trust_correlation(rows: Sequence[JudgementRow]) -> tuple[Optional[dict], Optional[str]]:
    if len(rows) < 3:
        return None, f"correlation omitted: {len(rows)} judgement(s), need 3"
    shifts = [r.post_trust - r.pre_trust for r in rows]
    encoded = [1.0 if r.gold_label == "real" else 0.0 for r in rows]
    try:
        r, p = pearson_r(shifts, encoded)
    except ValueError as exc:
        return None, f"correlation omitted: {exc}"
    return {"r": r, "p": p, "n": len(rows)}, None


def human_eval_report(judgements: Sequence[JudgementRow]) -> dict:
    """Per-model study aggregates.

    For each model: mean quality, share of judgements where trust rose /
    fell after the implication was revealed, correlation of the trust
    shift with the gold label (real=1, misinfo=0) over all judgements and
    over the quality >= 3 subset, and the share rated a majority viewpoint.
    """
    if not judgements:
        raise ValueError("no judgements")
    report: dict = {"models": {}, "notices": []}
    models = sorted({j.model_id for j in judgements})
    for model in models:
        rows = [j for j in judgements if j.model_id == model]
        n = len(rows)
        corr_all, notice_all = _trust_correlation(rows)
        quality_rows = [r for r in rows if r.quality >= 3]
        corr_q, notice_q = _trust_correlation(quality_rows)
        for notice in (notice_all, notice_q):
            if notice:
                report["notices"].append(f"{model}: {notice}")
        report["models"][model] = {
            "judgements": n,
            "quality_mean": sum(r.quality for r in rows) / n,
            "plus_trust_pct": 100.0 * sum(1 for r in rows if r.post_trust > r.pre_trust) / n,
            "minus_trust_pct": 100.0 * sum(1 for r in rows if r.post_trust < r.pre_trust) / n,
            "corr_with_label": corr_all,
            "corr_with_label_quality_ge_3": corr_q,
            "socially_acceptable_pct": 100.0 * sum(1 for r in rows if r.acceptability == "majority") / n,
        }
    return report


def rater_accuracy_report(judgements: Sequence[JudgementRow], gate: float = 0.70) -> dict:
    """Per-rater accuracy at the perceived real/misinfo question.

    Mirrors the qualification screen that removed raters whose accuracy
    fell below 70%. Only judgements that answered the perceived-label
    question participate.
    """
    rated = [j for j in judgements if j.perceived_label is not None]
    report: dict = {"raters": {}, "gate": gate}
    for rater in sorted({j.rater_id for j in rated}):
        rows = [j for j in rated if j.rater_id == rater]
        correct = sum(1 for r in rows if r.perceived_label == r.gold_label)
        accuracy = correct / len(rows)
        report["raters"][rater] = {
            "n": len(rows),
            "accuracy": accuracy,
            "below_gate": accuracy < gate,
        }
    return report
