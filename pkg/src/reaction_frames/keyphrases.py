"""Graph-ranked keyphrase extraction and surface-text masking.

Used for masked fine-tuning: rank salient keyphrases per domain with a
co-occurrence PageRank, take the per-domain set differences, and replace
those phrases in training text with a literal ``<mask>`` token so continued
training cannot lean on domain-specific surface cues.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .schema import normalize_text

MASK_TOKEN = "<mask>"

DAMPING = 0.85
CONVERGENCE_TOL = 1e-6
MAX_ITERATIONS = 100
DEFAULT_WINDOW = 4

_WORD_RE = re.compile(r"[a-z]+")


def load_stopwords(path: Optional[str | Path] = None) -> frozenset[str]:
    if path is None:
        text = resources.files("reaction_frames.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return frozenset(l.strip() for l in text.splitlines() if l.strip())


@dataclass(frozen=True)
class KeyphraseSet:
    """Ranked keyphrases for one domain, descending score."""

    domain: str
    phrases: tuple[tuple[str, float], ...]

    def __post_init__(self):
        texts = [p for p, _ in self.phrases]
        if len(set(texts)) != len(texts):
            raise ValueError("duplicate phrases in keyphrase set")
        if any(not math.isfinite(s) for _, s in self.phrases):
            raise ValueError("non-finite phrase score")

    def texts(self) -> tuple[str, ...]:
        return tuple(p for p, _ in self.phrases)


def _word_tokens(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


def word_scores(
    texts: Sequence[str],
    stopwords: frozenset[str],
    window: int = DEFAULT_WINDOW,
    damping: float = DAMPING,
    tol: float = CONVERGENCE_TOL,
    max_iterations: int = MAX_ITERATIONS,
) -> dict[str, float]:
    """PageRank scores over the word co-occurrence graph.

    Vertices are content words (lowercase alphabetic, non-stopword). Two
    vertices are linked, with weight equal to the co-occurrence count, when
    they appear within ``window`` token positions of each other; stopwords
    occupy positions but get no vertex. Scores come from power iteration of

        s_i = (1 - d)/N + d * sum_j w_ij / deg_j * s_j

    run until the max element change drops below ``tol`` or the iteration
    cap is hit. Vertices with no edges keep the (1 - d)/N baseline.
    """
    weights: dict[tuple[str, str], float] = {}
    vertices: set[str] = set()
    for text in texts:
        tokens = _word_tokens(text)
        candidate = [t not in stopwords for t in tokens]
        vertices.update(t for t, ok in zip(tokens, candidate) if ok)
        for i, (token, ok) in enumerate(zip(tokens, candidate)):
            if not ok:
                continue
            for j in range(i + 1, min(i + window, len(tokens))):
                other = tokens[j]
                if not candidate[j] or other == token:
                    continue
                edge = (token, other) if token < other else (other, token)
                weights[edge] = weights.get(edge, 0.0) + 1.0

    if not vertices:
        return {}

    order = sorted(vertices)
    n = len(order)
    neighbors: dict[str, list[tuple[str, float]]] = {v: [] for v in order}
    degree: dict[str, float] = {v: 0.0 for v in order}
    for (u, v), w in weights.items():
        neighbors[u].append((v, w))
        neighbors[v].append((u, w))
        degree[u] += w
        degree[v] += w

    base = (1.0 - damping) / n
    scores = {v: 1.0 / n for v in order}
    for _ in range(max_iterations):
        updated = {}
        for v in order:
            incoming = sum(
                w / degree[u] * scores[u] for u, w in neighbors[v] if degree[u] > 0
            )
            updated[v] = base + damping * incoming
        delta = max(abs(updated[v] - scores[v]) for v in order)
        scores = updated
        if delta < tol:
            break
    return scores


def textrank_keyphrases(
    texts: Sequence[str],
    top_n: int,
    stopwords: Optional[frozenset[str]] = None,
    window: int = DEFAULT_WINDOW,
    domain: str = "",
) -> KeyphraseSet:
    """Extract the ``top_n`` keyphrases from a corpus of texts.

    Top-scoring words (the usual top-third heuristic, widened when
    ``top_n`` asks for more) that sit adjacent in a source text merge into
    multiword phrases scored by the sum of member word scores. Ties break
    lexicographically so extraction is fully deterministic.
    """
    if not texts or all(not t.strip() for t in texts):
        raise ValueError("empty corpus")
    stopwords = stopwords if stopwords is not None else load_stopwords()
    scores = word_scores(texts, stopwords, window=window)
    if not scores:
        raise ValueError("no candidate words in corpus")

    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    keep = min(len(ranked), max(top_n, math.ceil(len(ranked) / 3)))
    selected = {word for word, _ in ranked[:keep]}

    phrases: dict[str, float] = {}

    def flush(run: list[str]) -> None:
        if run:
            phrase = " ".join(run)
            if phrase not in phrases:
                phrases[phrase] = sum(scores[w] for w in run)
            run.clear()

    for text in texts:
        tokens = _word_tokens(text)
        run: list[str] = []
        for token in tokens + [""]:
            if token in selected:
                # A repeated word is not a phrase; break the run between
                # identical neighbors.
                if run and token == run[-1]:
                    flush(run)
                run.append(token)
                continue
            flush(run)

    ordered = sorted(phrases.items(), key=lambda kv: (-kv[1], kv[0]))[:top_n]
    return KeyphraseSet(domain=domain, phrases=tuple(ordered))


def domain_specific(
    k_a: KeyphraseSet,
    k_b: KeyphraseSet,
    top: int = 100,
) -> tuple[KeyphraseSet, KeyphraseSet]:
    """Per-domain keyphrases: each set minus the shared intersection,
    truncated to the ``top`` highest-scoring survivors."""
    norm_a = {normalize_text(p) for p in k_a.texts()}
    norm_b = {normalize_text(p) for p in k_b.texts()}
    shared = norm_a & norm_b

    def restrict(ks: KeyphraseSet) -> KeyphraseSet:
        kept = [
            (p, s) for p, s in ks.phrases if normalize_text(p) not in shared
        ]
        kept.sort(key=lambda kv: (-kv[1], kv[0]))
        return KeyphraseSet(domain=ks.domain, phrases=tuple(kept[:top]))

    return restrict(k_a), restrict(k_b)


def _phrase_pattern(phrases: Iterable[str]) -> Optional[re.Pattern]:
    ordered = sorted({p.strip() for p in phrases if p.strip()}, key=len, reverse=True)
    if not ordered:
        return None
    alternation = "|".join(re.escape(p) for p in ordered)
    return re.compile(rf"(?<!\w)(?:{alternation})(?!\w)", re.IGNORECASE)


def mask_text(text: str, phrases: Iterable[str]) -> str:
    """Replace whole-phrase occurrences with the mask token.

    Matching is case-insensitive and longest-match-first. Existing mask
    tokens are left untouched, which keeps the operation idempotent.
    """
    pattern = _phrase_pattern(phrases)
    if pattern is None:
        return text
    segments = text.split(MASK_TOKEN)
    return MASK_TOKEN.join(pattern.sub(MASK_TOKEN, segment) for segment in segments)
