"""Length-normalized beam search over adapter next-token distributions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from ..schema import Topic
from .encoding import (
    EOS_TOKEN,
    TOPIC_TOKENS,
    EncodedExample,
    EncodingMode,
    ParseError,
    TOPIC_BY_TOKEN,
)
from .adapters import SequenceAdapter


@dataclass(frozen=True)
class GenerationConfig:
    beam_size: int = 3
    max_length: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")


@dataclass(frozen=True)
class DecodeResult:
    """Generated tokens (end token stripped) plus bookkeeping."""

    tokens: tuple[str, ...]
    score: float  # total log-probability / token count, end token included
    truncated: bool  # no hypothesis reached the end token in max_length steps


@dataclass(frozen=True)
class _Hypothesis:
    ids: tuple[int, ...]
    logprob: float

    def normalized(self) -> float:
        return self.logprob / max(len(self.ids), 1)


def beam_decode(
    adapter: SequenceAdapter,
    encoded_input: EncodedExample | Sequence[str],
    config: GenerationConfig,
) -> DecodeResult:
    """Decode a continuation of the encoded input.

    Hypotheses stop at the end token; candidates are ranked by cumulative
    log-probability during search and by length-normalized log-probability
    at final selection, ties broken toward the lexicographically smallest
    token-id sequence. Beam size 1 reduces to a greedy argmax rollout. If
    no hypothesis finishes within ``max_length`` steps the best unfinished
    one is returned flagged as truncated.
    """
    if isinstance(encoded_input, EncodedExample):
        prompt = encoded_input.input_tokens
    else:
        prompt = tuple(encoded_input)
    joint = adapter.mode is EncodingMode.JOINT_SEQUENCE
    eos_id = adapter.vocab.eos_id

    def step_logprobs(generated_ids: tuple[int, ...]):
        generated = adapter.vocab.decode(generated_ids)
        if joint:
            return adapter.next_token_logprobs(tuple(prompt) + tuple(generated))
        return adapter.next_token_logprobs(tuple(generated), source=prompt)

    live = [_Hypothesis(ids=(), logprob=0.0)]
    finished: list[_Hypothesis] = []
    for _ in range(config.max_length):
        if not live:
            break
        candidates: list[_Hypothesis] = []
        for hyp in live:
            logprobs = step_logprobs(hyp.ids)
            for token_id, logprob in enumerate(logprobs):
                candidates.append(
                    _Hypothesis(ids=hyp.ids + (token_id,), logprob=hyp.logprob + float(logprob))
                )
        candidates.sort(key=lambda h: (-h.logprob, h.ids))
        kept = candidates[: config.beam_size]
        live = []
        for hyp in kept:
            if hyp.ids[-1] == eos_id:
                finished.append(hyp)
            else:
                live.append(hyp)

    def strip(hyp: _Hypothesis, truncated: bool) -> DecodeResult:
        ids = hyp.ids[:-1] if not truncated else hyp.ids
        return DecodeResult(
            tokens=tuple(adapter.vocab.decode(ids)),
            score=hyp.normalized(),
            truncated=truncated,
        )

    if finished:
        best = min(finished, key=lambda h: (-h.normalized(), h.ids))
        return strip(best, truncated=False)
    best = min(live, key=lambda h: (-h.normalized(), h.ids))
    return strip(best, truncated=True)


@dataclass(frozen=True)
class DimensionPrediction:
    topic: Topic
    text: str
    empty: bool
    truncated: bool


def predict_dimension(
    adapter: SequenceAdapter,
    headline: str,
    dimension,
    config: GenerationConfig,
    force_topic: Optional[Topic] = None,
) -> DimensionPrediction:
    """Decode from headline + dimension token and split off the topic.

    The model normally predicts the topic token jointly with the
    inference; ``force_topic`` pins it for corpora whose topic is known.
    """
    from .encoding import encode_generation

    encoded = encode_generation(
        headline, dimension, mode=adapter.mode, tokenize=adapter.tokenize
    )
    prompt = encoded.input_tokens
    if force_topic is not None:
        prompt = prompt + (TOPIC_TOKENS[force_topic],)
    result = beam_decode(adapter, prompt, config)
    tokens = result.tokens
    if force_topic is not None:
        topic = force_topic
    else:
        if not tokens or tokens[0] not in TOPIC_BY_TOKEN:
            raise ParseError(
                f"decoded output does not start with a topic token: {tokens[:3]!r}"
            )
        topic = TOPIC_BY_TOKEN[tokens[0]]
        tokens = tokens[1:]
    text = adapter.detokenize([t for t in tokens if t != EOS_TOKEN]).strip()
    return DimensionPrediction(
        topic=topic, text=text, empty=not text, truncated=result.truncated
    )
