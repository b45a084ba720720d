"""Control-token encodings for generation and classification inputs.

Generation input is the headline followed by a dimension control token;
at training time the topic control token, the gold inference and an end
token are appended (single stream for decoder-only models, target stream
for encoder-decoder models). At inference the model continues from the
dimension token, so the topic is predicted jointly with the inference.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

from ..evaluation import UNPARSEABLE, Unparseable
from ..schema import Dimension, GoldLabel, PerceivedLabel, Topic

EOS_TOKEN = "[eos]"
CLS_TOKEN = "[cls]"
SEP_TOKEN = "[sep]"

DIMENSION_TOKENS = {d: f"[{d.value}]" for d in Dimension}
TOPIC_TOKENS = {t: f"[{t.value}]" for t in Topic}
DIMENSION_BY_TOKEN = {v: k for k, v in DIMENSION_TOKENS.items()}
TOPIC_BY_TOKEN = {v: k for k, v in TOPIC_TOKENS.items()}

CONTROL_TOKENS = tuple(DIMENSION_TOKENS.values()) + tuple(TOPIC_TOKENS.values()) + (
    EOS_TOKEN,
    CLS_TOKEN,
    SEP_TOKEN,
)


class EncodingMode(str, Enum):
    JOINT_SEQUENCE = "joint_sequence"  # decoder-only, one stream
    INPUT_OUTPUT = "input_output"  # encoder-decoder, separate streams


Tokenizer = Callable[[str], list[str]]
Detokenizer = Callable[[Sequence[str]], str]


def char_tokenize(text: str) -> list[str]:
    return list(text)


def char_detokenize(tokens: Sequence[str]) -> str:
    return "".join(tokens)


def word_tokenize(text: str) -> list[str]:
    return text.split()


def word_detokenize(tokens: Sequence[str]) -> str:
    return " ".join(tokens)


@dataclass(frozen=True)
class EncodedExample:
    """Token-level input/target pair for a sequence adapter."""

    input_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]
    mode: EncodingMode


class ParseError(ValueError):
    pass


def encode_generation(
    headline: str,
    dimension: Dimension,
    topic: Optional[Topic] = None,
    gold_inference: Optional[str] = None,
    mode: EncodingMode = EncodingMode.JOINT_SEQUENCE,
    tokenize: Tokenizer = char_tokenize,
) -> EncodedExample:
    """Build the training or inference encoding for one example.

    Training (``gold_inference`` given) appends topic token, gold tokens
    and the end token; decoder-only examples score the whole stream, so
    input and target coincide. Inference encodings stop after the
    dimension token and leave the target empty.
    """
    if not headline.strip():
        raise ValueError("empty headline")
    prefix = tuple(tokenize(headline)) + (DIMENSION_TOKENS[dimension],)
    if gold_inference is None:
        return EncodedExample(input_tokens=prefix, target_tokens=(), mode=mode)
    if topic is None:
        raise ValueError("training encoding requires a topic")
    continuation = (
        (TOPIC_TOKENS[topic],) + tuple(tokenize(gold_inference)) + (EOS_TOKEN,)
    )
    if mode is EncodingMode.JOINT_SEQUENCE:
        stream = prefix + continuation
        return EncodedExample(input_tokens=stream, target_tokens=stream, mode=mode)
    return EncodedExample(input_tokens=prefix, target_tokens=continuation, mode=mode)


def parse_training_encoding(
    example: EncodedExample,
    detokenize: Detokenizer = char_detokenize,
) -> tuple[str, Dimension, Topic, str]:
    """Recover (headline, dimension, topic, gold inference) from a training
    encoding. Assumes headline/inference text contains no control-token
    literals, which holds for all tokenizers shipped here."""
    if example.mode is EncodingMode.JOINT_SEQUENCE:
        stream = example.input_tokens
        dim_index = next(
            (i for i, t in enumerate(stream) if t in DIMENSION_BY_TOKEN), None
        )
        if dim_index is None:
            raise ParseError("no dimension control token")
        head_tokens = stream[:dim_index]
        tail = stream[dim_index + 1 :]
    else:
        if not example.input_tokens or example.input_tokens[-1] not in DIMENSION_BY_TOKEN:
            raise ParseError("input does not end with a dimension control token")
        dim_index = len(example.input_tokens) - 1
        head_tokens = example.input_tokens[:-1]
        stream = example.input_tokens
        tail = example.target_tokens
    dimension = DIMENSION_BY_TOKEN[stream[dim_index]]
    if not tail or tail[0] not in TOPIC_BY_TOKEN:
        raise ParseError("no topic control token after dimension token")
    topic = TOPIC_BY_TOKEN[tail[0]]
    body = tail[1:]
    if not body or body[-1] != EOS_TOKEN:
        raise ParseError("target does not end with the end token")
    return detokenize(head_tokens), dimension, topic, detokenize(body[:-1])


def encode_classification(headline: str, tokenize: Tokenizer = char_tokenize) -> tuple[str, ...]:
    """Frame a headline for a discriminative classifier."""
    if not headline.strip():
        raise ValueError("empty headline")
    return (CLS_TOKEN,) + tuple(tokenize(headline)) + (SEP_TOKEN,)


def examples_from_records(
    records,
    dimensions: Sequence[Dimension],
    mode: EncodingMode = EncodingMode.JOINT_SEQUENCE,
    tokenize: Tokenizer = char_tokenize,
) -> list[EncodedExample]:
    """Training encodings for every (headline, dimension, annotation) pair.

    Free-text dimensions yield one example per annotation value;
    categorical dimensions serialize their single value (spread as the
    bare integer string).
    """
    from ..schema import FREE_TEXT_DIMENSIONS

    examples = []
    for record in records:
        frame = record.frame
        if frame is None:
            continue
        for dimension in dimensions:
            if dimension in FREE_TEXT_DIMENSIONS:
                targets = frame.free_text(dimension)
            else:
                targets = (frame.categorical_text(dimension),)
            for target in targets:
                examples.append(
                    encode_generation(
                        record.headline.text,
                        dimension,
                        topic=record.headline.topic,
                        gold_inference=target,
                        mode=mode,
                        tokenize=tokenize,
                    )
                )
    return examples


def decode_categorical(
    text: str, dimension: Dimension
) -> GoldLabel | PerceivedLabel | int | Unparseable:
    """Map generated text to a categorical value.

    Real/misinfo surface forms and bare 1-5 integers are accepted;
    everything else is UNPARSEABLE and scores as an incorrect prediction,
    never a silent coercion.
    """
    if dimension not in (
        Dimension.SPREAD,
        Dimension.PERCEIVED_LABEL,
        Dimension.GOLD_LABEL,
    ):
        raise ValueError(f"{dimension.value} is not categorical")
    normalized = text.strip().lower()
    if dimension is Dimension.SPREAD:
        if normalized in {"1", "2", "3", "4", "5"}:
            return int(normalized)
        return UNPARSEABLE
    if normalized == "real":
        return GoldLabel.REAL if dimension is Dimension.GOLD_LABEL else PerceivedLabel.REAL
    if normalized in ("misinfo", "misinformation"):
        return GoldLabel.MISINFO if dimension is Dimension.GOLD_LABEL else PerceivedLabel.MISINFO
    return UNPARSEABLE
