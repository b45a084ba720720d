"""Pluggable sequence/classifier model adapters.

The repo ships deterministic toy adapters: character-level GRU language
models small enough to overfit a handful of frames on a CPU in seconds.
Larger pretrained models can be wrapped behind the same interface; nothing
outside this module assumes a particular architecture.
"""
from __future__ import annotations

import abc
import json
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import torch
from torch import nn

from ..schema import GoldLabel
from .encoding import (
    CONTROL_TOKENS,
    EOS_TOKEN,
    EncodedExample,
    EncodingMode,
    char_detokenize,
    char_tokenize,
    encode_classification,
)

BOS_TOKEN = "[bos]"
UNK_TOKEN = "[unk]"
PAD_TOKEN = "[pad]"

SPECIAL_TOKENS = (PAD_TOKEN, UNK_TOKEN, BOS_TOKEN) + CONTROL_TOKENS


class Vocab:
    """Closed token vocabulary; unknown tokens map to [unk]."""

    def __init__(self, tokens: Sequence[str]):
        self.tokens = tuple(dict.fromkeys(tokens))
        self.index = {t: i for i, t in enumerate(self.tokens)}
        self.pad_id = self.index[PAD_TOKEN]
        self.unk_id = self.index[UNK_TOKEN]
        self.bos_id = self.index[BOS_TOKEN]
        self.eos_id = self.index[EOS_TOKEN]

    def __len__(self):
        return len(self.tokens)

    @classmethod
    def from_texts(cls, texts: Sequence[str]) -> "Vocab":
        chars = sorted({c for text in texts for c in text})
        return cls(SPECIAL_TOKENS + tuple(chars))

    def encode(self, tokens: Sequence[str]) -> list[int]:
        return [self.index.get(t, self.unk_id) for t in tokens]

    def decode(self, ids: Sequence[int]) -> list[str]:
        return [self.tokens[i] for i in ids]


class SequenceAdapter(abc.ABC):
    """Trainable sequence model surface used by training and decoding."""

    mode: EncodingMode
    vocab: Vocab

    def tokenize(self, text: str) -> list[str]:
        return char_tokenize(text)

    def detokenize(self, tokens: Sequence[str]) -> str:
        return char_detokenize(tokens)

    @abc.abstractmethod
    def next_token_logprobs(
        self,
        prefix: Sequence[str],
        source: Optional[Sequence[str]] = None,
    ) -> np.ndarray:
        """Log-probabilities over the vocabulary for the next token.

        ``prefix`` is the already-emitted stream (empty at the first step);
        input_output adapters condition on ``source`` as well.
        """

    @abc.abstractmethod
    def example_logprobs(self, example: EncodedExample) -> np.ndarray:
        """Per-token log-probabilities of the example's scored tokens."""

    def parameters(self):
        return []

    def training_loss(self, examples: Sequence[EncodedExample]) -> "torch.Tensor":
        raise NotImplementedError("adapter is not trainable")

    def save(self, path: str | Path) -> None:
        raise NotImplementedError

    def scored_tokens(self, example: EncodedExample) -> tuple[str, ...]:
        if example.mode is not self.mode:
            raise ValueError(
                f"example mode {example.mode.value} does not match adapter {self.mode.value}"
            )
        return (
            example.input_tokens
            if self.mode is EncodingMode.JOINT_SEQUENCE
            else example.target_tokens
        )


def sequence_loss(adapter: SequenceAdapter, example: EncodedExample) -> float:
    """Mean negative log-probability per scored token.

    Decoder-only examples score the full stream; encoder-decoder examples
    score target tokens only.
    """
    logprobs = adapter.example_logprobs(example)
    if logprobs.size == 0:
        raise ValueError("example has no scored tokens")
    return float(-logprobs.mean())


class _GRUCore(nn.Module):
    def __init__(self, vocab_size: int, embedding_dim: int, hidden_dim: int):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, embedding_dim)
        self.gru = nn.GRU(embedding_dim, hidden_dim, batch_first=True)
        self.out = nn.Linear(hidden_dim, vocab_size)

    def forward(self, ids: torch.Tensor, h0: Optional[torch.Tensor] = None):
        states, hn = self.gru(self.embed(ids), h0)
        return self.out(states), hn


def _pad_batch(sequences: list[list[int]], pad_id: int) -> tuple[torch.Tensor, torch.Tensor]:
    length = max(len(s) for s in sequences)
    ids = torch.full((len(sequences), length), pad_id, dtype=torch.long)
    mask = torch.zeros((len(sequences), length), dtype=torch.bool)
    for i, seq in enumerate(sequences):
        ids[i, : len(seq)] = torch.tensor(seq, dtype=torch.long)
        mask[i, : len(seq)] = True
    return ids, mask


def _masked_mean_nll(logits: torch.Tensor, targets: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    # mean NLL per example over its own tokens, then mean over the batch
    logprobs = torch.log_softmax(logits, dim=-1)
    token_nll = -logprobs.gather(-1, targets.unsqueeze(-1)).squeeze(-1)
    token_nll = token_nll * mask
    per_example = token_nll.sum(dim=1) / mask.sum(dim=1).clamp(min=1)
    return per_example.mean()


class TinyJointLM(SequenceAdapter):
    """Decoder-only character GRU scoring one joint stream."""

    mode = EncodingMode.JOINT_SEQUENCE

    def __init__(self, vocab: Vocab, embedding_dim: int = 24, hidden_dim: int = 48, seed: int = 0):
        self.vocab = vocab
        self.embedding_dim = embedding_dim
        self.hidden_dim = hidden_dim
        torch.manual_seed(seed)
        self.model = _GRUCore(len(vocab), embedding_dim, hidden_dim)

    def parameters(self):
        return self.model.parameters()

    def _stream_ids(self, tokens: Sequence[str]) -> list[int]:
        return [self.vocab.bos_id] + self.vocab.encode(tokens)

    @torch.no_grad()
    def next_token_logprobs(self, prefix, source=None) -> np.ndarray:
        self.model.eval()
        ids = torch.tensor([self._stream_ids(prefix)], dtype=torch.long)
        logits, _ = self.model(ids)
        return torch.log_softmax(logits[0, -1], dim=-1).numpy()

    @torch.no_grad()
    def example_logprobs(self, example: EncodedExample) -> np.ndarray:
        self.model.eval()
        stream = self.scored_tokens(example)
        ids = self._stream_ids(stream)
        inputs = torch.tensor([ids[:-1]], dtype=torch.long)
        targets = torch.tensor([ids[1:]], dtype=torch.long)
        logits, _ = self.model(inputs)
        logprobs = torch.log_softmax(logits, dim=-1)
        return logprobs.gather(-1, targets.unsqueeze(-1)).squeeze(-1)[0].numpy()

    def training_loss(self, examples: Sequence[EncodedExample]) -> torch.Tensor:
        self.model.train()
        streams = [self._stream_ids(self.scored_tokens(e)) for e in examples]
        inputs, _ = _pad_batch([s[:-1] for s in streams], self.vocab.pad_id)
        targets, mask = _pad_batch([s[1:] for s in streams], self.vocab.pad_id)
        logits, _ = self.model(inputs)
        return _masked_mean_nll(logits, targets, mask)

    def save(self, path: str | Path) -> None:
        _save_adapter(self, path, kind="tiny_joint")


class _CondDecoder(nn.Module):
    """GRU decoder fed the encoder context at every step."""

    def __init__(self, vocab_size: int, embedding_dim: int, hidden_dim: int):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, embedding_dim)
        self.gru = nn.GRU(embedding_dim + hidden_dim, hidden_dim, batch_first=True)
        self.out = nn.Linear(hidden_dim, vocab_size)

    def forward(self, ids: torch.Tensor, context: torch.Tensor):
        expanded = context.unsqueeze(1).expand(-1, ids.size(1), -1)
        states, hn = self.gru(
            torch.cat([self.embed(ids), expanded], dim=-1), context.unsqueeze(0)
        )
        return self.out(states), hn


class TinyEncDecLM(SequenceAdapter):
    """Encoder-decoder character GRU with separate input/target streams."""

    mode = EncodingMode.INPUT_OUTPUT

    def __init__(self, vocab: Vocab, embedding_dim: int = 24, hidden_dim: int = 48, seed: int = 0):
        self.vocab = vocab
        self.embedding_dim = embedding_dim
        self.hidden_dim = hidden_dim
        torch.manual_seed(seed)
        self.encoder_embed = nn.Embedding(len(vocab), embedding_dim)
        self.encoder = nn.GRU(embedding_dim, hidden_dim, batch_first=True)
        self.decoder = _CondDecoder(len(vocab), embedding_dim, hidden_dim)
        self.model = nn.ModuleDict(
            {
                "encoder_embed": self.encoder_embed,
                "encoder": self.encoder,
                "decoder": self.decoder,
            }
        )

    def parameters(self):
        return self.model.parameters()

    def _encode_sources(self, sources: list[list[int]]) -> torch.Tensor:
        ids, mask = _pad_batch(sources, self.vocab.pad_id)
        states, _ = self.encoder(self.encoder_embed(ids))
        lengths = mask.sum(dim=1) - 1
        return states[torch.arange(len(sources)), lengths]

    @torch.no_grad()
    def next_token_logprobs(self, prefix, source=None) -> np.ndarray:
        if source is None:
            raise ValueError("input_output adapter needs a source sequence")
        self.model.eval()
        context = self._encode_sources([self.vocab.encode(source)])
        ids = torch.tensor(
            [[self.vocab.bos_id] + self.vocab.encode(prefix)], dtype=torch.long
        )
        logits, _ = self.decoder(ids, context)
        return torch.log_softmax(logits[0, -1], dim=-1).numpy()

    @torch.no_grad()
    def example_logprobs(self, example: EncodedExample) -> np.ndarray:
        self.model.eval()
        target = self.scored_tokens(example)
        context = self._encode_sources([self.vocab.encode(example.input_tokens)])
        ids = [self.vocab.bos_id] + self.vocab.encode(target)
        inputs = torch.tensor([ids[:-1]], dtype=torch.long)
        targets = torch.tensor([ids[1:]], dtype=torch.long)
        logits, _ = self.decoder(inputs, context)
        logprobs = torch.log_softmax(logits, dim=-1)
        return logprobs.gather(-1, targets.unsqueeze(-1)).squeeze(-1)[0].numpy()

    def training_loss(self, examples: Sequence[EncodedExample]) -> torch.Tensor:
        self.model.train()
        context = self._encode_sources(
            [self.vocab.encode(e.input_tokens) for e in examples]
        )
        target_ids = [
            [self.vocab.bos_id] + self.vocab.encode(self.scored_tokens(e))
            for e in examples
        ]
        inputs, _ = _pad_batch([t[:-1] for t in target_ids], self.vocab.pad_id)
        targets, mask = _pad_batch([t[1:] for t in target_ids], self.vocab.pad_id)
        logits, _ = self.decoder(inputs, context)
        return _masked_mean_nll(logits, targets, mask)

    def save(self, path: str | Path) -> None:
        _save_adapter(self, path, kind="tiny_encdec")


class ClassifierAdapter(abc.ABC):
    """Discriminative flavor: label probabilities for a framed headline."""

    labels: tuple[str, ...]

    @abc.abstractmethod
    def label_probabilities(self, headline: str) -> dict[str, float]: ...

    def parameters(self):
        return []

    def training_loss(self, examples: Sequence[tuple[str, str]]) -> "torch.Tensor":
        raise NotImplementedError("adapter is not trainable")

    def example_loss(self, example: tuple[str, str]) -> float:
        text, label = example
        probs = self.label_probabilities(text)
        return float(-np.log(max(probs[label], 1e-12)))

    def save(self, path: str | Path) -> None:
        raise NotImplementedError


def classify(adapter: ClassifierAdapter, headline: str) -> dict[str, float]:
    """Label distribution for a headline; argmax is the prediction."""
    if not headline.strip():
        raise ValueError("empty headline")
    probs = adapter.label_probabilities(headline)
    total = sum(probs.values())
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"adapter probabilities sum to {total}, not 1")
    return probs


class TinyClassifier(ClassifierAdapter):
    """Mean-pooled character embeddings with an MLP head."""

    def __init__(
        self,
        vocab: Vocab,
        labels: Sequence[str] = (GoldLabel.REAL.value, GoldLabel.MISINFO.value),
        embedding_dim: int = 24,
        hidden_dim: int = 48,
        seed: int = 0,
    ):
        self.vocab = vocab
        self.labels = tuple(labels)
        self.embedding_dim = embedding_dim
        self.hidden_dim = hidden_dim
        torch.manual_seed(seed)
        self.embed = nn.Embedding(len(vocab), embedding_dim)
        self.head = nn.Sequential(
            nn.Linear(embedding_dim, hidden_dim),
            nn.Tanh(),
            nn.Linear(hidden_dim, len(self.labels)),
        )
        self.model = nn.ModuleDict({"embed": self.embed, "head": self.head})

    def parameters(self):
        return self.model.parameters()

    def _pooled(self, texts: Sequence[str]) -> torch.Tensor:
        ids = [self.vocab.encode(encode_classification(t)) for t in texts]
        padded, mask = _pad_batch(ids, self.vocab.pad_id)
        vectors = self.embed(padded) * mask.unsqueeze(-1)
        return vectors.sum(dim=1) / mask.sum(dim=1, keepdim=True).clamp(min=1)

    @torch.no_grad()
    def label_probabilities(self, headline: str) -> dict[str, float]:
        self.model.eval()
        logits = self.head(self._pooled([headline]))
        probs = torch.softmax(logits[0], dim=-1).numpy()
        return {label: float(p) for label, p in zip(self.labels, probs)}

    def training_loss(self, examples: Sequence[tuple[str, str]]) -> torch.Tensor:
        self.model.train()
        texts = [t for t, _ in examples]
        targets = torch.tensor(
            [self.labels.index(l) for _, l in examples], dtype=torch.long
        )
        logits = self.head(self._pooled(texts))
        return nn.functional.cross_entropy(logits, targets)

    def save(self, path: str | Path) -> None:
        _save_adapter(self, path, kind="tiny_classifier")


# -- persistence --


def _save_adapter(adapter, path: str | Path, kind: str) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    meta = {
        "kind": kind,
        "tokens": list(adapter.vocab.tokens),
        "embedding_dim": adapter.embedding_dim,
        "hidden_dim": adapter.hidden_dim,
    }
    if kind == "tiny_classifier":
        meta["labels"] = list(adapter.labels)
    (path / "adapter.json").write_text(json.dumps(meta), encoding="utf-8")
    torch.save(adapter.model.state_dict(), path / "weights.pt")


def load_adapter(path: str | Path):
    path = Path(path)
    meta = json.loads((path / "adapter.json").read_text(encoding="utf-8"))
    vocab = Vocab(meta["tokens"])
    kind = meta["kind"]
    if kind == "tiny_joint":
        adapter = TinyJointLM(vocab, meta["embedding_dim"], meta["hidden_dim"])
    elif kind == "tiny_encdec":
        adapter = TinyEncDecLM(vocab, meta["embedding_dim"], meta["hidden_dim"])
    elif kind == "tiny_classifier":
        adapter = TinyClassifier(
            vocab, meta["labels"], meta["embedding_dim"], meta["hidden_dim"]
        )
    else:
        raise ValueError(f"unknown adapter kind {kind!r}")
    adapter.model.load_state_dict(torch.load(path / "weights.pt", weights_only=True))
    return adapter


def propaganda_zero_shot(technique_list: Sequence[str]) -> GoldLabel:
    """Zero-shot veracity from an external propaganda-technique classifier:
    headlines flagged with no technique count as real, all others misinfo."""
    return GoldLabel.REAL if not technique_list else GoldLabel.MISINFO
