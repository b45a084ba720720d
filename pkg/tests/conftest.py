import numpy as np
import pytest

from reaction_frames.schema import (
    Dimension,
    GoldLabel,
    HeadlineRecord,
    PerceivedLabel,
    ReactionFrame,
    Record,
    Topic,
)
from reaction_frames.modeling import (
    EncodingMode,
    SequenceAdapter,
    TinyClassifier,
    TinyEncDecLM,
    TinyJointLM,
    TrainConfig,
    Vocab,
    encode_generation,
    train,
)

# Small memorizable corpus shared by the training, decoding and acceptance
# suites; session-scoped fixtures train each adapter exactly once.

HEADLINES = [
    "masks work well",
    "virus spreads fast",
    "ice caps melt",
    "storms get worse",
    "new cure found",
    "tests are free",
    "seas keep rising",
    "air gets cleaner",
]
INTENTS = [
    "masks help people",
    "the virus is quick",
    "the ice is melting",
    "storms are stronger",
    "a cure exists now",
    "testing costs nothing",
    "the sea is rising",
    "the air is better",
]
PERCEPTIONS = [
    "feel safe",
    "feel worried",
    "feel alarmed",
    "feel scared",
    "feel hopeful",
    "feel relieved",
    "feel anxious",
    "feel glad",
]
ACTIONS = [
    "buy a mask",
    "stay at home",
    "read more",
    "prepare early",
    "ask a doctor",
    "get tested",
    "move inland",
    "walk outside",
]
TOPICS = [Topic.COVID] * 4 + [Topic.CLIMATE] * 4
LABELS = [GoldLabel.REAL, GoldLabel.MISINFO] * 4

DIM_VALUES = {
    Dimension.WRITER_INTENT: INTENTS,
    Dimension.READER_PERCEPTION: PERCEPTIONS,
    Dimension.READER_ACTION: ACTIONS,
}


def make_record(
    idx: int = 0,
    text: str = "masks work well",
    topic: Topic = Topic.COVID,
    gold: GoldLabel = GoldLabel.REAL,
    intents=("masks are protective gear",),
    perceptions=("feel safe",),
    actions=("buy a mask",),
    spread: int = 4,
    perceived: PerceivedLabel = PerceivedLabel.REAL,
    split=None,
    date=None,
) -> Record:
    headline = HeadlineRecord(
        id=f"h{idx:04d}", text=text, topic=topic, gold_label=gold, split=split, date=date
    )
    frame = ReactionFrame(
        headline_id=headline.id,
        writer_intents=tuple(intents),
        reader_perceptions=tuple(perceptions),
        reader_actions=tuple(actions),
        spread=spread,
        perceived_label=perceived,
        gold_label=gold,
    )
    return Record(headline=headline, frame=frame)


def toy_records() -> list[Record]:
    records = []
    for i, (text, topic, gold) in enumerate(zip(HEADLINES, TOPICS, LABELS)):
        records.append(
            make_record(
                idx=i,
                text=text,
                topic=topic,
                gold=gold,
                intents=(INTENTS[i],),
                perceptions=(PERCEPTIONS[i],),
                actions=(ACTIONS[i],),
                spread=(i % 5) + 1,
                perceived=PerceivedLabel.REAL if gold is GoldLabel.REAL else PerceivedLabel.MISINFO,
            )
        )
    return records


@pytest.fixture(scope="session")
def toy_vocab() -> Vocab:
    return Vocab.from_texts(HEADLINES + INTENTS + PERCEPTIONS + ACTIONS)


def _generation_examples(mode: EncodingMode, dims=None):
    dims = dims or list(DIM_VALUES)
    examples = []
    for dim in dims:
        values = DIM_VALUES[dim]
        for h, t, topic in zip(HEADLINES, values, TOPICS):
            examples.append(
                encode_generation(h, dim, topic=topic, gold_inference=t, mode=mode)
            )
    return examples


@pytest.fixture(scope="session")
def joint_examples():
    return _generation_examples(EncodingMode.JOINT_SEQUENCE)


@pytest.fixture(scope="session")
def encdec_examples_16():
    return _generation_examples(
        EncodingMode.INPUT_OUTPUT, dims=[Dimension.WRITER_INTENT, Dimension.READER_ACTION]
    )


@pytest.fixture(scope="session")
def trained_joint(toy_vocab, joint_examples):
    adapter = TinyJointLM(toy_vocab, embedding_dim=24, hidden_dim=64, seed=0)
    config = TrainConfig(learning_rate=8e-3, batch_size=24, max_epochs=200, patience=200, seed=0)
    train(adapter, joint_examples, None, config)
    return adapter


@pytest.fixture(scope="session")
def trained_encdec(toy_vocab, encdec_examples_16):
    adapter = TinyEncDecLM(toy_vocab, embedding_dim=24, hidden_dim=64, seed=0)
    config = TrainConfig(learning_rate=1e-2, batch_size=16, max_epochs=150, patience=150, seed=0)
    train(adapter, encdec_examples_16, None, config)
    return adapter


@pytest.fixture(scope="session")
def trained_classifier(toy_vocab):
    examples = [(h, l.value) for h, l in zip(HEADLINES, LABELS)]
    adapter = TinyClassifier(toy_vocab, seed=0)
    config = TrainConfig(learning_rate=5e-3, batch_size=8, max_epochs=150, patience=150, seed=0)
    train(adapter, examples, None, config)
    return adapter


class TableAdapter(SequenceAdapter):
    """Deterministic stub: next-token distribution is a seeded function of
    the prefix. Small vocabularies make exhaustive decoding oracles cheap."""

    mode = EncodingMode.JOINT_SEQUENCE

    def __init__(self, vocab: Vocab, seed: int = 0):
        self.vocab = vocab
        self.seed = seed

    def _logprobs_for(self, ids: tuple[int, ...]) -> np.ndarray:
        rng = np.random.default_rng([self.seed, len(ids), *[i + 1 for i in ids]])
        logits = rng.normal(size=len(self.vocab))
        logits -= logits.max()
        return logits - np.log(np.exp(logits).sum())

    def next_token_logprobs(self, prefix, source=None) -> np.ndarray:
        return self._logprobs_for(tuple(self.vocab.encode(prefix)))

    def example_logprobs(self, example):
        stream = self.scored_tokens(example)
        ids = self.vocab.encode(stream)
        out = []
        for i in range(len(ids)):
            out.append(self._logprobs_for(tuple(ids[:i]))[ids[i]])
        return np.array(out)


class PreferredSequenceAdapter(SequenceAdapter):
    """Stub that strongly prefers one fixed continuation after the prompt."""

    mode = EncodingMode.JOINT_SEQUENCE

    def __init__(
        self,
        vocab: Vocab,
        preferred: tuple[str, ...],
        peak: float = 0.95,
        prompt_length: int = 0,
    ):
        self.vocab = vocab
        self.preferred = tuple(vocab.encode(preferred))
        self.peak = peak
        self.prompt_length = prompt_length

    def _logprobs_for(self, generated: tuple[int, ...]) -> np.ndarray:
        position = len(generated)
        if generated == self.preferred[:position] and position < len(self.preferred):
            target = self.preferred[position]
        else:
            target = self.vocab.eos_id
        probs = np.full(len(self.vocab), (1.0 - self.peak) / (len(self.vocab) - 1))
        probs[target] = self.peak
        return np.log(probs)

    def next_token_logprobs(self, prefix, source=None) -> np.ndarray:
        generated = tuple(self.vocab.encode(prefix))[self.prompt_length :]
        return self._logprobs_for(generated)

    def example_logprobs(self, example):
        raise NotImplementedError
