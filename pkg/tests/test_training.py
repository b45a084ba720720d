import math

import numpy as np
import pytest

from reaction_frames.modeling import (
    EncodingMode,
    SequenceAdapter,
    TinyClassifier,
    TinyEncDecLM,
    TinyJointLM,
    TrainConfig,
    Vocab,
    classifier_defaults,
    encode_generation,
    generation_defaults,
    load_adapter,
    sequence_loss,
    train,
)
from reaction_frames.schema import Dimension, Topic
from conftest import HEADLINES, LABELS, TableAdapter


class PerfectAdapter(SequenceAdapter):
    mode = EncodingMode.JOINT_SEQUENCE

    def __init__(self, vocab):
        self.vocab = vocab

    def next_token_logprobs(self, prefix, source=None):
        raise NotImplementedError

    def example_logprobs(self, example):
        return np.zeros(len(self.scored_tokens(example)))


class UniformAdapter(SequenceAdapter):
    mode = EncodingMode.JOINT_SEQUENCE

    def __init__(self, vocab):
        self.vocab = vocab

    def next_token_logprobs(self, prefix, source=None):
        return np.full(len(self.vocab), -math.log(len(self.vocab)))

    def example_logprobs(self, example):
        return np.full(len(self.scored_tokens(example)), -math.log(len(self.vocab)))


def joint_example(headline="masks work", gold="buy a mask"):
    return encode_generation(
        headline,
        Dimension.READER_ACTION,
        topic=Topic.COVID,
        gold_inference=gold,
        mode=EncodingMode.JOINT_SEQUENCE,
    )


class TestSequenceLoss:
    def test_probability_one_gives_zero_loss(self, toy_vocab):
        assert sequence_loss(PerfectAdapter(toy_vocab), joint_example()) == 0.0

    def test_uniform_adapter_gives_log_vocab(self, toy_vocab):
        loss = sequence_loss(UniformAdapter(toy_vocab), joint_example())
        assert loss == pytest.approx(math.log(len(toy_vocab)))

    def test_flavor_mismatch_rejected(self, toy_vocab):
        example = encode_generation(
            "masks work",
            Dimension.READER_ACTION,
            topic=Topic.COVID,
            gold_inference="buy a mask",
            mode=EncodingMode.INPUT_OUTPUT,
        )
        with pytest.raises(ValueError, match="mode"):
            sequence_loss(PerfectAdapter(toy_vocab), example)

    def test_loss_nonnegative_for_real_adapter(self, toy_vocab):
        adapter = TinyJointLM(toy_vocab, seed=1)
        assert sequence_loss(adapter, joint_example()) >= 0.0

    def test_memorized_corpus_loss_below_0p05(self, trained_encdec, encdec_examples_16):
        losses = [sequence_loss(trained_encdec, e) for e in encdec_examples_16]
        assert max(losses) < 0.05


class TestTrain:
    def test_empty_training_set_rejected(self, toy_vocab):
        with pytest.raises(ValueError):
            train(TinyJointLM(toy_vocab), [], None, TrainConfig())

    def test_early_stopping_halts_before_max(self, toy_vocab, joint_examples):
        adapter = TinyJointLM(toy_vocab, seed=0)
        config = TrainConfig(learning_rate=0.0, max_epochs=10, patience=2, seed=0)
        result = train(adapter, joint_examples[:4], None, config)
        assert result.stopped_early
        assert len(result.dev_losses) == 3  # first epoch + patience misses

    def test_fixed_seed_reproduces_dev_losses(self, toy_vocab, joint_examples):
        config = TrainConfig(learning_rate=5e-3, max_epochs=5, patience=5, seed=4)
        first = train(TinyJointLM(toy_vocab, seed=4), joint_examples, None, config)
        second = train(TinyJointLM(toy_vocab, seed=4), joint_examples, None, config)
        assert first.dev_losses == second.dev_losses

    def test_overfit_loss_decreases_monotonically_first_three_epochs(
        self, toy_vocab, joint_examples
    ):
        adapter = TinyJointLM(toy_vocab, seed=0)
        config = TrainConfig(learning_rate=8e-3, batch_size=24, max_epochs=3, patience=3, seed=0)
        result = train(adapter, joint_examples[:16], None, config)
        assert result.dev_losses[0] > result.dev_losses[1] > result.dev_losses[2]

    def test_warmup_slows_early_updates(self, toy_vocab, joint_examples):
        examples = joint_examples[:8]
        fast = TinyJointLM(toy_vocab, seed=0)
        slow = TinyJointLM(toy_vocab, seed=0)
        config = TrainConfig(learning_rate=5e-3, max_epochs=2, patience=5, seed=0)
        warm = TrainConfig(
            learning_rate=5e-3, max_epochs=2, patience=5, seed=0, warmup_steps=500
        )
        fast_result = train(fast, examples, None, config)
        slow_result = train(slow, examples, None, warm)
        assert slow_result.dev_losses[-1] > fast_result.dev_losses[-1]

    def test_defaults_match_reference_configuration(self):
        assert generation_defaults("joint_sequence").learning_rate == 2e-5
        assert generation_defaults("input_output").learning_rate == 5e-5
        assert generation_defaults("joint_sequence").max_epochs == 10
        clf = classifier_defaults()
        assert clf.learning_rate == 1.5e-5
        assert clf.max_epochs == 30


class TestPersistence:
    def test_joint_save_load_round_trip(self, tmp_path, toy_vocab, joint_examples):
        adapter = TinyJointLM(toy_vocab, seed=0)
        train(
            adapter,
            joint_examples[:8],
            None,
            TrainConfig(learning_rate=5e-3, max_epochs=2, patience=5, seed=0),
        )
        adapter.save(tmp_path / "model")
        loaded = load_adapter(tmp_path / "model")
        example = joint_examples[0]
        assert sequence_loss(loaded, example) == pytest.approx(
            sequence_loss(adapter, example)
        )

    def test_classifier_save_load_round_trip(self, tmp_path, toy_vocab):
        adapter = TinyClassifier(toy_vocab, seed=0)
        examples = [(h, l.value) for h, l in zip(HEADLINES, LABELS)]
        train(
            adapter,
            examples,
            None,
            TrainConfig(learning_rate=5e-3, max_epochs=5, patience=9, seed=0),
        )
        adapter.save(tmp_path / "clf")
        loaded = load_adapter(tmp_path / "clf")
        assert loaded.label_probabilities(HEADLINES[0]) == pytest.approx(
            adapter.label_probabilities(HEADLINES[0])
        )

    def test_encdec_save_load_round_trip(self, tmp_path, toy_vocab, encdec_examples_16):
        adapter = TinyEncDecLM(toy_vocab, seed=0)
        train(
            adapter,
            encdec_examples_16[:4],
            None,
            TrainConfig(learning_rate=5e-3, max_epochs=2, patience=5, seed=0),
        )
        adapter.save(tmp_path / "encdec")
        loaded = load_adapter(tmp_path / "encdec")
        example = encdec_examples_16[0]
        assert sequence_loss(loaded, example) == pytest.approx(
            sequence_loss(adapter, example)
        )
