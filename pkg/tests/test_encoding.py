import random
import string

import pytest

from reaction_frames.evaluation import UNPARSEABLE
from reaction_frames.schema import Dimension, GoldLabel, PerceivedLabel, Topic
from reaction_frames.modeling import (
    EncodedExample,
    EncodingMode,
    ParseError,
    decode_categorical,
    encode_classification,
    encode_generation,
    parse_training_encoding,
)
from reaction_frames.modeling.encoding import (
    char_detokenize,
    char_tokenize,
    word_detokenize,
    word_tokenize,
)


class TestEncodeGeneration:
    def test_joint_training_stream_word_level(self):
        example = encode_generation(
            "Masks work",
            Dimension.WRITER_INTENT,
            topic=Topic.COVID,
            gold_inference="masks reduce transmission",
            mode=EncodingMode.JOINT_SEQUENCE,
            tokenize=word_tokenize,
        )
        assert example.input_tokens == (
            "Masks",
            "work",
            "[writer_intent]",
            "[covid]",
            "masks",
            "reduce",
            "transmission",
            "[eos]",
        )
        assert example.target_tokens == example.input_tokens

    def test_input_output_streams_split(self):
        example = encode_generation(
            "Masks work",
            Dimension.READER_ACTION,
            topic=Topic.COVID,
            gold_inference="buy a mask",
            mode=EncodingMode.INPUT_OUTPUT,
            tokenize=word_tokenize,
        )
        assert example.input_tokens == ("Masks", "work", "[reader_action]")
        assert example.target_tokens == ("[covid]", "buy", "a", "mask", "[eos]")

    def test_inference_encoding_stops_at_dimension_token(self):
        example = encode_generation(
            "Masks work", Dimension.WRITER_INTENT, tokenize=word_tokenize
        )
        assert example.input_tokens == ("Masks", "work", "[writer_intent]")
        assert example.target_tokens == ()

    def test_empty_headline_errors(self):
        with pytest.raises(ValueError):
            encode_generation("   ", Dimension.WRITER_INTENT)

    def test_training_requires_topic(self):
        with pytest.raises(ValueError):
            encode_generation(
                "Masks work", Dimension.WRITER_INTENT, gold_inference="x"
            )

    def test_spread_serialized_as_bare_integer(self):
        from conftest import make_record

        frame = make_record(spread=4).frame
        assert frame.categorical_text(Dimension.SPREAD) == "4"


class TestRoundTrip:
    def test_char_level_round_trip_random(self):
        rng = random.Random(0)
        alphabet = string.ascii_letters + string.digits + " .,!?'\"-:;()"
        dims = list(Dimension)
        topics = list(Topic)
        for mode in EncodingMode:
            for _ in range(250):
                headline = "".join(rng.choices(alphabet, k=rng.randint(1, 60))).strip() or "x"
                gold = "".join(rng.choices(alphabet, k=rng.randint(1, 40)))
                dim = rng.choice(dims)
                topic = rng.choice(topics)
                example = encode_generation(
                    headline, dim, topic=topic, gold_inference=gold, mode=mode
                )
                parsed = parse_training_encoding(example)
                assert parsed == (headline, dim, topic, gold)

    def test_word_level_round_trip(self):
        example = encode_generation(
            "climate deal reached",
            Dimension.READER_PERCEPTION,
            topic=Topic.CLIMATE,
            gold_inference="feel hopeful now",
            mode=EncodingMode.JOINT_SEQUENCE,
            tokenize=word_tokenize,
        )
        parsed = parse_training_encoding(example, detokenize=word_detokenize)
        assert parsed == (
            "climate deal reached",
            Dimension.READER_PERCEPTION,
            Topic.CLIMATE,
            "feel hopeful now",
        )

    def test_parse_rejects_missing_topic(self):
        example = EncodedExample(
            input_tokens=("M", "[writer_intent]", "x", "[eos]"),
            target_tokens=("M", "[writer_intent]", "x", "[eos]"),
            mode=EncodingMode.JOINT_SEQUENCE,
        )
        with pytest.raises(ParseError):
            parse_training_encoding(example)


class TestEncodeClassification:
    def test_framed_with_cls_and_sep(self):
        tokens = encode_classification("Masks work", tokenize=word_tokenize)
        assert tokens == ("[cls]", "Masks", "work", "[sep]")

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            encode_classification("")


class TestDecodeCategorical:
    def test_misinfo(self):
        assert decode_categorical("misinfo", Dimension.GOLD_LABEL) is GoldLabel.MISINFO

    def test_misinformation_long_form(self):
        assert (
            decode_categorical("misinformation", Dimension.GOLD_LABEL)
            is GoldLabel.MISINFO
        )

    def test_real_perceived(self):
        assert (
            decode_categorical(" Real ", Dimension.PERCEIVED_LABEL)
            is PerceivedLabel.REAL
        )

    def test_spread_integer(self):
        assert decode_categorical("4", Dimension.SPREAD) == 4

    def test_unparseable_never_coerced(self):
        assert decode_categorical("maybe", Dimension.GOLD_LABEL) is UNPARSEABLE
        assert decode_categorical("6", Dimension.SPREAD) is UNPARSEABLE
        assert decode_categorical("4.5", Dimension.SPREAD) is UNPARSEABLE

    def test_free_text_dimension_rejected(self):
        with pytest.raises(ValueError):
            decode_categorical("x", Dimension.WRITER_INTENT)


def test_char_tokenizer_inverts_exactly():
    text = "Covid-19: cases up 5%! [brackets] stay safe."
    assert char_detokenize(char_tokenize(text)) == text
