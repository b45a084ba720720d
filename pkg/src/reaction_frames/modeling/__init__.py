from .encoding import (
    CONTROL_TOKENS,
    DIMENSION_TOKENS,
    EOS_TOKEN,
    TOPIC_TOKENS,
    EncodedExample,
    EncodingMode,
    ParseError,
    decode_categorical,
    encode_classification,
    encode_generation,
    examples_from_records,
    parse_training_encoding,
)
from .adapters import (
    ClassifierAdapter,
    SequenceAdapter,
    TinyClassifier,
    TinyEncDecLM,
    TinyJointLM,
    Vocab,
    classify,
    load_adapter,
    propaganda_zero_shot,
    sequence_loss,
)
from .decoding import (
    DecodeResult,
    DimensionPrediction,
    GenerationConfig,
    beam_decode,
    predict_dimension,
)
from .training import TrainConfig, TrainResult, classifier_defaults, generation_defaults, train
from .baselines import HashedNgramEmbedder, NearestNeighborIndex, nn_baseline

__all__ = [
    "CONTROL_TOKENS",
    "DIMENSION_TOKENS",
    "EOS_TOKEN",
    "TOPIC_TOKENS",
    "EncodedExample",
    "EncodingMode",
    "ParseError",
    "decode_categorical",
    "encode_classification",
    "encode_generation",
    "examples_from_records",
    "parse_training_encoding",
    "ClassifierAdapter",
    "SequenceAdapter",
    "TinyClassifier",
    "TinyEncDecLM",
    "TinyJointLM",
    "Vocab",
    "classify",
    "load_adapter",
    "propaganda_zero_shot",
    "sequence_loss",
    "DecodeResult",
    "DimensionPrediction",
    "GenerationConfig",
    "beam_decode",
    "predict_dimension",
    "TrainConfig",
    "TrainResult",
    "classifier_defaults",
    "generation_defaults",
    "train",
    "HashedNgramEmbedder",
    "NearestNeighborIndex",
    "nn_baseline",
]
