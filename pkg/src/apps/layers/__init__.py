from .base import Layer, Parameter
from .masking import NEG_INF, mask_logits, masked_softmax
from .similarity import (
    DotProduct,
    MLPSimilarity,
    SIMILARITY_KINDS,
    Similarity,
    TriLinear,
    build_similarity,
)
from .basic import (
    BilinearPointer,
    Highway,
    Linear,
    ReduceSequence,
    VariationalDropout,
    reduce_sequence,
)
from .attention import AlignedQuestionEmbedding, bi_attention, self_attention, uni_attention
from .recurrent import (
    BiGRU,
    BiLSTM,
    BiRNN,
    GRUCell,
    LSTMCell,
    StackedBiRNN,
    lengths_to_mask,
)
from .embedding import PartiallyTrainableEmbedding

__all__ = [
    "AlignedQuestionEmbedding",
    "BiGRU",
    "BiLSTM",
    "BiRNN",
    "BilinearPointer",
    "DotProduct",
    "GRUCell",
    "Highway",
    "LSTMCell",
    "Layer",
    "Linear",
    "MLPSimilarity",
    "NEG_INF",
    "Parameter",
    "PartiallyTrainableEmbedding",
    "ReduceSequence",
    "SIMILARITY_KINDS",
    "Similarity",
    "StackedBiRNN",
    "TriLinear",
    "VariationalDropout",
    "bi_attention",
    "build_similarity",
    "lengths_to_mask",
    "mask_logits",
    "masked_softmax",
    "reduce_sequence",
    "self_attention",
    "uni_attention",
]
