from typing import Any, Optional

import numpy as np

from src.apps.preprocess.vocabulary import PAD_INDEX, UNK_INDEX
from src.tensor import Tensor, ops
from .base import Layer, Parameter


class PartiallyTrainableEmbedding(Layer):
    """
    Word embedding where only the first `trainable_top_k` rows (and UNK, when any
    row trains) receive gradient. The PAD row is zero and never trains.

    `trainable_top_k=None` trains every row except PAD; 0 freezes the matrix.
    """

    def __init__(self, matrix: np.ndarray, trainable_top_k: Optional[int] = None):
        super().__init__()
        vocab_size, self.dim = matrix.shape
        matrix = np.array(matrix)
        matrix[PAD_INDEX] = 0.0
        k = vocab_size if trainable_top_k is None else min(trainable_top_k, vocab_size)
        row_mask = np.zeros(vocab_size)
        row_mask[:k] = 1.0
        if k > 0:
            row_mask[UNK_INDEX] = 1.0
        row_mask[PAD_INDEX] = 0.0
        self.weight = Parameter(matrix, trainable=bool(row_mask.any()))
        self.row_mask = row_mask.astype(self.weight.dtype)

    @property
    def trainable_rows(self) -> int:
        return int(self.row_mask.sum())

    def forward(self, ids: Any) -> Tensor:
        return ops.embedding_lookup(self.weight, ids, self.row_mask)
