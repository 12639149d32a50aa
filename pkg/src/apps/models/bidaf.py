from typing import Optional

import numpy as np

from src.apps.batching.schemas import Batch
from src.apps.layers import (
    BiLSTM,
    Highway,
    Linear,
    PartiallyTrainableEmbedding,
    StackedBiRNN,
    VariationalDropout,
    bi_attention,
    build_similarity,
)
from src.apps.preprocess.schemas import FeatureVocab
from src.tensor import ops
from .base import MRCModel
from .schemas import Mode, ModelConfig, ModelOutput


class BiDAF(MRCModel):
    """
    Bi-directional attention flow over word embeddings.

    embed -> highway -> shared BiLSTM encoder -> similarity -> bi-attention G ->
    two modeling BiLSTM layers M -> start from [G; M]; one more BiLSTM over M
    gives M2 and the end from [G; M2]. The character CNN is not included.
    """

    name = "bidaf"

    def __init__(
        self,
        config: ModelConfig,
        embedding: np.ndarray,
        feature_vocab: Optional[FeatureVocab] = None,
    ):
        super().__init__(config, embedding, feature_vocab)
        rng = self.rng
        dim = embedding.shape[1]
        hidden = config.hidden_size

        self.embedding = PartiallyTrainableEmbedding(embedding, config.embedding.trainable_top_k)
        self.highway = Highway(dim, config.highway_layers, rng)
        self.embedding_dropout = VariationalDropout(config.dropout)
        self.encoder = BiLSTM(dim, hidden, rng)
        self.similarity = build_similarity(config.similarity, 2 * hidden, rng)
        self.modeling = StackedBiRNN(8 * hidden, hidden, 2, rng, dropout=config.dropout)
        self.output_dropout = VariationalDropout(config.dropout)
        self.end_encoder = BiLSTM(2 * hidden, hidden, rng)
        self.start_pointer = Linear(10 * hidden, 1, rng)
        self.end_pointer = Linear(10 * hidden, 1, rng)

    def build_graph(self, batch: Batch, mode: Mode = "train") -> ModelOutput:
        self.train(mode == "train")
        context_mask, question_mask = batch.context_mask, batch.question_mask

        context = self.embedding_dropout(self.highway(self.embedding(batch.context_ids)))
        question = self.embedding_dropout(self.highway(self.embedding(batch.question_ids)))
        H, _ = self.encoder(context, context_mask)
        U, _ = self.encoder(question, question_mask)

        G = bi_attention(self.similarity(H, U), H, U, context_mask, question_mask)
        M = self.modeling(G, context_mask)
        M2, _ = self.end_encoder(self.output_dropout(M), context_mask)

        start = ops.squeeze(self.start_pointer(ops.concat([G, M], axis=-1)), -1)
        end = ops.squeeze(self.end_pointer(ops.concat([G, M2], axis=-1)), -1)
        return self.make_output(start, end, batch)
