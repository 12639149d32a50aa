from typing import List, Optional

import numpy as np

from src.apps.batching.schemas import Batch
from src.apps.layers import (
    AlignedQuestionEmbedding,
    BilinearPointer,
    PartiallyTrainableEmbedding,
    ReduceSequence,
    StackedBiRNN,
    VariationalDropout,
)
from src.apps.preprocess.schemas import FeatureVocab
from src.tensor import Tensor, ops
from .base import MRCModel
from .schemas import Mode, ModelConfig, ModelOutput


class DrQA(MRCModel):
    """
    Document reader: each context word is the concatenation of its embedding,
    the aligned question embedding, term frequency, the three exact-match flags
    and tag embeddings, encoded by stacked BiLSTMs. The question is encoded the
    same way from its embeddings alone and summarised by a learned weighted sum;
    start and end are bilinear scores against that summary.
    """

    name = "drqa"

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
        self.embedding_dropout = VariationalDropout(config.dropout)
        self.aligned = AlignedQuestionEmbedding(dim, rng) if config.use_aligned_question else None

        self.tag_features: List[str] = sorted(self.config.tag_sizes) if config.use_tags else []
        self.tag_embeddings = [
            PartiallyTrainableEmbedding(
                rng.uniform(-0.1, 0.1, (self.config.tag_sizes[f], config.tag_dim)), None
            )
            for f in self.tag_features
        ]

        input_size = dim
        input_size += dim if self.aligned is not None else 0
        input_size += 1 if config.use_tf else 0
        input_size += 3 if config.use_exact_match else 0
        input_size += config.tag_dim * len(self.tag_features)

        self.context_rnn = StackedBiRNN(
            input_size, hidden, config.num_layers, rng, config.dropout, concat_layers=True
        )
        self.question_rnn = StackedBiRNN(
            dim, hidden, config.num_layers, rng, config.dropout, concat_layers=True
        )
        context_size = self.context_rnn.output_size
        question_size = self.question_rnn.output_size
        self.question_merge = ReduceSequence("weighted_sum", question_size, rng)
        self.start_pointer = BilinearPointer(context_size, question_size, rng)
        self.end_pointer = BilinearPointer(context_size, question_size, rng)

    def context_inputs(self, batch: Batch, context: Tensor, question: Tensor) -> Tensor:
        parts = [context]
        if self.aligned is not None:
            parts.append(self.aligned(context, question, batch.question_mask))
        if self.config.use_tf:
            parts.append(Tensor.wrap(batch.tf[:, :, None].astype(context.dtype)))
        if self.config.use_exact_match:
            parts.append(Tensor.wrap(batch.exact_match.astype(context.dtype)))
        for feature, table in zip(self.tag_features, self.tag_embeddings):
            parts.append(table(batch.tags[feature]))
        return ops.concat(parts, axis=-1)

    def build_graph(self, batch: Batch, mode: Mode = "train") -> ModelOutput:
        self.train(mode == "train")
        context = self.embedding_dropout(self.embedding(batch.context_ids))
        question = self.embedding_dropout(self.embedding(batch.question_ids))

        encoded_context = self.context_rnn(
            self.context_inputs(batch, context, question), batch.context_mask
        )
        encoded_question = self.question_rnn(question, batch.question_mask)
        summary = self.question_merge(encoded_question, batch.question_mask)

        start = self.start_pointer(encoded_context, summary)
        end = self.end_pointer(encoded_context, summary)
        return self.make_output(start, end, batch)
