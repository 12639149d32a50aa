"""
Attention mechanisms built on a similarity scorer and masked softmax.
"""

import math
from typing import Any, Optional

import numpy as np

from src.core.exceptions import ShapeError
from src.tensor import Tensor, ops
from .base import Layer, uniform, zeros
from .masking import mask_logits, masked_softmax
from .similarity import DotProduct, Similarity


def bi_attention(
    S: Tensor,
    H: Tensor,
    U: Tensor,
    context_mask: np.ndarray,
    question_mask: np.ndarray,
) -> Tensor:
    """
    Fuse context and question with attention in both directions.

    Args:
        S: Similarity scores [B, T, J].
        H: Context encoding [B, T, d].
        U: Question encoding [B, J, d].
        context_mask: [B, T] 0/1.
        question_mask: [B, J] 0/1.

    Returns:
        [H; U~; H * U~; H * h~] of shape [B, T, 4d], where U~ attends over the
        question for every context word and h~ is the context summary weighted by
        each word's best question match.
    """
    if S.shape != (H.shape[0], H.shape[1], U.shape[1]):
        raise ShapeError(
            f"bi_attention: scores {S.shape} do not match context {H.shape} and question {U.shape}"
        )
    question_mask = np.asarray(question_mask)[:, None, :]
    c2q = masked_softmax(S, question_mask)
    attended_question = ops.matmul(c2q, U)

    best_match = ops.max(mask_logits(S, question_mask), axis=-1)
    q2c = masked_softmax(best_match, context_mask)
    attended_context = ops.matmul(ops.expand_dims(q2c, 1), H)

    return ops.concat(
        [H, attended_question, H * attended_question, H * attended_context], axis=-1
    )


def uni_attention(
    query: Tensor,
    keys: Tensor,
    mask: Any,
    values: Optional[Tensor] = None,
    similarity: Optional[Similarity] = None,
) -> Tensor:
    """
    Masked-softmax weighted sum of values for each query.

    Args:
        query: [B, d] or [B, Q, d].
        keys: [B, T, d].
        mask: [B, T] 0/1 over keys, or a [B, Q, T] mask.
        values: [B, T, d_v]; the keys when omitted.
        similarity: Scorer; unscaled dot product when omitted.

    Returns:
        [B, d_v] or [B, Q, d_v] following the rank of query.
    """
    values = keys if values is None else values
    if keys.shape[:2] != values.shape[:2] or query.shape[0] != keys.shape[0]:
        raise ShapeError(
            f"uni_attention: query {query.shape}, keys {keys.shape} and values "
            f"{values.shape} disagree"
        )
    similarity = similarity or DotProduct()
    single = query.ndim == 2
    if single:
        query = ops.expand_dims(query, 1)
    mask = np.asarray(mask)
    if mask.ndim == 2:
        mask = mask[:, None, :]
    weights = masked_softmax(similarity(query, keys), mask)
    out = ops.matmul(weights, values)
    return ops.squeeze(out, 1) if single else out


def self_attention(
    X: Tensor,
    mask: Any,
    similarity: Optional[Similarity] = None,
    exclude_diagonal: bool = False,
) -> Tensor:
    """Attend each position of X over X itself; a row with no allowed key is zero."""
    key_mask = np.asarray(mask)[:, None, :]
    if exclude_diagonal:
        length = X.shape[1]
        key_mask = key_mask * (1.0 - np.eye(length, dtype=key_mask.dtype))[None]
    return uni_attention(X, X, key_mask, similarity=similarity)


class AlignedQuestionEmbedding(Layer):
    """
    Soft-align each context word with the question words.

    Scores are dot products of relu(W x + b) projections of the two embeddings;
    the output is the attention-weighted sum of question embeddings.
    """

    def __init__(self, dim: int, rng: np.random.Generator):
        super().__init__()
        self.weight = uniform(rng, (dim, dim), 1.0 / math.sqrt(dim))
        self.bias = zeros((dim,))

    def project(self, x: Tensor) -> Tensor:
        return ops.relu(ops.matmul(x, self.weight) + self.bias)

    def forward(self, context: Tensor, question: Tensor, question_mask: Any) -> Tensor:
        return uni_attention(
            self.project(context),
            self.project(question),
            question_mask,
            values=question,
        )
