import math
from typing import Any, Literal, Optional

import numpy as np

from src.core.exceptions import ConfigError, ShapeError
from src.tensor import Tensor, ops
from .base import Layer, uniform, zeros
from .masking import mask_logits, masked_softmax

ReduceKind = Literal["max", "mean", "weighted_sum"]


class Linear(Layer):
    def __init__(
        self, input_size: int, output_size: int, rng: np.random.Generator, bias: bool = True
    ):
        super().__init__()
        bound = 1.0 / math.sqrt(input_size)
        self.weight = uniform(rng, (input_size, output_size), bound)
        self.bias = uniform(rng, (output_size,), bound) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        out = ops.matmul(x, self.weight)
        return out + self.bias if self.bias is not None else out


class Highway(Layer):
    """Per layer: y = g * relu(W x + b) + (1 - g) * x with g = sigmoid(W_g x + b_g)."""

    def __init__(self, dim: int, num_layers: int, rng: np.random.Generator):
        super().__init__()
        self.transforms = [Linear(dim, dim, rng) for _ in range(num_layers)]
        self.gates = [Linear(dim, dim, rng) for _ in range(num_layers)]

    def forward(self, x: Tensor) -> Tensor:
        for transform, gate in zip(self.transforms, self.gates):
            g = ops.sigmoid(gate(x))
            x = g * ops.relu(transform(x)) + (1.0 - g) * x
        return x


class VariationalDropout(Layer):
    """
    Dropout whose mask is sampled once per (batch row, feature) and shared by all
    timesteps. Identity in eval mode or with rate 0.
    """

    stochastic = True

    def __init__(self, rate: float, seed: int = 0):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ConfigError(f"dropout rate must lie in [0, 1), got {rate}")
        self.rate = rate
        self.rng = np.random.default_rng(seed)

    def forward(self, x: Tensor) -> Tensor:
        if not self.training or self.rate == 0.0:
            return x
        shape = (x.shape[0],) + (1,) * (x.ndim - 2) + (x.shape[-1],)
        keep = self.rng.random(shape) < 1.0 - self.rate
        return x * (keep.astype(x.dtype) / (1.0 - self.rate))


def reduce_sequence(
    x: Tensor, mask: Any, kind: ReduceKind = "max", weight: Optional[Tensor] = None
) -> Tensor:
    """
    Collapse [B, T, d] to [B, d] over unmasked positions.

    Args:
        x: Sequence values.
        mask: [B, T] 0/1.
        kind: max, mean, or weighted_sum (softmax of x @ weight over the mask).
        weight: [d, 1] scoring vector, required for weighted_sum.
    """
    mask = np.asarray(mask, dtype=x.dtype)
    if mask.shape != x.shape[:2]:
        raise ShapeError(f"reduce_sequence: mask {mask.shape} does not fit {x.shape}")
    if kind == "max":
        return ops.max(mask_logits(x, mask[:, :, None]), axis=1)
    if kind == "mean":
        counts = np.maximum(mask.sum(axis=1, keepdims=True), 1.0)
        return ops.sum(x * mask[:, :, None], axis=1) / counts
    if kind == "weighted_sum":
        if weight is None:
            raise ConfigError("weighted_sum needs a scoring weight")
        scores = ops.squeeze(ops.matmul(x, weight), -1)
        alpha = masked_softmax(scores, mask)
        return ops.squeeze(ops.matmul(ops.expand_dims(alpha, 1), x), 1)
    raise ConfigError(f"Unknown reduction {kind!r}")


class ReduceSequence(Layer):
    def __init__(self, kind: ReduceKind, dim: int = 0, rng: Optional[np.random.Generator] = None):
        super().__init__()
        self.kind = kind
        self.weight = None
        if kind == "weighted_sum":
            rng = rng or np.random.default_rng(0)
            self.weight = uniform(rng, (dim, 1), 1.0 / math.sqrt(dim))

    def forward(self, x: Tensor, mask: Any) -> Tensor:
        return reduce_sequence(x, mask, self.kind, self.weight)


class BilinearPointer(Layer):
    """Scores every context position against a question summary: p_t . (W q)."""

    def __init__(self, context_size: int, question_size: int, rng: np.random.Generator):
        super().__init__()
        bound = 1.0 / math.sqrt(question_size)
        self.weight = uniform(rng, (question_size, context_size), bound)
        self.bias = zeros((context_size,))

    def forward(self, context: Tensor, question: Tensor) -> Tensor:
        projected = ops.matmul(question, self.weight) + self.bias
        scores = ops.matmul(context, ops.expand_dims(projected, -1))
        return ops.squeeze(scores, -1)
