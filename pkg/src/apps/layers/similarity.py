"""
Word-level similarity between two sequences.

Every scorer maps H [B, T, d] and U [B, J, d] to scores [B, T, J].
"""

import math
from typing import Optional

import numpy as np

from src.core.exceptions import ConfigError, ShapeError
from src.tensor import Tensor, ops
from .base import Layer, uniform


def _check_dims(name: str, H: Tensor, U: Tensor) -> None:
    if H.ndim != 3 or U.ndim != 3 or H.shape[-1] != U.shape[-1] or H.shape[0] != U.shape[0]:
        raise ShapeError(f"{name}: cannot compare shapes {H.shape} and {U.shape}")


class Similarity(Layer):
    pass


class DotProduct(Similarity):
    def __init__(self, scale: bool = False):
        super().__init__()
        self.scale = scale

    def forward(self, H: Tensor, U: Tensor) -> Tensor:
        _check_dims("DotProduct", H, U)
        scores = ops.matmul(H, ops.swapaxes(U, -1, -2))
        if self.scale:
            scores = scores * (1.0 / math.sqrt(H.shape[-1]))
        return scores


class TriLinear(Similarity):
    """w . [h; u; h * u], computed without materialising the [B, T, J, 3d] tensor."""

    def __init__(self, dim: int, rng: np.random.Generator):
        super().__init__()
        bound = 1.0 / math.sqrt(3 * dim)
        self.weight_h = uniform(rng, (dim, 1), bound)
        self.weight_u = uniform(rng, (dim, 1), bound)
        self.weight_hu = uniform(rng, (dim,), bound)

    def forward(self, H: Tensor, U: Tensor) -> Tensor:
        _check_dims("TriLinear", H, U)
        part_h = ops.matmul(H, self.weight_h)
        part_u = ops.swapaxes(ops.matmul(U, self.weight_u), -1, -2)
        part_hu = ops.matmul(H * self.weight_hu, ops.swapaxes(U, -1, -2))
        return part_hu + part_h + part_u


class MLPSimilarity(Similarity):
    """v . tanh(W1 h + W2 u) with a configurable hidden width (d when omitted)."""

    def __init__(self, dim: int, rng: np.random.Generator, hidden_size: Optional[int] = None):
        super().__init__()
        hidden_size = hidden_size or dim
        bound = 1.0 / math.sqrt(dim)
        self.weight_h = uniform(rng, (dim, hidden_size), bound)
        self.weight_u = uniform(rng, (dim, hidden_size), bound)
        self.vector = uniform(rng, (hidden_size, 1), 1.0 / math.sqrt(hidden_size))

    def forward(self, H: Tensor, U: Tensor) -> Tensor:
        _check_dims("MLPSimilarity", H, U)
        projected_h = ops.expand_dims(ops.matmul(H, self.weight_h), 2)
        projected_u = ops.expand_dims(ops.matmul(U, self.weight_u), 1)
        hidden = ops.tanh(projected_h + projected_u)
        scores = ops.matmul(hidden, self.vector)
        return ops.squeeze(scores, -1)


SIMILARITY_KINDS = ("dot_product", "trilinear", "mlp")


def build_similarity(
    kind: str,
    dim: int,
    rng: Optional[np.random.Generator] = None,
    scale: bool = False,
    hidden_size: Optional[int] = None,
) -> Similarity:
    """
    Raises:
        ConfigError: If kind is not one of SIMILARITY_KINDS.
    """
    rng = rng or np.random.default_rng(0)
    if kind == "dot_product":
        return DotProduct(scale=scale)
    if kind == "trilinear":
        return TriLinear(dim, rng)
    if kind == "mlp":
        return MLPSimilarity(dim, rng, hidden_size)
    raise ConfigError(f"Unknown similarity {kind!r}; expected one of {SIMILARITY_KINDS}")
