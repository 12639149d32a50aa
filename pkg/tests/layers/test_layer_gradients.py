"""
Finite-difference checks of every differentiable layer on random instances, and
self attention against a per-position loop.
"""

import numpy as np
import pytest

from src.apps.layers import (
    AlignedQuestionEmbedding,
    BilinearPointer,
    MLPSimilarity,
    ReduceSequence,
    TriLinear,
    self_attention,
    uni_attention,
)
from src.tensor import Tensor, gradcheck

SEEDS = range(20)
B, T, J, D = 2, 3, 2, 2


def random_mask(rng: np.random.Generator, length: int) -> np.ndarray:
    lengths = rng.integers(1, length + 1, size=B)
    return (np.arange(length)[None, :] < lengths[:, None]).astype(np.float64)


def weighted_total(out: Tensor, weights: Tensor) -> Tensor:
    return (out * weights).sum()


def trilinear_case(rng):
    H = Tensor(rng.normal(size=(B, T, D)), requires_grad=True)
    U = Tensor(rng.normal(size=(B, J, D)), requires_grad=True)
    layer = TriLinear(D, rng)
    weights = Tensor(rng.normal(size=(B, T, J)))
    return lambda: weighted_total(layer(H, U), weights), [H, U, *layer.parameters()]


def mlp_similarity_case(rng):
    H = Tensor(rng.normal(size=(B, T, D)), requires_grad=True)
    U = Tensor(rng.normal(size=(B, J, D)), requires_grad=True)
    layer = MLPSimilarity(D, rng, hidden_size=3)
    weights = Tensor(rng.normal(size=(B, T, J)))
    return lambda: weighted_total(layer(H, U), weights), [H, U, *layer.parameters()]


def uni_attention_case(rng):
    query = Tensor(rng.normal(size=(B, D)), requires_grad=True)
    keys = Tensor(rng.normal(size=(B, T, D)), requires_grad=True)
    values = Tensor(rng.normal(size=(B, T, 3)), requires_grad=True)
    mask = random_mask(rng, T)
    weights = Tensor(rng.normal(size=(B, 3)))
    return (
        lambda: weighted_total(uni_attention(query, keys, mask, values=values), weights),
        [query, keys, values],
    )


def self_attention_case(rng):
    X = Tensor(rng.normal(size=(B, T, D)), requires_grad=True)
    mask = random_mask(rng, T)
    weights = Tensor(rng.normal(size=(B, T, D)))
    return (
        lambda: weighted_total(self_attention(X, mask, exclude_diagonal=True), weights),
        [X],
    )


def bilinear_pointer_case(rng):
    context = Tensor(rng.normal(size=(B, T, 3)), requires_grad=True)
    question = Tensor(rng.normal(size=(B, D)), requires_grad=True)
    layer = BilinearPointer(3, D, rng)
    weights = Tensor(rng.normal(size=(B, T)))
    return (
        lambda: weighted_total(layer(context, question), weights),
        [context, question, *layer.parameters()],
    )


def aligned_question_case(rng):
    context = Tensor(rng.normal(size=(B, T, D)), requires_grad=True)
    question = Tensor(rng.normal(size=(B, J, D)), requires_grad=True)
    mask = random_mask(rng, J)
    layer = AlignedQuestionEmbedding(D, rng)
    weights = Tensor(rng.normal(size=(B, T, D)))
    return (
        lambda: weighted_total(layer(context, question, mask), weights),
        [context, question, *layer.parameters()],
    )


def weighted_sum_case(rng):
    x = Tensor(rng.normal(size=(B, T, D)), requires_grad=True)
    mask = random_mask(rng, T)
    layer = ReduceSequence("weighted_sum", D, rng)
    weights = Tensor(rng.normal(size=(B, D)))
    return lambda: weighted_total(layer(x, mask), weights), [x, *layer.parameters()]


CASES = {
    "trilinear": trilinear_case,
    "mlp_similarity": mlp_similarity_case,
    "uni_attention": uni_attention_case,
    "self_attention": self_attention_case,
    "bilinear_pointer": bilinear_pointer_case,
    "aligned_question": aligned_question_case,
    "weighted_sum": weighted_sum_case,
}


class TestLayerGradients:
    """
    Tests cover:
    - Analytic gradients of each layer against central differences, on twenty
      random instances per layer
    """

    @pytest.fixture(autouse=True)
    def setup_data(self, float64):
        self.tolerance = 1e-5

    @pytest.mark.parametrize("seed", SEEDS)
    @pytest.mark.parametrize("name", sorted(CASES))
    def test_gradients_match_differences(self, name, seed):
        """
        Verifies that:
        - The maximum relative gradient error stays below 1e-5
        """
        loss, inputs = CASES[name](np.random.default_rng(seed))
        assert gradcheck(loss, inputs) < self.tolerance


class TestSelfAttentionOracle:
    """
    Tests cover:
    - self_attention against an explicit loop over positions for T <= 5
    """

    @pytest.fixture(autouse=True)
    def setup_data(self, float64):
        self.rng = np.random.default_rng(5)

    @staticmethod
    def loop_attention(X: np.ndarray, lengths: np.ndarray, exclude_diagonal: bool) -> np.ndarray:
        out = np.zeros_like(X)
        for b in range(X.shape[0]):
            for t in range(X.shape[1]):
                keys = [j for j in range(lengths[b]) if not (exclude_diagonal and j == t)]
                if not keys:
                    continue
                scores = np.array([X[b, t] @ X[b, j] for j in keys])
                alpha = np.exp(scores - scores.max())
                alpha /= alpha.sum()
                out[b, t] = sum(a * X[b, j] for a, j in zip(alpha, keys))
        return out

    @pytest.mark.parametrize("exclude_diagonal", [False, True])
    @pytest.mark.parametrize("length", [1, 2, 3, 4, 5])
    def test_matches_loop(self, length, exclude_diagonal):
        """
        Verifies that:
        - Every output row equals the softmax-weighted sum over its allowed keys
        - Rows with no allowed key are zero
        """
        X = self.rng.normal(size=(3, length, 4))
        lengths = self.rng.integers(1, length + 1, size=3)
        mask = (np.arange(length)[None, :] < lengths[:, None]).astype(np.float64)
        out = self_attention(Tensor(X), mask, exclude_diagonal=exclude_diagonal)
        np.testing.assert_allclose(
            out.data, self.loop_attention(X, lengths, exclude_diagonal), rtol=1e-10, atol=1e-12
        )
