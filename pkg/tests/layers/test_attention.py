"""
Tests for similarity scorers and the attention functions built on them.
"""

import numpy as np
import pytest

from src.core.exceptions import ConfigError, ShapeError
from src.apps.layers import (
    AlignedQuestionEmbedding,
    DotProduct,
    MLPSimilarity,
    TriLinear,
    bi_attention,
    build_similarity,
    self_attention,
    uni_attention,
)
from src.tensor import Tensor, gradcheck, ops


class TestSimilarity:
    """
    Tests cover:
    - Each scorer against a direct per-pair computation
    - Factory and shape errors
    """

    @pytest.fixture(autouse=True)
    def setup_data(self, float64):
        self.rng = np.random.default_rng(2)
        self.H = Tensor(self.rng.normal(size=(2, 3, 4)))
        self.U = Tensor(self.rng.normal(size=(2, 5, 4)))

    def test_dot_product(self):
        """
        Verifies that:
        - Scores equal h . u, divided by sqrt(d) when scaled
        """
        plain = DotProduct()(self.H, self.U).data
        np.testing.assert_allclose(plain, np.einsum("btd,bjd->btj", self.H.data, self.U.data))
        scaled = DotProduct(scale=True)(self.H, self.U).data
        np.testing.assert_allclose(scaled, plain / 2.0)

    def test_trilinear_matches_concatenation(self):
        """
        Verifies that:
        - The factored computation equals w . [h; u; h * u] for every pair
        """
        sim = TriLinear(4, self.rng)
        w = np.concatenate([sim.weight_h.data[:, 0], sim.weight_u.data[:, 0], sim.weight_hu.data])
        scores = sim(self.H, self.U).data
        for b in range(2):
            for t in range(3):
                for j in range(5):
                    h, u = self.H.data[b, t], self.U.data[b, j]
                    expected = w @ np.concatenate([h, u, h * u])
                    assert scores[b, t, j] == pytest.approx(expected)

    def test_mlp(self):
        """
        Verifies that:
        - MLP scores equal v . tanh(W1 h + W2 u)
        - The hidden width defaults to the input width
        """
        sim = MLPSimilarity(4, self.rng)
        assert sim.vector.shape == (4, 1)
        scores = sim(self.H, self.U).data
        h, u = self.H.data[1, 2], self.U.data[1, 4]
        expected = np.tanh(h @ sim.weight_h.data + u @ sim.weight_u.data) @ sim.vector.data[:, 0]
        assert scores[1, 2, 4] == pytest.approx(expected)
        assert MLPSimilarity(4, self.rng, hidden_size=7).weight_h.shape == (4, 7)

    def test_factory_and_errors(self):
        """
        Verifies that:
        - build_similarity returns each known scorer
        - An unknown kind raises ConfigError
        - Mismatched widths raise ShapeError
        """
        assert isinstance(build_similarity("trilinear", 4), TriLinear)
        assert isinstance(build_similarity("mlp", 4), MLPSimilarity)
        assert isinstance(build_similarity("dot_product", 4), DotProduct)
        with pytest.raises(ConfigError):
            build_similarity("cosine", 4)
        with pytest.raises(ShapeError):
            DotProduct()(self.H, Tensor(np.ones((2, 5, 3))))


class TestAttention:
    """
    Tests cover:
    - Bi-directional attention shape, masking and gradients
    - Uni-directional and self attention
    - Aligned question embedding
    """

    @pytest.fixture(autouse=True)
    def setup_data(self, float64):
        self.rng = np.random.default_rng(3)
        self.H = Tensor(self.rng.normal(size=(2, 4, 3)), requires_grad=True)
        self.U = Tensor(self.rng.normal(size=(2, 3, 3)), requires_grad=True)
        self.S = Tensor(self.rng.normal(size=(2, 4, 3)), requires_grad=True)
        self.context_mask = np.array([[1, 1, 1, 1], [1, 1, 0, 0]], dtype=float)
        self.question_mask = np.array([[1, 1, 1], [1, 0, 0]], dtype=float)

    def test_bi_attention_shape(self):
        """
        Verifies that:
        - The output is [B, T, 4d] with H as the first block
        """
        G = bi_attention(self.S, self.H, self.U, self.context_mask, self.question_mask)
        assert G.shape == (2, 4, 12)
        np.testing.assert_array_equal(G.data[..., :3], self.H.data)

    def test_bi_attention_ignores_masked_question(self):
        """
        Verifies that:
        - Changing scores and encodings at masked question positions leaves the
          output unchanged
        """
        before = bi_attention(self.S, self.H, self.U, self.context_mask, self.question_mask).data
        S = self.S.data.copy()
        U = self.U.data.copy()
        S[1, :, 1:] += 100.0
        U[1, 1:] = -7.0
        after = bi_attention(Tensor(S), self.H, Tensor(U), self.context_mask, self.question_mask).data
        np.testing.assert_allclose(after, before)

    def test_bi_attention_gradients(self):
        """
        Verifies that:
        - Gradients through both attention directions match finite differences
        """
        weights = Tensor(self.rng.normal(size=(2, 4, 12)))

        def loss():
            G = bi_attention(self.S, self.H, self.U, self.context_mask, self.question_mask)
            return (G * weights).sum()

        assert gradcheck(loss, [self.S, self.H, self.U]) < 1e-5

    def test_bi_attention_shape_error(self):
        """
        Verifies that:
        - Scores that do not match the encodings raise ShapeError
        """
        with pytest.raises(ShapeError):
            bi_attention(self.U, self.H, self.U, self.context_mask, self.question_mask)

    def test_uni_attention(self):
        """
        Verifies that:
        - A [B, d] query returns [B, d_v]
        - The result equals a masked softmax-weighted sum of the values
        """
        query = Tensor(self.rng.normal(size=(2, 3)))
        values = Tensor(self.rng.normal(size=(2, 4, 5)))
        out = uni_attention(query, self.H, self.context_mask, values=values)
        assert out.shape == (2, 5)
        scores = self.H.data[1, :2] @ query.data[1]
        alpha = np.exp(scores - scores.max())
        alpha /= alpha.sum()
        np.testing.assert_allclose(out.data[1], alpha @ values.data[1, :2])
        with pytest.raises(ShapeError):
            uni_attention(query, self.H, self.context_mask, values=Tensor(np.ones((2, 3, 5))))

    def test_self_attention(self):
        """
        Verifies that:
        - Self attention keeps the input shape
        - With the diagonal excluded, a single-token sequence attends to nothing
        """
        out = self_attention(self.H, self.context_mask)
        assert out.shape == self.H.shape
        lonely = self_attention(Tensor(np.ones((1, 1, 3))), np.ones((1, 1)), exclude_diagonal=True)
        np.testing.assert_array_equal(lonely.data, np.zeros((1, 1, 3)))

    def test_aligned_question_embedding(self):
        """
        Verifies that:
        - When every real question word has the same embedding, each context
          word's aligned embedding equals it
        """
        layer = AlignedQuestionEmbedding(3, self.rng)
        question = np.tile(np.array([0.3, -1.0, 2.0]), (2, 3, 1))
        question[1, 1:] = 9.0
        out = layer(self.H, Tensor(question), self.question_mask)
        assert out.shape == (2, 4, 3)
        np.testing.assert_allclose(out.data, np.broadcast_to([0.3, -1.0, 2.0], (2, 4, 3)))
