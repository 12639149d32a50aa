import numpy as np
import pytest

from src.core.exceptions import ShapeError
from src.apps.layers import BiGRU, BiLSTM, StackedBiRNN, lengths_to_mask
from src.tensor import Tensor, gradcheck


class TestBiRNN:
    """
    Tests cover:
    - Output shapes and final states
    - The zero fixed point
    - Padding invariance
    - Gradients against finite differences
    """

    @pytest.fixture(autouse=True)
    def setup_data(self, float64):
        self.rng = np.random.default_rng(4)

    @pytest.mark.parametrize("rnn_class", [BiLSTM, BiGRU])
    def test_shape(self, rnn_class):
        """
        Verifies that:
        - [2, 3, 4] inputs give [2, 3, 2h] outputs and [2, h] final states
        """
        rnn = rnn_class(4, 5, self.rng)
        out, (fwd, bwd) = rnn(Tensor(self.rng.normal(size=(2, 3, 4))))
        assert out.shape == (2, 3, 10)
        assert fwd.shape == bwd.shape == (2, 5)
        assert rnn.output_size == 10

    @pytest.mark.parametrize("rnn_class", [BiLSTM, BiGRU])
    def test_zero_fixed_point(self, rnn_class):
        """
        Verifies that:
        - Zero inputs with zero parameters give zero outputs at every step
        """
        rnn = rnn_class(3, 2, self.rng)
        for p in rnn.parameters():
            p.data[...] = 0.0
        out, _ = rnn(Tensor(np.zeros((2, 4, 3))))
        np.testing.assert_array_equal(out.data, np.zeros((2, 4, 4)))

    @pytest.mark.parametrize("rnn_class", [BiLSTM, BiGRU])
    def test_padding_invariance(self, rnn_class):
        """
        Verifies that:
        - Appending padded steps leaves outputs at real steps unchanged
        - Outputs at padded steps are zero
        - The backward final state is the backward output at position 0
        """
        rnn = rnn_class(3, 2, self.rng)
        X = self.rng.normal(size=(2, 3, 3))
        lengths = np.array([3, 2])
        short, _ = rnn(Tensor(X), lengths=lengths)

        padded = np.concatenate([X, self.rng.normal(size=(2, 4, 3))], axis=1)
        long, (fwd, bwd) = rnn(Tensor(padded), lengths=lengths)
        np.testing.assert_allclose(long.data[0, :3], short.data[0], rtol=0, atol=1e-12)
        np.testing.assert_allclose(long.data[1, :2], short.data[1, :2], rtol=0, atol=1e-12)
        assert np.all(long.data[1, 2:] == 0.0)
        np.testing.assert_allclose(bwd.data, long.data[:, 0, 2:])
        np.testing.assert_allclose(fwd.data[1], long.data[1, 1, :2])

    def test_mask_and_lengths_agree(self):
        """
        Verifies that:
        - Passing a mask is the same as passing the lengths it encodes
        """
        rnn = BiLSTM(3, 2, self.rng)
        X = Tensor(self.rng.normal(size=(2, 5, 3)))
        lengths = [5, 2]
        by_lengths, _ = rnn(X, lengths=lengths)
        by_mask, _ = rnn(X, mask=lengths_to_mask(lengths, 5))
        np.testing.assert_array_equal(by_lengths.data, by_mask.data)

    @pytest.mark.parametrize("rnn_class", [BiLSTM, BiGRU])
    def test_gradients(self, rnn_class):
        """
        Verifies that:
        - Input and parameter gradients match finite differences within 1e-4
        """
        rnn = rnn_class(2, 2, self.rng)
        X = Tensor(self.rng.normal(size=(1, 3, 2)), requires_grad=True)
        weights = Tensor(self.rng.normal(size=(1, 3, 4)))

        def loss():
            out, _ = rnn(X)
            return (out * weights).sum()

        assert gradcheck(loss, [X] + rnn.parameters()) < 1e-4

    def test_shape_errors(self):
        """
        Verifies that:
        - A wrong input width raises ShapeError
        - Lengths longer than the sequence raise ShapeError
        """
        rnn = BiLSTM(3, 2, self.rng)
        with pytest.raises(ShapeError):
            rnn(Tensor(np.ones((1, 2, 4))))
        with pytest.raises(ShapeError):
            rnn(Tensor(np.ones((1, 2, 3))), lengths=[3])


class TestStackedBiRNN:
    """
    Tests cover:
    - Layer wiring and output widths
    """

    @pytest.fixture(autouse=True)
    def setup_data(self, float64):
        self.rng = np.random.default_rng(5)
        self.X = Tensor(self.rng.normal(size=(2, 4, 3)))
        self.mask = np.array([[1, 1, 1, 1], [1, 1, 0, 0]], dtype=float)

    def test_top_layer_only(self):
        """
        Verifies that:
        - Without concat_layers the output is the top layer's [B, T, 2h]
        - The second layer reads the first layer's 2h outputs
        """
        stack = StackedBiRNN(3, 2, 3, self.rng)
        assert stack.layers[1].input_size == 4
        out = stack(self.X, self.mask)
        assert out.shape == (2, 4, 4)
        assert stack.output_size == 4

    def test_concat_layers(self):
        """
        Verifies that:
        - With concat_layers every layer's output is kept
        - GRU layers can be stacked the same way
        """
        stack = StackedBiRNN(3, 2, 3, self.rng, dropout=0.3, concat_layers=True, rnn_class=BiGRU)
        stack.eval()
        out = stack(self.X, self.mask)
        assert out.shape == (2, 4, 12)
        assert stack.output_size == 12
        assert np.all(out.data[1, 2:] == 0.0)
