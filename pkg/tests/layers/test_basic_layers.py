import numpy as np
import pytest

from src.core.exceptions import CheckpointError, ConfigError, ShapeError
from src.apps.layers import (
    BilinearPointer,
    Highway,
    Linear,
    PartiallyTrainableEmbedding,
    ReduceSequence,
    VariationalDropout,
    reduce_sequence,
)
from src.apps.preprocess import PAD_INDEX, UNK_INDEX
from src.tensor import Tensor, gradcheck


class TestBasicLayers:
    """
    Tests cover:
    - Linear, Highway and bilinear pointer shapes and values
    - Variational dropout masks
    - Sequence reductions over masks
    """

    @pytest.fixture(autouse=True)
    def setup_data(self, float64):
        self.rng = np.random.default_rng(6)
        self.x = Tensor(self.rng.normal(size=(2, 4, 3)))
        self.mask = np.array([[1, 1, 1, 0], [1, 0, 0, 0]], dtype=float)

    def test_linear(self):
        """
        Verifies that:
        - Linear computes x W + b and works without a bias
        """
        layer = Linear(3, 5, self.rng)
        out = layer(self.x)
        np.testing.assert_allclose(out.data, self.x.data @ layer.weight.data + layer.bias.data)
        assert len(Linear(3, 5, self.rng, bias=False).parameters()) == 1

    def test_highway_closed_gate_is_identity(self):
        """
        Verifies that:
        - A highway layer whose gate is shut passes its input through
        - Gradients match finite differences
        """
        highway = Highway(3, 2, self.rng)
        for gate in highway.gates:
            gate.weight.data[...] = 0.0
            gate.bias.data[...] = -1000.0
        np.testing.assert_allclose(highway(self.x).data, self.x.data)

        open_highway = Highway(3, 1, self.rng)
        assert gradcheck(lambda: (open_highway(self.x) ** 2.0).sum(), open_highway.parameters()) < 1e-5

    def test_dropout_mask_shared_over_time(self):
        """
        Verifies that:
        - One mask per (row, feature) is applied at every timestep
        - Kept values are scaled by 1 / (1 - rate)
        - Eval mode and rate 0 are the identity
        """
        dropout = VariationalDropout(0.5, seed=1)
        x = Tensor(np.ones((3, 6, 8)))
        out = dropout(x).data
        np.testing.assert_array_equal(out, np.broadcast_to(out[:, :1, :], out.shape))
        assert set(np.unique(out)) <= {0.0, 2.0}
        dropout.eval()
        np.testing.assert_array_equal(dropout(x).data, x.data)
        np.testing.assert_array_equal(VariationalDropout(0.0)(x).data, x.data)

    def test_dropout_rate_range(self):
        """
        Verifies that:
        - Rates outside [0, 1) raise ConfigError
        """
        with pytest.raises(ConfigError):
            VariationalDropout(1.0)
        with pytest.raises(ConfigError):
            VariationalDropout(-0.1)

    def test_reductions(self):
        """
        Verifies that:
        - max and mean only see unmasked positions
        - weighted_sum with a zero scorer is the masked mean
        - A mask of the wrong shape raises ShapeError
        """
        data = self.x.data.copy()
        data[0, 3] = 1e6
        x = Tensor(data)
        np.testing.assert_allclose(reduce_sequence(x, self.mask, "max").data[0], data[0, :3].max(axis=0))
        np.testing.assert_allclose(reduce_sequence(x, self.mask, "mean").data[0], data[0, :3].mean(axis=0))
        np.testing.assert_allclose(reduce_sequence(x, self.mask, "mean").data[1], data[1, 0])

        layer = ReduceSequence("weighted_sum", 3, self.rng)
        layer.weight.data[...] = 0.0
        np.testing.assert_allclose(layer(x, self.mask).data[0], data[0, :3].mean(axis=0))
        with pytest.raises(ShapeError):
            reduce_sequence(x, self.mask[:, :2])
        with pytest.raises(ConfigError):
            reduce_sequence(x, self.mask, "weighted_sum")

    def test_bilinear_pointer(self):
        """
        Verifies that:
        - Scores are p_t . (W q + b) with shape [B, T]
        """
        pointer = BilinearPointer(3, 5, self.rng)
        q = Tensor(self.rng.normal(size=(2, 5)))
        scores = pointer(self.x, q)
        assert scores.shape == (2, 4)
        expected = self.x.data[1, 2] @ (q.data[1] @ pointer.weight.data + pointer.bias.data)
        assert scores.data[1, 2] == pytest.approx(expected)


class TestPartiallyTrainableEmbedding:
    """
    Tests cover:
    - Which rows receive gradient
    - Frozen and fully trainable settings
    """

    @pytest.fixture(autouse=True)
    def setup_data(self, float64):
        self.matrix = np.random.default_rng(7).normal(size=(8, 3))
        self.ids = np.array([[0, 1, 2, 5], [7, 3, 0, 0]])

    def test_top_k_rows(self):
        """
        Verifies that:
        - The PAD row is zero and receives no gradient
        - Only the first k rows and UNK are updated
        """
        embedding = PartiallyTrainableEmbedding(self.matrix, trainable_top_k=4)
        assert np.all(embedding.weight.data[PAD_INDEX] == 0.0)
        assert embedding.trainable_rows == 3
        embedding(self.ids).sum().backward()
        grad = embedding.weight.grad
        assert np.all(grad[PAD_INDEX] == 0.0)
        assert np.all(grad[UNK_INDEX] == 1.0)
        assert np.all(grad[[2, 3]] == 1.0)
        assert np.all(grad[[5, 7]] == 0.0)

    def test_frozen_and_full(self):
        """
        Verifies that:
        - k = 0 freezes the matrix
        - k = None trains every row but PAD
        """
        assert not PartiallyTrainableEmbedding(self.matrix, trainable_top_k=0).weight.trainable
        full = PartiallyTrainableEmbedding(self.matrix)
        assert full.weight.trainable
        assert full.trainable_rows == 7


class TestLayerBase:
    """
    Tests cover:
    - Parameter naming and discovery
    - state_dict round trips and errors
    - train/eval propagation and reseeding
    """

    @pytest.fixture(autouse=True)
    def setup_data(self):
        self.rng = np.random.default_rng(8)
        self.highway = Highway(3, 2, self.rng)

    def test_named_parameters(self):
        """
        Verifies that:
        - Parameters in lists get indexed dotted names
        """
        names = [name for name, _ in self.highway.named_parameters()]
        assert "transforms.0.weight" in names
        assert "gates.1.bias" in names
        assert len(names) == len(set(names)) == 8

    def test_state_dict(self):
        """
        Verifies that:
        - Loading a state dict restores every array
        - Missing names raise CheckpointError and bad shapes raise ShapeError
        """
        state = self.highway.state_dict()
        other = Highway(3, 2, np.random.default_rng(99))
        other.load_state_dict(state)
        for name, value in other.state_dict().items():
            np.testing.assert_array_equal(value, state[name])

        partial = dict(state)
        partial.pop("gates.0.weight")
        with pytest.raises(CheckpointError):
            other.load_state_dict(partial)
        state["gates.0.weight"] = np.zeros((2, 2))
        with pytest.raises(ShapeError):
            other.load_state_dict(state)

    def test_train_eval_and_reseed(self):
        """
        Verifies that:
        - eval() reaches nested layers
        - reseed gives the same dropout masks for the same (seed, step)
        """
        dropout = VariationalDropout(0.5)
        holder = Highway(3, 1, self.rng)
        holder.extra = [dropout]
        holder.eval()
        assert not dropout.training
        holder.train()
        x = Tensor(np.ones((2, 2, 3)))
        holder.reseed(1, 10)
        first = dropout(x).data
        holder.reseed(1, 10)
        np.testing.assert_array_equal(dropout(x).data, first)
