import numpy as np
import pytest

from src.apps.layers import NEG_INF, mask_logits, masked_softmax
from src.tensor import Tensor


class TestMasking:
    """
    Tests cover:
    - masked_softmax output range, zeros and row sums
    - mask_logits replacement value
    """

    @pytest.fixture(autouse=True)
    def setup_data(self):
        rng = np.random.default_rng(11)
        self.logits = Tensor(rng.normal(scale=5.0, size=(6, 7)))
        self.mask = (rng.random((6, 7)) < 0.6).astype(np.float32)
        self.mask[0] = 0.0
        self.mask[1] = 1.0

    def test_masked_softmax_properties(self):
        """
        Verifies that:
        - Probabilities lie in [0, 1]
        - Masked entries are exactly 0
        - Each row sums to 1, or to 0 when every position is masked
        """
        probs = masked_softmax(self.logits, self.mask).data
        assert probs.min() >= 0.0 and probs.max() <= 1.0
        assert np.all(probs[self.mask == 0] == 0.0)
        sums = probs.sum(axis=-1)
        expected = (self.mask.sum(axis=-1) > 0).astype(float)
        np.testing.assert_allclose(sums, expected, atol=1e-6)

    def test_unmasked_row_is_plain_softmax(self):
        """
        Verifies that:
        - A row with every position allowed equals the ordinary softmax
        """
        probs = masked_softmax(self.logits, self.mask).data[1]
        row = self.logits.data[1]
        expected = np.exp(row - row.max()) / np.exp(row - row.max()).sum()
        np.testing.assert_allclose(probs, expected, rtol=1e-5)

    def test_mask_logits(self):
        """
        Verifies that:
        - Masked logits become NEG_INF and others are untouched
        """
        out = mask_logits(self.logits, self.mask).data
        np.testing.assert_allclose(out[self.mask == 1], self.logits.data[self.mask == 1], rtol=1e-6)
        np.testing.assert_allclose(out[self.mask == 0], NEG_INF, rtol=1e-6)
