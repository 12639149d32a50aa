"""
Bidirectional recurrent encoders.

Sequences are unrolled one timestep at a time. On a padded step the state is
carried over unchanged and the output is zero, so the backward direction starts
from each sequence's own last position and appending padding never changes the
outputs at real positions.
"""

import math
from typing import Any, List, Optional, Tuple, Type

import numpy as np

from src.core.exceptions import ShapeError
from src.tensor import Tensor, ops
from .base import Layer, uniform
from .basic import VariationalDropout

State = Tuple[Tensor, ...]


def lengths_to_mask(lengths: Any, max_length: int, dtype: Any = None) -> np.ndarray:
    lengths = np.asarray(lengths)
    return (np.arange(max_length)[None, :] < lengths[:, None]).astype(dtype or np.float64)


class LSTMCell(Layer):
    """Gates in the order input, forget, cell, output; the forget-gate bias starts at 1."""

    def __init__(self, input_size: int, hidden_size: int, rng: np.random.Generator):
        super().__init__()
        self.hidden_size = hidden_size
        bound = 1.0 / math.sqrt(hidden_size)
        self.weight_ih = uniform(rng, (input_size, 4 * hidden_size), bound)
        self.weight_hh = uniform(rng, (hidden_size, 4 * hidden_size), bound)
        self.bias = uniform(rng, (4 * hidden_size,), bound)
        self.bias.data[hidden_size : 2 * hidden_size] = 1.0

    def initial_state(self, batch_size: int, dtype: Any) -> State:
        zero = np.zeros((batch_size, self.hidden_size), dtype=dtype)
        return Tensor.wrap(zero), Tensor.wrap(zero.copy())

    def forward(self, x: Tensor, state: State) -> State:
        h, c = state
        z = ops.matmul(x, self.weight_ih) + ops.matmul(h, self.weight_hh) + self.bias
        i, f, g, o = ops.split(z, 4, axis=-1)
        c_new = ops.sigmoid(f) * c + ops.sigmoid(i) * ops.tanh(g)
        h_new = ops.sigmoid(o) * ops.tanh(c_new)
        return h_new, c_new


class GRUCell(Layer):
    """Reset, update and candidate gates; the reset gate scales the recurrent candidate term."""

    def __init__(self, input_size: int, hidden_size: int, rng: np.random.Generator):
        super().__init__()
        self.hidden_size = hidden_size
        bound = 1.0 / math.sqrt(hidden_size)
        self.weight_ih = uniform(rng, (input_size, 3 * hidden_size), bound)
        self.weight_hh = uniform(rng, (hidden_size, 3 * hidden_size), bound)
        self.bias_ih = uniform(rng, (3 * hidden_size,), bound)
        self.bias_hh = uniform(rng, (3 * hidden_size,), bound)

    def initial_state(self, batch_size: int, dtype: Any) -> State:
        return (Tensor.wrap(np.zeros((batch_size, self.hidden_size), dtype=dtype)),)

    def forward(self, x: Tensor, state: State) -> State:
        (h,) = state
        x_r, x_z, x_n = ops.split(ops.matmul(x, self.weight_ih) + self.bias_ih, 3, axis=-1)
        h_r, h_z, h_n = ops.split(ops.matmul(h, self.weight_hh) + self.bias_hh, 3, axis=-1)
        r = ops.sigmoid(x_r + h_r)
        z = ops.sigmoid(x_z + h_z)
        n = ops.tanh(x_n + r * h_n)
        return ((1.0 - z) * n + z * h,)


def run_direction(
    cell: Layer, X: Tensor, mask: np.ndarray, reverse: bool = False
) -> Tuple[Tensor, Tensor]:
    """Unroll one cell over X [B, T, d]; returns outputs [B, T, h] and the final hidden state."""
    batch_size, length = X.shape[0], X.shape[1]
    state = cell.initial_state(batch_size, X.dtype)
    outputs: List[Optional[Tensor]] = [None] * length
    steps = range(length - 1, -1, -1) if reverse else range(length)
    for t in steps:
        keep = mask[:, t : t + 1]
        candidate = cell(X[:, t, :], state)
        state = tuple(keep * new + (1.0 - keep) * old for new, old in zip(candidate, state))
        outputs[t] = state[0] * keep
    if not outputs:
        empty = Tensor.wrap(np.zeros((batch_size, 0, cell.hidden_size), dtype=X.dtype))
        return empty, state[0]
    return ops.stack(outputs, axis=1), state[0]


class BiRNN(Layer):
    cell_class: Type[Layer] = LSTMCell

    def __init__(self, input_size: int, hidden_size: int, rng: np.random.Generator):
        super().__init__()
        self.input_size = input_size
        self.hidden_size = hidden_size
        self.forward_cell = self.cell_class(input_size, hidden_size, rng)
        self.backward_cell = self.cell_class(input_size, hidden_size, rng)

    @property
    def output_size(self) -> int:
        return 2 * self.hidden_size

    def forward(
        self, X: Tensor, mask: Any = None, lengths: Any = None
    ) -> Tuple[Tensor, Tuple[Tensor, Tensor]]:
        """
        Args:
            X: [B, T, d].
            mask: [B, T] 0/1; derived from lengths, or all ones, when omitted.
            lengths: [B] true sequence lengths, each <= T.

        Returns:
            Outputs [B, T, 2h] and the final (forward, backward) hidden states.

        Raises:
            ShapeError: If the input width or a length does not fit.
        """
        if X.ndim != 3 or X.shape[-1] != self.input_size:
            raise ShapeError(
                f"{type(self).__name__}: expected [B, T, {self.input_size}], got {X.shape}"
            )
        length = X.shape[1]
        if mask is None:
            if lengths is None:
                lengths = np.full(X.shape[0], length)
            if np.any(np.asarray(lengths) > length):
                raise ShapeError(f"lengths {list(lengths)} exceed sequence length {length}")
            mask = lengths_to_mask(lengths, length, X.dtype)
        mask = np.asarray(mask, dtype=X.dtype)
        forward_out, forward_final = run_direction(self.forward_cell, X, mask)
        backward_out, backward_final = run_direction(self.backward_cell, X, mask, reverse=True)
        return ops.concat([forward_out, backward_out], axis=-1), (forward_final, backward_final)


class BiLSTM(BiRNN):
    cell_class = LSTMCell


class BiGRU(BiRNN):
    cell_class = GRUCell


class StackedBiRNN(Layer):
    """
    Several BiRNN layers with variational dropout on each layer's input.

    With concat_layers the outputs of all layers are concatenated, otherwise only
    the top layer is returned.
    """

    def __init__(
        self,
        input_size: int,
        hidden_size: int,
        num_layers: int,
        rng: np.random.Generator,
        dropout: float = 0.0,
        concat_layers: bool = False,
        rnn_class: Type[BiRNN] = BiLSTM,
    ):
        super().__init__()
        self.concat_layers = concat_layers
        self.dropouts = [VariationalDropout(dropout) for _ in range(num_layers)]
        self.layers = [
            rnn_class(input_size if i == 0 else 2 * hidden_size, hidden_size, rng)
            for i in range(num_layers)
        ]
        self.output_size = 2 * hidden_size * (num_layers if concat_layers else 1)

    def forward(self, X: Tensor, mask: Any) -> Tensor:
        outputs = []
        current = X
        for dropout, rnn in zip(self.dropouts, self.layers):
            current, _ = rnn(dropout(current), mask)
            outputs.append(current)
        return ops.concat(outputs, axis=-1) if self.concat_layers else outputs[-1]
