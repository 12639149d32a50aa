from typing import Callable, Sequence

import numpy as np

from src.core.exceptions import TensorError
from .tensor import Tensor, backward, no_grad


def gradcheck(
    fn: Callable[[], Tensor],
    inputs: Sequence[Tensor],
    eps: float = 1e-5,
    floor: float = 1e-3,
) -> float:
    """
    Compare analytic gradients with central finite differences.

    Args:
        fn: Recomputes a scalar loss from the current values of `inputs`.
        inputs: 64-bit tensors with requires_grad set.
        eps: Finite-difference step.
        floor: Lower bound of the relative-error denominator, so entries whose true
            gradient is ~0 are compared absolutely.

    Returns:
        The maximum relative error over every entry of every input.

    Raises:
        TensorError: If an input is not 64-bit.
    """
    for tensor in inputs:
        if tensor.dtype != np.float64:
            raise TensorError(
                f"gradcheck needs float64 inputs, got {tensor.dtype} for {tensor!r}"
            )
        tensor.grad = None
        tensor.data = np.ascontiguousarray(tensor.data)

    backward(fn())
    analytic = [
        np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in inputs
    ]

    worst = 0.0
    with no_grad():
        for tensor, expected in zip(inputs, analytic):
            flat = tensor.data.reshape(-1)
            expected = expected.reshape(-1)
            for i in range(flat.size):
                original = flat[i]
                flat[i] = original + eps
                plus = fn().item()
                flat[i] = original - eps
                minus = fn().item()
                flat[i] = original
                numeric = (plus - minus) / (2 * eps)
                scale = max(abs(numeric), abs(expected[i]), floor)
                worst = max(worst, abs(numeric - expected[i]) / scale)
    return worst
