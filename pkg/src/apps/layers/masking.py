from typing import Any

from src.tensor import Tensor, ops

NEG_INF = -1e30


def masked_softmax(logits: Tensor, mask: Any, axis: int = -1) -> Tensor:
    """Softmax over positions where mask is 1; masked entries are 0 and an all-masked row is all 0."""
    return ops.softmax(logits, axis=axis, mask=mask)


def mask_logits(logits: Tensor, mask: Any) -> Tensor:
    """Replace masked logits by -1e30, leaving the others unchanged."""
    m = ops.as_tensor(mask, like=logits)
    return logits * m + (1.0 - m) * NEG_INF
