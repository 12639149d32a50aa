from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict


class Batch(BaseModel):
    """
    Index-mapped, padded tensors for one forward pass.

    T and J are the longest context and question in this batch; padded id
    positions hold PAD (0) and padded mask positions hold 0. Span labels are -1
    for instances without an answer span.
    """

    qids: List[str]
    context_ids: np.ndarray
    question_ids: np.ndarray
    context_mask: np.ndarray
    question_mask: np.ndarray
    context_lengths: np.ndarray
    question_lengths: np.ndarray
    tf: np.ndarray
    exact_match: np.ndarray
    tags: Dict[str, np.ndarray] = {}
    span_start: np.ndarray
    span_end: np.ndarray
    context_char_ids: Optional[np.ndarray] = None
    question_char_ids: Optional[np.ndarray] = None
    contexts: List[str]
    context_offsets: List[List[Tuple[int, int]]]

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def size(self) -> int:
        return len(self.qids)

    @property
    def has_labels(self) -> bool:
        return bool(np.any(self.span_start >= 0))
