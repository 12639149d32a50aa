from typing import Any, Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.config import settings
from src.apps.evaluation.schemas import EvalResult


class BestMetric(BaseModel):
    name: str = "f1"
    value: float
    exact_match: float
    epoch: int
    step: int


class TrainState(BaseModel):
    """Progress of a run. `epoch` counts completed epochs."""

    epoch: int = 0
    global_step: int = 0
    evaluations: int = 0
    best: Optional[BestMetric] = None
    patience_counter: int = 0
    seed: int = settings.DEFAULT_SEED
    stopped_early: bool = False

    def is_improvement(self, result: EvalResult) -> bool:
        """F1 decides; exact match breaks a tie."""
        if self.best is None:
            return True
        if result.f1 != self.best.value:
            return result.f1 > self.best.value
        return result.exact_match > self.best.exact_match


class SummaryEvent(BaseModel):
    step: int
    epoch: int
    loss: Optional[float] = None
    lr: Optional[float] = None
    grad_norm: Optional[float] = None
    em: Optional[float] = None
    f1: Optional[float] = None


class Checkpoint(BaseModel):
    """
    Everything needed to restore a model, and optionally to continue its training.

    `optimizer` holds `{"scalars": {...}, "arrays": {...}}` as produced by
    `Optimizer.state_dict()`.
    """

    version: int = settings.CHECKPOINT_FORMAT_VERSION
    config_hash: str
    model_config_data: Dict[str, Any] = {}
    parameters: Dict[str, np.ndarray]
    ema: Optional[Dict[str, np.ndarray]] = None
    optimizer: Optional[Dict[str, Any]] = None
    train_state: Optional[TrainState] = None

    model_config = ConfigDict(arbitrary_types_allowed=True)
