from .schemas import BestMetric, Checkpoint, SummaryEvent, TrainState
from .ema import ExponentialMovingAverage
from .checkpoint import (
    MAGIC,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from .summary import SummaryWriter
from .trainer import (
    BEST_CHECKPOINT,
    LAST_CHECKPOINT,
    SUMMARY_FILE,
    Trainer,
    restore_weights,
    snapshot,
)

__all__ = [
    "BEST_CHECKPOINT",
    "BestMetric",
    "Checkpoint",
    "ExponentialMovingAverage",
    "LAST_CHECKPOINT",
    "MAGIC",
    "SUMMARY_FILE",
    "SummaryEvent",
    "SummaryWriter",
    "TrainState",
    "Trainer",
    "decode_checkpoint",
    "encode_checkpoint",
    "load_checkpoint",
    "restore_weights",
    "save_checkpoint",
    "snapshot",
]
