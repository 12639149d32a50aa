from .schemas import EmbeddingConfig, ModelConfig, ModelOutput, OptimizerConfig
from .optim import (
    OPTIMIZERS,
    SGD,
    Adadelta,
    Adam,
    ExponentialDecay,
    Optimizer,
    build_optimizer,
    clip_grad_norm,
    global_norm,
)
from .base import MRCModel, decode_span
from .bidaf import BiDAF
from .drqa import DrQA
from .registry import MODELS, build_model, get_model_class

__all__ = [
    "Adadelta",
    "Adam",
    "BiDAF",
    "DrQA",
    "EmbeddingConfig",
    "ExponentialDecay",
    "MODELS",
    "MRCModel",
    "ModelConfig",
    "ModelOutput",
    "OPTIMIZERS",
    "Optimizer",
    "OptimizerConfig",
    "SGD",
    "build_model",
    "build_optimizer",
    "clip_grad_norm",
    "decode_span",
    "get_model_class",
    "global_norm",
]
