from .tensor import (
    Tensor,
    backward,
    checked_mode,
    get_default_dtype,
    is_checked,
    is_grad_enabled,
    no_grad,
    precision,
)
from . import ops
from .gradcheck import gradcheck

__all__ = [
    "Tensor",
    "backward",
    "checked_mode",
    "get_default_dtype",
    "gradcheck",
    "is_checked",
    "is_grad_enabled",
    "no_grad",
    "ops",
    "precision",
]
