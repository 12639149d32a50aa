"""
Optimizers, global-norm clipping and the learning-rate schedule.
"""

import math
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from src.core.exceptions import CheckpointError, ConfigError
from src.apps.layers.base import Parameter
from .schemas import OptimizerConfig

NamedParameters = Sequence[Tuple[str, Parameter]]


def global_norm(parameters: NamedParameters) -> float:
    total = 0.0
    for _, p in parameters:
        if p.grad is not None:
            total += float(np.sum(np.square(p.grad, dtype=np.float64)))
    return math.sqrt(total)


def clip_grad_norm(parameters: NamedParameters, max_norm: Optional[float]) -> float:
    """Rescale gradients in place so their global norm is at most max_norm; returns the norm before clipping."""
    norm = global_norm(parameters)
    if max_norm is not None and norm > max_norm:
        scale = max_norm / norm
        for _, p in parameters:
            if p.grad is not None:
                p.grad = p.grad * scale
    return norm


class ExponentialDecay:
    """lr(step) = base_lr * decay ** (step / decay_steps), floored when staircase."""

    def __init__(
        self,
        base_lr: float,
        decay: Optional[float] = None,
        decay_steps: Optional[int] = None,
        staircase: bool = True,
    ):
        self.base_lr = base_lr
        self.decay = decay
        self.decay_steps = decay_steps
        self.staircase = staircase

    def __call__(self, step: int) -> float:
        if self.decay is None or not self.decay_steps:
            return self.base_lr
        exponent = step / self.decay_steps
        if self.staircase:
            exponent = math.floor(exponent)
        return self.base_lr * self.decay**exponent


class Optimizer(ABC):
    slots: Tuple[str, ...] = ()

    def __init__(self, parameters: NamedParameters, schedule: ExponentialDecay):
        self.parameters = list(parameters)
        self.schedule = schedule
        self.step_count = 0
        self.state: Dict[str, Dict[str, np.ndarray]] = {
            slot: {name: np.zeros_like(p.data) for name, p in self.parameters}
            for slot in self.slots
        }

    @property
    def learning_rate(self) -> float:
        return self.schedule(self.step_count)

    def zero_grad(self) -> None:
        for _, p in self.parameters:
            p.zero_grad()

    def step(self) -> float:
        """Apply one update with the current learning rate and return that rate."""
        lr = self.learning_rate
        self.step_count += 1
        for name, p in self.parameters:
            if p.grad is not None:
                self.update(name, p, p.grad, lr)
        return lr

    @abstractmethod
    def update(self, name: str, p: Parameter, grad: np.ndarray, lr: float) -> None: ...

    def state_dict(self) -> Dict[str, Any]:
        return {
            "scalars": {"step_count": self.step_count},
            "arrays": {
                f"{slot}/{name}": value.copy()
                for slot, values in self.state.items()
                for name, value in values.items()
            },
        }

    def load_state_dict(self, state: Dict[str, Any]) -> None:
        self.step_count = int(state["scalars"]["step_count"])
        arrays = state["arrays"]
        for slot, values in self.state.items():
            for name in values:
                key = f"{slot}/{name}"
                if key not in arrays:
                    raise CheckpointError(f"Optimizer state {key} missing from checkpoint")
                values[name] = np.array(arrays[key], dtype=values[name].dtype)


class SGD(Optimizer):
    def update(self, name: str, p: Parameter, grad: np.ndarray, lr: float) -> None:
        p.data = p.data - lr * grad


class Adam(Optimizer):
    slots = ("m", "v")

    def __init__(
        self,
        parameters: NamedParameters,
        schedule: ExponentialDecay,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ):
        super().__init__(parameters, schedule)
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon

    def update(self, name: str, p: Parameter, grad: np.ndarray, lr: float) -> None:
        m = self.state["m"][name] = self.beta1 * self.state["m"][name] + (1 - self.beta1) * grad
        v = self.state["v"][name] = (
            self.beta2 * self.state["v"][name] + (1 - self.beta2) * grad * grad
        )
        m_hat = m / (1 - self.beta1**self.step_count)
        v_hat = v / (1 - self.beta2**self.step_count)
        p.data = (p.data - lr * m_hat / (np.sqrt(v_hat) + self.epsilon)).astype(p.dtype)


class Adadelta(Optimizer):
    slots = ("accumulated_grad", "accumulated_update")

    def __init__(
        self,
        parameters: NamedParameters,
        schedule: ExponentialDecay,
        rho: float = 0.95,
        epsilon: float = 1e-6,
    ):
        super().__init__(parameters, schedule)
        self.rho = rho
        self.epsilon = epsilon

    def update(self, name: str, p: Parameter, grad: np.ndarray, lr: float) -> None:
        acc_grad = self.state["accumulated_grad"][name] = (
            self.rho * self.state["accumulated_grad"][name] + (1 - self.rho) * grad * grad
        )
        acc_update = self.state["accumulated_update"][name]
        delta = np.sqrt(acc_update + self.epsilon) / np.sqrt(acc_grad + self.epsilon) * grad
        self.state["accumulated_update"][name] = (
            self.rho * acc_update + (1 - self.rho) * delta * delta
        )
        p.data = (p.data - lr * delta).astype(p.dtype)


OPTIMIZERS = ("sgd", "adam", "adadelta")


def build_optimizer(config: OptimizerConfig, parameters: NamedParameters) -> Optimizer:
    """
    Raises:
        ConfigError: If the optimizer name is unknown.
    """
    schedule = ExponentialDecay(
        config.learning_rate, config.lr_decay, config.decay_steps, config.staircase
    )
    name = config.name.lower()
    if name == "sgd":
        return SGD(parameters, schedule)
    if name == "adam":
        return Adam(parameters, schedule, config.beta1, config.beta2, config.epsilon)
    if name == "adadelta":
        return Adadelta(parameters, schedule, config.rho)
    raise ConfigError(f"Unknown optimizer {config.name!r}; expected one of {OPTIMIZERS}")
