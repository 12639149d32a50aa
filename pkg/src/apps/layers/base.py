from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from src.core.exceptions import CheckpointError, ShapeError
from src.tensor import Tensor, get_default_dtype


class Parameter(Tensor):
    """A leaf tensor owned by a layer. Only trainable parameters are handed to optimizers."""

    def __init__(self, data: Any, trainable: bool = True, name: Optional[str] = None):
        super().__init__(data, requires_grad=True, dtype=get_default_dtype(), name=name)
        self.trainable = trainable


def uniform(rng: np.random.Generator, shape: Tuple[int, ...], bound: float) -> Parameter:
    return Parameter(rng.uniform(-bound, bound, size=shape))


def zeros(shape: Tuple[int, ...]) -> Parameter:
    return Parameter(np.zeros(shape))


class Layer:
    """
    Base class for every component of a model.

    Parameters and sub-layers are discovered from instance attributes (including
    lists of them) in assignment order, which gives each parameter a unique dotted
    name such as `encoder.forward_cell.weight_ih`.
    """

    stochastic: bool = False

    def __init__(self) -> None:
        self.training = True

    def __call__(self, *args: Any, **kwargs: Any) -> Any:
        return self.forward(*args, **kwargs)

    def forward(self, *args: Any, **kwargs: Any) -> Any:
        raise NotImplementedError

    def _children(self) -> Iterator[Tuple[str, Any]]:
        for attr, value in vars(self).items():
            if isinstance(value, (Parameter, Layer)):
                yield attr, value
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, (Parameter, Layer)):
                        yield f"{attr}.{i}", item

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Parameter]]:
        seen = set()
        stack = [(prefix, self)]
        while stack:
            path, layer = stack.pop(0)
            for name, child in layer._children():
                if id(child) in seen:
                    continue
                seen.add(id(child))
                if isinstance(child, Parameter):
                    yield f"{path}{name}", child
                else:
                    stack.append((f"{path}{name}.", child))

    def parameters(self) -> List[Parameter]:
        return [p for _, p in self.named_parameters()]

    def trainable_parameters(self) -> List[Tuple[str, Parameter]]:
        return [(n, p) for n, p in self.named_parameters() if p.trainable]

    def sublayers(self) -> Iterator["Layer"]:
        seen = set()
        stack: List[Layer] = [self]
        while stack:
            layer = stack.pop(0)
            if id(layer) in seen:
                continue
            seen.add(id(layer))
            yield layer
            stack.extend(c for _, c in layer._children() if isinstance(c, Layer))

    def train(self, mode: bool = True) -> "Layer":
        for layer in self.sublayers():
            layer.training = mode
        return self

    def eval(self) -> "Layer":
        return self.train(False)

    def reseed(self, seed: int, step: int) -> None:
        """Give every stochastic sub-layer a generator derived from (seed, step, position)."""
        stochastic = [layer for layer in self.sublayers() if layer.stochastic]
        for i, layer in enumerate(stochastic):
            layer.rng = np.random.default_rng([seed, step, i])

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        """
        Copy arrays into parameters of the same name.

        Raises:
            CheckpointError: If names differ from this layer's parameters.
            ShapeError: If an array's shape differs from its parameter.
        """
        own = dict(self.named_parameters())
        missing = sorted(set(own) - set(state))
        unexpected = sorted(set(state) - set(own))
        if missing or unexpected:
            raise CheckpointError(
                f"Parameter names differ: missing={missing}, unexpected={unexpected}"
            )
        for name, p in own.items():
            value = np.asarray(state[name])
            if value.shape != p.shape:
                raise ShapeError(
                    f"{name}: stored shape {value.shape} differs from {p.shape}"
                )
            p.data = value.astype(p.dtype, copy=True)
