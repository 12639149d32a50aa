"""
Dense tensors with reverse-mode automatic differentiation.

Every differentiable operation returns a new Tensor that remembers its parents
and a rule mapping the output gradient onto parent gradients. The graph is
rebuilt on every forward pass and released by backward().
"""

import contextlib
from typing import Any, Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.core.config import settings
from src.core.exceptions import GraphError

GradFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class _EngineState:
    def __init__(self) -> None:
        self.dtype: np.dtype = np.dtype(settings.DEFAULT_DTYPE)
        self.checked: bool = settings.CHECKED_MODE
        self.grad_enabled: bool = True


_state = _EngineState()


def get_default_dtype() -> np.dtype:
    return _state.dtype


def is_checked() -> bool:
    return _state.checked


def is_grad_enabled() -> bool:
    return _state.grad_enabled


@contextlib.contextmanager
def precision(dtype: Any) -> Iterator[None]:
    """
    Temporarily change the dtype used for new tensors.

    Args:
        dtype: Anything numpy accepts as a floating dtype, e.g. "float64".
    """
    previous = _state.dtype
    _state.dtype = np.dtype(dtype)
    try:
        yield
    finally:
        _state.dtype = previous


@contextlib.contextmanager
def checked_mode(enabled: bool = True) -> Iterator[None]:
    """Toggle shape and domain validation on every op."""
    previous = _state.checked
    _state.checked = enabled
    try:
        yield
    finally:
        _state.checked = previous


@contextlib.contextmanager
def no_grad() -> Iterator[None]:
    """Run operations without recording a graph."""
    previous = _state.grad_enabled
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


class Tensor:
    # numpy defers to our reflected operators instead of building object arrays
    __array_ufunc__ = None

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        dtype: Any = None,
        name: Optional[str] = None,
    ):
        if isinstance(data, Tensor):
            data = data.data
        target = np.dtype(dtype) if dtype is not None else _state.dtype
        self.data: np.ndarray = np.array(data, dtype=target)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._parents: Tuple["Tensor", ...] = ()
        self._grad_fn: Optional[GradFn] = None
        self._released = False

    @classmethod
    def wrap(cls, array: np.ndarray) -> "Tensor":
        """Wrap an existing array without copying or casting it."""
        out = cls.__new__(cls)
        out.data = array
        out.requires_grad = False
        out.grad = None
        out.name = None
        out._parents = ()
        out._grad_fn = None
        out._released = False
        return out

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return self._grad_fn is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor.wrap(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    def __len__(self) -> int:
        return self.data.shape[0]

    def __repr__(self) -> str:
        label = f", name={self.name}" if self.name else ""
        return (
            f"Tensor(shape={self.shape}, dtype={self.dtype}, "
            f"requires_grad={self.requires_grad}{label})"
        )


def make_result(
    data: np.ndarray, parents: Sequence[Tensor], grad_fn: GradFn
) -> Tensor:
    """
    Wrap an op result and record it in the graph when any parent needs a gradient.

    Args:
        data: The computed forward value.
        parents: Op inputs in the order grad_fn returns their gradients.
        grad_fn: Maps the output gradient to one gradient (or None) per parent.

    Returns:
        The result tensor.
    """
    out = Tensor.wrap(np.asarray(data))
    if _state.grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._grad_fn = grad_fn
    return out


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a gradient over the axes that broadcasting expanded."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(
        i for i, extent in enumerate(shape) if extent == 1 and grad.shape[i] != 1
    )
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def topological_order(root: Tensor) -> List[Tensor]:
    """Nodes reachable from root through requires_grad edges, parents first."""
    order: List[Tensor] = []
    visited = set()
    stack: List[Tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """
    Accumulate d(loss)/d(t) into t.grad for every reachable tensor t that requires grad.

    Args:
        loss: A single-element tensor produced by a fresh forward pass.

    Raises:
        GraphError: If the loss is not scalar, does not require grad, or its graph
            was already consumed by an earlier backward call.
    """
    if loss._released:
        raise GraphError(
            "backward() already ran on this graph; run a fresh forward pass first"
        )
    if loss.data.size != 1:
        raise GraphError(f"backward() needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise GraphError("backward() called on a tensor that does not require grad")

    order = topological_order(loss)
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node._grad_fn is None or node.grad is None:
            continue
        parent_grads = node._grad_fn(node.grad)
        for parent, grad in zip(node._parents, parent_grads):
            if grad is None or not parent.requires_grad:
                continue
            grad = unbroadcast(np.asarray(grad), parent.shape)
            if parent.grad is None:
                parent.grad = np.array(grad, dtype=parent.dtype)
            else:
                parent.grad = parent.grad + grad

    for node in order:
        if node._grad_fn is not None:
            node._grad_fn = None
            node._parents = ()
            node._released = True
