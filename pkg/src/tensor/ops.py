"""
Differentiable primitives over Tensor.

Binary elementwise ops broadcast over trailing dimensions the way numpy does;
gradients are summed back onto the original shapes by the engine.
"""

import builtins
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.exceptions import DomainError, ShapeError
from .tensor import Tensor, get_default_dtype, is_checked, make_result

Axis = Optional[Union[int, Tuple[int, ...]]]


def as_tensor(value: Any, like: Optional[Tensor] = None) -> Tensor:
    """Return value as a constant Tensor, matching the dtype of `like` if given."""
    if isinstance(value, Tensor):
        return value
    dtype = like.dtype if like is not None else get_default_dtype()
    return Tensor.wrap(np.asarray(value, dtype=dtype))


def _pair(a: Any, b: Any) -> Tuple[Tensor, Tensor]:
    if isinstance(a, Tensor):
        return a, as_tensor(b, like=a)
    b = as_tensor(b)
    return as_tensor(a, like=b), b


def _check_broadcast(op: str, a: Tensor, b: Tensor) -> None:
    if not is_checked():
        return
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(
            f"{op}: shapes {a.shape} and {b.shape} are not broadcastable"
        ) from None


def _normalize_axes(axis: Axis, ndim: int) -> Optional[Tuple[int, ...]]:
    if axis is None:
        return None
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    return tuple(ax % ndim for ax in axes)


# elementwise


def add(a: Any, b: Any) -> Tensor:
    a, b = _pair(a, b)
    _check_broadcast("add", a, b)
    return make_result(a.data + b.data, (a, b), lambda g: (g, g))


def sub(a: Any, b: Any) -> Tensor:
    a, b = _pair(a, b)
    _check_broadcast("sub", a, b)
    return make_result(a.data - b.data, (a, b), lambda g: (g, -g))


def mul(a: Any, b: Any) -> Tensor:
    a, b = _pair(a, b)
    _check_broadcast("mul", a, b)
    return make_result(
        a.data * b.data, (a, b), lambda g: (g * b.data, g * a.data)
    )


def div(a: Any, b: Any) -> Tensor:
    a, b = _pair(a, b)
    _check_broadcast("div", a, b)
    return make_result(
        a.data / b.data,
        (a, b),
        lambda g: (g / b.data, -g * a.data / (b.data * b.data)),
    )


def neg(a: Tensor) -> Tensor:
    return make_result(-a.data, (a,), lambda g: (-g,))


def power(a: Tensor, exponent: float) -> Tensor:
    return make_result(
        a.data**exponent,
        (a,),
        lambda g: (g * exponent * a.data ** (exponent - 1),),
    )


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.data)
    return make_result(out, (a,), lambda g: (g * out,))


def log(a: Tensor) -> Tensor:
    if is_checked() and np.any(a.data <= 0):
        raise DomainError(
            f"log: input of shape {a.shape} has non-positive entries "
            f"(min={float(np.min(a.data))})"
        )
    return make_result(np.log(a.data), (a,), lambda g: (g / a.data,))


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)
    return make_result(out, (a,), lambda g: (g * (1.0 - out * out),))


def sigmoid(a: Tensor) -> Tensor:
    # tanh form does not overflow for large |x|
    out = 0.5 * (1.0 + np.tanh(0.5 * a.data))
    return make_result(out, (a,), lambda g: (g * out * (1.0 - out),))


def relu(a: Tensor) -> Tensor:
    positive = a.data > 0
    return make_result(
        np.where(positive, a.data, 0).astype(a.dtype, copy=False),
        (a,),
        lambda g: (g * positive,),
    )


# linear algebra


def matmul(a: Any, b: Any) -> Tensor:
    """
    Batched matrix product a[..., M, K] @ b[..., K, N].

    Raises:
        ShapeError: If either operand has rank < 2, the inner extents differ, or the
            batch extents cannot broadcast.
    """
    a, b = _pair(a, b)
    if is_checked():
        if a.ndim < 2 or b.ndim < 2:
            raise ShapeError(
                f"matmul: operands need rank >= 2, got {a.shape} and {b.shape}"
            )
        if a.shape[-1] != b.shape[-2]:
            raise ShapeError(
                f"matmul: inner extents differ for shapes {a.shape} and {b.shape}"
            )
        try:
            np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
        except ValueError:
            raise ShapeError(
                f"matmul: batch extents of {a.shape} and {b.shape} are not broadcastable"
            ) from None

    def grad_fn(g: np.ndarray):
        return (
            np.matmul(g, np.swapaxes(b.data, -1, -2)),
            np.matmul(np.swapaxes(a.data, -1, -2), g),
        )

    return make_result(np.matmul(a.data, b.data), (a, b), grad_fn)


# reductions


def sum(a: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axes(axis, a.ndim)
    out = np.sum(a.data, axis=axes, keepdims=keepdims)

    def grad_fn(g: np.ndarray):
        if axes is not None and not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, a.shape),)

    return make_result(out, (a,), grad_fn)


def mean(a: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axes(axis, a.ndim)
    if axes is None:
        count = a.size
    else:
        count = int(np.prod([a.shape[ax] for ax in axes]))
    return sum(a, axis=axes, keepdims=keepdims) * (1.0 / builtins.max(count, 1))


def max(a: Tensor, axis: int = -1, keepdims: bool = False) -> Tensor:
    """
    Maximum along one axis; the gradient goes to the first maximal entry.

    An empty axis reduces to zeros, matching the all-masked convention.
    """
    axis = axis % a.ndim
    if a.shape[axis] == 0:
        shape = list(a.shape)
        if keepdims:
            shape[axis] = 1
        else:
            del shape[axis]
        return make_result(
            np.zeros(shape, dtype=a.dtype), (a,), lambda g: (np.zeros_like(a.data),)
        )
    index = np.expand_dims(np.argmax(a.data, axis=axis), axis)
    out = np.take_along_axis(a.data, index, axis=axis)
    if not keepdims:
        out = np.squeeze(out, axis=axis)

    def grad_fn(g: np.ndarray):
        if not keepdims:
            g = np.expand_dims(g, axis)
        grad = np.zeros_like(a.data)
        np.put_along_axis(grad, index, g, axis=axis)
        return (grad,)

    return make_result(out, (a,), grad_fn)


# shape manipulation


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    return make_result(
        a.data.reshape(tuple(shape)), (a,), lambda g: (g.reshape(a.shape),)
    )


def transpose(a: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    axes = tuple(axes) if axes is not None else tuple(reversed(range(a.ndim)))
    inverse = tuple(np.argsort(axes))
    return make_result(
        np.transpose(a.data, axes), (a,), lambda g: (np.transpose(g, inverse),)
    )


def swapaxes(a: Tensor, axis1: int, axis2: int) -> Tensor:
    return make_result(
        np.swapaxes(a.data, axis1, axis2),
        (a,),
        lambda g: (np.swapaxes(g, axis1, axis2),),
    )


def expand_dims(a: Tensor, axis: int) -> Tensor:
    return reshape(a, np.expand_dims(a.data, axis).shape)


def squeeze(a: Tensor, axis: int) -> Tensor:
    return reshape(a, np.squeeze(a.data, axis=axis).shape)


def _is_fancy(index: Any) -> bool:
    items = index if isinstance(index, tuple) else (index,)
    return builtins.any(
        isinstance(item, (list, np.ndarray)) for item in items
    )


def getitem(a: Tensor, index: Any) -> Tensor:
    """Index or slice a tensor; repeated fancy indices accumulate their gradients."""
    if isinstance(index, Tensor):
        index = index.data.astype(np.int64)
    fancy = _is_fancy(index)

    def grad_fn(g: np.ndarray):
        grad = np.zeros_like(a.data)
        if fancy:
            np.add.at(grad, index, g)
        else:
            grad[index] = g
        return (grad,)

    return make_result(a.data[index], (a,), grad_fn)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    """
    Concatenate along an axis; the backward pass splits the gradient back to the sources.

    Raises:
        ShapeError: If ranks differ or extents differ off the concatenation axis.
    """
    tensors = list(tensors)
    if not tensors:
        raise ShapeError("concat: needs at least one tensor")
    ndim = tensors[0].ndim
    axis = axis % ndim
    if is_checked():
        reference = tensors[0].shape
        for t in tensors[1:]:
            if t.ndim != ndim or builtins.any(
                t.shape[i] != reference[i] for i in range(ndim) if i != axis
            ):
                raise ShapeError(
                    f"concat: shape {t.shape} is incompatible with {reference} on axis {axis}"
                )
    sizes = [t.shape[axis] for t in tensors]
    boundaries = np.cumsum(sizes)[:-1]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    return make_result(
        out, tensors, lambda g: tuple(np.split(g, boundaries, axis=axis))
    )


def split(a: Tensor, sections: Union[int, Sequence[int]], axis: int = -1) -> List[Tensor]:
    """Split into equal sections or into pieces of the given sizes."""
    axis = axis % a.ndim
    extent = a.shape[axis]
    if isinstance(sections, int):
        if is_checked() and extent % sections != 0:
            raise ShapeError(
                f"split: axis {axis} of shape {a.shape} does not divide into {sections}"
            )
        sizes = [extent // sections] * sections
    else:
        sizes = list(sections)
        if is_checked() and builtins.sum(sizes) != extent:
            raise ShapeError(
                f"split: sizes {sizes} do not add up to axis {axis} of shape {a.shape}"
            )
    pieces = []
    start = 0
    for size in sizes:
        index = [slice(None)] * a.ndim
        index[axis] = slice(start, start + size)
        pieces.append(getitem(a, tuple(index)))
        start += size
    return pieces


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = list(tensors)
    if is_checked():
        reference = tensors[0].shape
        for t in tensors[1:]:
            if t.shape != reference:
                raise ShapeError(f"stack: shape {t.shape} differs from {reference}")
    out = np.stack([t.data for t in tensors], axis=axis)
    axis = axis % out.ndim
    return make_result(
        out,
        tensors,
        lambda g: tuple(np.take(g, i, axis=axis) for i in range(len(tensors))),
    )


# normalisation


def softmax(a: Tensor, axis: int = -1, mask: Optional[np.ndarray] = None) -> Tensor:
    """
    Softmax along an axis, optionally restricted to positions where mask is 1.

    Masked positions are exactly 0 and a row whose mask is all zeros yields zeros,
    as does an empty axis.
    """
    x = a.data
    if x.shape[axis] == 0:
        return make_result(np.zeros_like(x), (a,), lambda g: (np.zeros_like(x),))
    if mask is None:
        shifted = x - np.max(x, axis=axis, keepdims=True)
        e = np.exp(shifted)
        probs = e / np.sum(e, axis=axis, keepdims=True)
    else:
        mask = np.asarray(mask)
        if is_checked():
            try:
                broadcast = np.broadcast_shapes(mask.shape, x.shape)
            except ValueError:
                broadcast = None
            if broadcast != x.shape:
                raise ShapeError(
                    f"softmax: mask shape {mask.shape} does not fit logits {x.shape}"
                )
        keep = np.broadcast_to(mask > 0, x.shape)
        peak = np.max(np.where(keep, x, -np.inf), axis=axis, keepdims=True)
        peak = np.where(np.isfinite(peak), peak, 0)
        e = np.exp(np.where(keep, x - peak, -np.inf))
        total = np.sum(e, axis=axis, keepdims=True)
        probs = np.divide(e, total, out=np.zeros_like(e), where=total > 0)
    probs = probs.astype(x.dtype, copy=False)

    def grad_fn(g: np.ndarray):
        return (probs * (g - np.sum(g * probs, axis=axis, keepdims=True)),)

    return make_result(probs, (a,), grad_fn)


def log_softmax(a: Tensor, axis: int = -1) -> Tensor:
    x = a.data
    if x.shape[axis] == 0:
        return make_result(np.zeros_like(x), (a,), lambda g: (np.zeros_like(x),))
    shifted = x - np.max(x, axis=axis, keepdims=True)
    log_total = np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))
    out = (shifted - log_total).astype(x.dtype, copy=False)

    def grad_fn(g: np.ndarray):
        return (g - np.exp(out) * np.sum(g, axis=axis, keepdims=True),)

    return make_result(out, (a,), grad_fn)


# lookups


def embedding_lookup(
    weight: Tensor, ids: Any, row_mask: Optional[np.ndarray] = None
) -> Tensor:
    """
    Gather rows of a [V, d] matrix.

    Args:
        weight: The embedding matrix.
        ids: Integer ids of any shape.
        row_mask: Optional length-V 0/1 vector; gradient rows where it is 0 are dropped.

    Returns:
        Tensor of shape ids.shape + (d,).
    """
    ids = np.asarray(ids, dtype=np.int64)
    vocab_size, dim = weight.shape
    if is_checked() and ids.size and (ids.min() < 0 or ids.max() >= vocab_size):
        raise ShapeError(
            f"embedding_lookup: ids must lie in [0, {vocab_size}), "
            f"got range [{ids.min()}, {ids.max()}]"
        )

    def grad_fn(g: np.ndarray):
        grad = np.zeros_like(weight.data)
        np.add.at(grad, ids.reshape(-1), g.reshape(-1, dim))
        if row_mask is not None:
            grad *= row_mask[:, None]
        return (grad,)

    return make_result(weight.data[ids], (weight,), grad_fn)


def _install_operators() -> None:
    Tensor.__add__ = lambda self, other: add(self, other)
    Tensor.__radd__ = lambda self, other: add(other, self)
    Tensor.__sub__ = lambda self, other: sub(self, other)
    Tensor.__rsub__ = lambda self, other: sub(other, self)
    Tensor.__mul__ = lambda self, other: mul(self, other)
    Tensor.__rmul__ = lambda self, other: mul(other, self)
    Tensor.__truediv__ = lambda self, other: div(self, other)
    Tensor.__rtruediv__ = lambda self, other: div(other, self)
    Tensor.__neg__ = lambda self: neg(self)
    Tensor.__pow__ = lambda self, exponent: power(self, exponent)
    Tensor.__matmul__ = lambda self, other: matmul(self, other)
    Tensor.__rmatmul__ = lambda self, other: matmul(other, self)
    Tensor.__getitem__ = lambda self, index: getitem(self, index)
    Tensor.sum = lambda self, axis=None, keepdims=False: sum(self, axis, keepdims)
    Tensor.mean = lambda self, axis=None, keepdims=False: mean(self, axis, keepdims)
    Tensor.max = lambda self, axis=-1, keepdims=False: max(self, axis, keepdims)
    Tensor.reshape = lambda self, *shape: reshape(
        self, shape[0] if len(shape) == 1 and not isinstance(shape[0], int) else shape
    )
    Tensor.transpose = lambda self, axes=None: transpose(self, axes)
    Tensor.exp = lambda self: exp(self)
    Tensor.log = lambda self: log(self)
    Tensor.tanh = lambda self: tanh(self)
    Tensor.sigmoid = lambda self: sigmoid(self)
    Tensor.relu = lambda self: relu(self)


_install_operators()
