"""Differentiable operations on :class:`Tensor`.

Every op computes its output with numpy, checks it is finite, and records
a backward rule on the active tape when one of its inputs requires grad.
Index arguments (segments, gather indices) are plain integer arrays.
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np
from hgat_forecast.exceptions import DimensionError, EmptyInputError
from hgat_forecast.numerics.tensor import Tensor, as_tensor, current_tape, get_default_dtype

Axis = Optional[Union[int, Tuple[int, ...]]]


def _result(op: str, data, parents: Sequence[Tensor], backward) -> Tensor:
    tape = current_tape()
    requires_grad = tape is not None and any(p.requires_grad for p in parents)
    array = np.asarray(data, dtype=get_default_dtype())
    out = Tensor._wrap(array, requires_grad, op)
    if requires_grad:
        tape.record(op, list(parents), out, backward)
    return out


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` (inverse of numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_broadcast(op: str, a: Tensor, b: Tensor):
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(op, a.shape, b.shape)


# -- elementwise arithmetic --


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("add", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _result("add", a.data + b.data, (a, b), backward)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("sub", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _result("sub", a.data - b.data, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("mul", a, b)

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _result("mul", a.data * b.data, (a, b), backward)


def scale(x, factor: float) -> Tensor:
    x = as_tensor(x)

    def backward(g):
        return (g * factor,)

    return _result("scale", x.data * factor, (x,), backward)


# -- linear algebra --


def matmul(a, b) -> Tensor:
    """``a @ b`` with numpy broadcasting over leading (batch) axes."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise DimensionError("matmul", a.shape, b.shape)

    def backward(g):
        ga = g @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ g
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return _result("matmul", a.data @ b.data, (a, b), backward)


def linear(x, weight, bias=None) -> Tensor:
    """y = xW + b for x [..., N, Din], W [..., Din, Dout], b [..., Dout]."""
    x, weight = as_tensor(x), as_tensor(weight)
    if x.ndim < 2 or weight.ndim < 2 or x.shape[-1] != weight.shape[-2]:
        raise DimensionError("linear", x.shape, weight.shape)
    y = matmul(x, weight)
    if bias is None:
        return y
    bias = as_tensor(bias)
    if bias.shape[-1] != weight.shape[-1]:
        raise DimensionError("linear", weight.shape, bias.shape)
    return add(y, bias)


# -- activations --


def relu(x) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0

    def backward(g):
        return (g * mask,)

    return _result("relu", np.where(mask, x.data, 0.0), (x,), backward)


def leaky_relu(x, slope: float = 0.2) -> Tensor:
    if not 0.0 < slope < 1.0:
        raise ValueError(f"leaky_relu slope must lie in (0, 1), got {slope}")
    x = as_tensor(x)
    positive = x.data > 0

    def backward(g):
        return (g * np.where(positive, 1.0, slope),)

    return _result("leaky_relu", np.where(positive, x.data, slope * x.data), (x,), backward)


def softmax(x, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return _result("softmax", y, (x,), backward)


def smooth_l1(x, beta: float = 1.0) -> Tensor:
    """Elementwise Huber-style penalty of a difference tensor."""
    x = as_tensor(x)
    absolute = np.abs(x.data)
    quadratic = absolute < beta
    y = np.where(quadratic, 0.5 * x.data**2 / beta, absolute - 0.5 * beta)

    def backward(g):
        return (g * np.clip(x.data / beta, -1.0, 1.0),)

    return _result("smooth_l1", y, (x,), backward)


def normalize(x, eps: float = 1e-12) -> Tensor:
    """Rows of ``x`` [..., D] scaled to unit length."""
    x = as_tensor(x)
    norm = np.maximum(np.linalg.norm(x.data, axis=-1, keepdims=True), eps)
    y = x.data / norm

    def backward(g):
        return ((g - y * (g * y).sum(axis=-1, keepdims=True)) / norm,)

    return _result("normalize", y, (x,), backward)


# -- shape manipulation --


def concat(tensors: Sequence, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise EmptyInputError("concat of an empty list")
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise DimensionError("concat", *[t.shape for t in tensors])
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return np.split(g, splits, axis=axis)

    return _result("concat", data, tensors, backward)


def stack(tensors: Sequence, axis: int = 0) -> Tensor:
    expanded = []
    for t in tensors:
        t = as_tensor(t)
        ax = axis if axis >= 0 else t.ndim + 1 + axis
        expanded.append(reshape(t, t.shape[:ax] + (1,) + t.shape[ax:]))
    return concat(expanded, axis=axis)


def reshape(x, shape: Sequence[int]) -> Tensor:
    x = as_tensor(x)
    original = x.shape
    try:
        data = x.data.reshape(tuple(shape))
    except ValueError:
        raise DimensionError("reshape", original, tuple(shape))

    def backward(g):
        return (g.reshape(original),)

    return _result("reshape", data, (x,), backward)


def transpose(x, axes: Sequence[int]) -> Tensor:
    x = as_tensor(x)
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))

    def backward(g):
        return (np.transpose(g, inverse),)

    return _result("transpose", np.transpose(x.data, axes), (x,), backward)


def gather(x, index, axis: int = 0) -> Tensor:
    """``np.take(x, index, axis)``; repeated indices accumulate gradient."""
    x = as_tensor(x)
    index = np.asarray(index, dtype=np.int64)
    axis = axis if axis >= 0 else x.ndim + axis
    if index.size and (index.min() < 0 or index.max() >= x.shape[axis]):
        raise DimensionError("gather", x.shape, (int(index.max()) + 1,))

    def backward(g):
        gx = np.zeros_like(x.data)
        gx_view = np.moveaxis(gx, axis, 0)
        g_moved = np.moveaxis(
            g, tuple(range(axis, axis + index.ndim)), tuple(range(index.ndim))
        )
        np.add.at(gx_view, index, g_moved)
        return (gx,)

    return _result("gather", np.take(x.data, index, axis=axis), (x,), backward)


def detach(x) -> Tensor:
    return as_tensor(x).detach()


# -- reductions --


def sum(x, axis: Axis = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return _result("sum", x.data.sum(axis=axis, keepdims=keepdims), (x,), backward)


def mean(x, axis: Axis = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    if axis is None:
        count = x.size
    else:
        axes = (axis,) if isinstance(axis, int) else axis
        count = int(np.prod([x.shape[a] for a in axes]))
    if count == 0:
        raise EmptyInputError("mean over an empty axis")
    return scale(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def cumsum(x, axis: int = 0) -> Tensor:
    x = as_tensor(x)

    def backward(g):
        return (np.flip(np.cumsum(np.flip(g, axis), axis=axis), axis),)

    return _result("cumsum", np.cumsum(x.data, axis=axis), (x,), backward)


# -- segment (graph) operations --


def _num_segments(segments: np.ndarray, n_segments: Optional[int]) -> int:
    if n_segments is not None:
        if segments.size and segments.max() >= n_segments:
            raise DimensionError("segment", (int(segments.max()) + 1,), (n_segments,))
        return n_segments
    return int(segments.max()) + 1 if segments.size else 0


def segment_softmax(logits, segments, n_segments: Optional[int] = None) -> Tensor:
    """Softmax over the entries that share a segment id.

    ``logits`` is [E] or [E, H]; each head column is normalized
    independently within every segment.
    """
    logits = as_tensor(logits)
    segments = np.asarray(segments, dtype=np.int64)
    if segments.shape != logits.shape[:1]:
        raise DimensionError("segment_softmax", logits.shape, segments.shape)
    n = _num_segments(segments, n_segments)
    rest = logits.shape[1:]
    seg_max = np.full((n,) + rest, -np.inf, dtype=logits.dtype)
    np.maximum.at(seg_max, segments, logits.data)
    e = np.exp(logits.data - seg_max[segments])
    seg_sum = np.zeros((n,) + rest, dtype=logits.dtype)
    np.add.at(seg_sum, segments, e)
    y = e / seg_sum[segments]

    def backward(g):
        gy = g * y
        totals = np.zeros((n,) + rest, dtype=g.dtype)
        np.add.at(totals, segments, gy)
        return (gy - y * totals[segments],)

    return _result("segment_softmax", y, (logits,), backward)


def segment_sum(values, segments, n_segments: int) -> Tensor:
    """Row i of the output is the sum of the value rows with segment id i."""
    values = as_tensor(values)
    segments = np.asarray(segments, dtype=np.int64)
    if segments.shape != values.shape[:1]:
        raise DimensionError("segment_sum", values.shape, segments.shape)
    n = _num_segments(segments, n_segments)
    out = np.zeros((n,) + values.shape[1:], dtype=values.dtype)
    np.add.at(out, segments, values.data)

    def backward(g):
        return (g[segments],)

    return _result("segment_sum", out, (values,), backward)


# -- normalization and convolution --


def batch_norm(
    x,
    gamma,
    beta,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool,
    momentum: float = 0.1,
    eps: float = 1e-5,
) -> Tensor:
    """Normalize every feature (last axis) over all the other axes.

    In training mode batch statistics are used and the running buffers
    are updated in place; a single-row batch has zero variance, so its
    output is ``beta``. In eval mode the running buffers are used.
    """
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    if x.ndim < 2 or gamma.shape != (x.shape[-1],) or beta.shape != gamma.shape:
        raise DimensionError("batch_norm", x.shape, gamma.shape, beta.shape)
    axes = tuple(range(x.ndim - 1))
    count = int(np.prod(x.shape[:-1]))
    if count == 0:
        return _result("batch_norm", x.data.copy(), (x, gamma, beta), lambda g: (g, None, None))

    if training:
        mu = x.data.mean(axis=axes)
        centered = x.data - mu
        var = (centered**2).mean(axis=axes)
        inv_std = 1.0 / np.sqrt(var + eps)
        x_hat = centered * inv_std
        unbiased = var * count / (count - 1) if count > 1 else var
        running_mean *= 1.0 - momentum
        running_mean += momentum * mu
        running_var *= 1.0 - momentum
        running_var += momentum * unbiased

        def backward(g):
            g_hat = g * gamma.data
            gx = (inv_std / count) * (
                count * g_hat
                - g_hat.sum(axis=axes)
                - x_hat * (g_hat * x_hat).sum(axis=axes)
            )
            return gx, (g * x_hat).sum(axis=axes), g.sum(axis=axes)

    else:
        inv_std = 1.0 / np.sqrt(running_var + eps)
        x_hat = (x.data - running_mean) * inv_std

        def backward(g):
            return g * gamma.data * inv_std, (g * x_hat).sum(axis=axes), g.sum(axis=axes)

    y = gamma.data * x_hat + beta.data
    return _result("batch_norm", y, (x, gamma, beta), backward)


def group_norm(x, gamma, beta, eps: float = 1e-5) -> Tensor:
    """Single-group normalization: every row (last axis) is standardized on
    its own, so the result never depends on the other rows or on a mode.

    ``gamma`` and ``beta`` broadcast against ``x``, e.g. [D] or [K, 1, D]
    for K stacked heads.
    """
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    if x.ndim < 1 or gamma.shape[-1] != x.shape[-1] or beta.shape != gamma.shape:
        raise DimensionError("group_norm", x.shape, gamma.shape, beta.shape)
    _check_broadcast("group_norm", x, gamma)
    width = x.shape[-1]
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    inv_std = 1.0 / np.sqrt((centered**2).mean(axis=-1, keepdims=True) + eps)
    x_hat = centered * inv_std

    def backward(g):
        g_hat = g * gamma.data
        gx = (inv_std / width) * (
            width * g_hat
            - g_hat.sum(axis=-1, keepdims=True)
            - x_hat * (g_hat * x_hat).sum(axis=-1, keepdims=True)
        )
        return gx, _unbroadcast(g * x_hat, gamma.shape), _unbroadcast(g, beta.shape)

    y = gamma.data * x_hat + beta.data
    return _result("group_norm", y, (x, gamma, beta), backward)


def replicate_pad_index(length: int, kernel: int) -> np.ndarray:
    """[length, kernel] source rows of a same-padded window (edges repeated)."""
    offsets = np.arange(kernel) - kernel // 2
    return np.clip(np.arange(length)[:, None] + offsets[None, :], 0, length - 1)


def conv1d(x, weight) -> Tensor:
    """Temporal convolution of x [..., T, Cin] with weight [k, Cin, Cout],
    stride 1, same length output, borders padded by edge replication."""
    x, weight = as_tensor(x), as_tensor(weight)
    if x.ndim < 2:
        raise DimensionError("conv1d", x.shape, weight.shape)
    length, channels = x.shape[-2], x.shape[-1]
    if length < 1:
        raise EmptyInputError("conv1d needs at least one timestep")
    if weight.ndim != 3 or weight.shape[1] != channels:
        raise DimensionError("conv1d", x.shape, weight.shape)
    kernel, _, out_channels = weight.shape
    windows = gather(x, replicate_pad_index(length, kernel), axis=x.ndim - 2)
    flat = reshape(windows, x.shape[:-2] + (length, kernel * channels))
    return matmul(flat, reshape(weight, (kernel * channels, out_channels)))
