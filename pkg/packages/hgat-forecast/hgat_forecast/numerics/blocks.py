"""Reusable layers built from :mod:`ops`.

A block registers its parameters in a :class:`ParameterStore` when it is
constructed and remembers only their names; calling it takes the store
(or a snapshot of it) to read the tensors from.
"""

from typing import List, Optional, Union

import numpy as np
from hgat_forecast.numerics import ops
from hgat_forecast.numerics.params import ParameterStore
from hgat_forecast.numerics.tensor import Tensor


class Linear:
    def __init__(
        self,
        store: ParameterStore,
        name: str,
        in_dim: int,
        out_dim: int,
        rng: np.random.Generator,
        bias: bool = True,
        zero_init: bool = False,
        stack: Optional[int] = None,
    ):
        """``stack`` creates ``stack`` independent weight matrices
        ([stack, in, out]) applied to the same input in one matmul."""
        lead = () if stack is None else (stack,)
        self.weight = f"{name}.weight"
        self.bias = f"{name}.bias" if bias else None
        store.create(
            self.weight,
            lead + (in_dim, out_dim),
            rng,
            init="zeros" if zero_init else "xavier",
        )
        if bias:
            store.create(self.bias, lead + (1, out_dim) if stack else (out_dim,), init="zeros")

    def __call__(self, ps: ParameterStore, x) -> Tensor:
        bias = ps[self.bias] if self.bias is not None else None
        return ops.linear(x, ps[self.weight], bias)


class BatchNorm:
    """Batch norm over every axis but the last. With ``stack`` the input is
    [stack, N, D] and every stacked slice keeps its own statistics."""

    def __init__(
        self,
        store: ParameterStore,
        name: str,
        dim: int,
        momentum: float = 0.1,
        eps: float = 1e-5,
        stack: Optional[int] = None,
    ):
        self.gamma = f"{name}.gamma"
        self.beta = f"{name}.beta"
        self.running_mean = f"{name}.running_mean"
        self.running_var = f"{name}.running_var"
        self.momentum = momentum
        self.eps = eps
        self.stack = stack
        width = dim * (stack or 1)
        store.create(self.gamma, (width,), init="ones")
        store.create(self.beta, (width,), init="zeros")
        store.create_buffer(self.running_mean, (width,), 0.0)
        store.create_buffer(self.running_var, (width,), 1.0)

    def _normalize(self, ps: ParameterStore, x) -> Tensor:
        return ops.batch_norm(
            x,
            ps[self.gamma],
            ps[self.beta],
            ps.buffer(self.running_mean),
            ps.buffer(self.running_var),
            training=ps.is_training(self.gamma),
            momentum=self.momentum,
            eps=self.eps,
        )

    def __call__(self, ps: ParameterStore, x) -> Tensor:
        if self.stack is None:
            return self._normalize(ps, x)
        stack, rows, dim = x.shape
        side_by_side = ops.reshape(ops.transpose(x, (1, 0, 2)), (rows, stack * dim))
        h = ops.reshape(self._normalize(ps, side_by_side), (rows, stack, dim))
        return ops.transpose(h, (1, 0, 2))


class GroupNorm:
    """Single-group norm of every row; no running statistics, so training
    and eval compute the same function."""

    def __init__(
        self,
        store: ParameterStore,
        name: str,
        dim: int,
        eps: float = 1e-5,
        stack: Optional[int] = None,
    ):
        self.gamma = f"{name}.gamma"
        self.beta = f"{name}.beta"
        self.eps = eps
        shape = (dim,) if stack is None else (stack, 1, dim)
        store.create(self.gamma, shape, init="ones")
        store.create(self.beta, shape, init="zeros")

    def __call__(self, ps: ParameterStore, x) -> Tensor:
        return ops.group_norm(x, ps[self.gamma], ps[self.beta], self.eps)


def make_norm(
    kind: str,
    store: ParameterStore,
    name: str,
    dim: int,
    momentum: float = 0.1,
    eps: float = 1e-5,
    stack: Optional[int] = None,
) -> Union[BatchNorm, GroupNorm]:
    if kind == "batch":
        return BatchNorm(store, name, dim, momentum, eps, stack)
    if kind == "group":
        return GroupNorm(store, name, dim, eps, stack)
    raise ValueError(f"unknown normalization '{kind}'")


class LinearNorm:
    """Linear layer (no bias) followed by a norm and optionally ReLU."""

    def __init__(
        self,
        store: ParameterStore,
        name: str,
        in_dim: int,
        out_dim: int,
        rng: np.random.Generator,
        activation: bool = True,
        stack: Optional[int] = None,
        kind: str = "batch",
        momentum: float = 0.1,
        eps: float = 1e-5,
    ):
        self.linear = Linear(store, f"{name}.linear", in_dim, out_dim, rng, bias=False, stack=stack)
        self.norm = make_norm(kind, store, f"{name}.norm", out_dim, momentum, eps, stack)
        self.activation = activation

    def __call__(self, ps: ParameterStore, x) -> Tensor:
        h = self.norm(ps, self.linear(ps, x))
        return ops.relu(h) if self.activation else h


class MLP:
    """``depth`` LinearNorm layers with ReLU."""

    def __init__(
        self,
        store: ParameterStore,
        name: str,
        in_dim: int,
        hidden_dim: int,
        depth: int,
        rng: np.random.Generator,
        stack: Optional[int] = None,
        kind: str = "batch",
        momentum: float = 0.1,
        eps: float = 1e-5,
    ):
        self.layers: List[LinearNorm] = []
        dim = in_dim
        for i in range(depth):
            self.layers.append(
                LinearNorm(
                    store, f"{name}.{i}", dim, hidden_dim, rng,
                    stack=stack, kind=kind, momentum=momentum, eps=eps,
                )
            )
            dim = hidden_dim

    def __call__(self, ps: ParameterStore, x) -> Tensor:
        for layer in self.layers:
            x = layer(ps, x)
        return x


class ResidualMLP:
    """Four LinearNorm layers; the output of the first is added back before
    the last activation."""

    def __init__(
        self,
        store: ParameterStore,
        name: str,
        in_dim: int,
        dim: int,
        rng: np.random.Generator,
        kind: str = "batch",
        momentum: float = 0.1,
        eps: float = 1e-5,
    ):
        norm = dict(kind=kind, momentum=momentum, eps=eps)
        self.first = LinearNorm(store, f"{name}.0", in_dim, dim, rng, **norm)
        self.middle = [LinearNorm(store, f"{name}.{i}", dim, dim, rng, **norm) for i in (1, 2)]
        self.last = LinearNorm(store, f"{name}.3", dim, dim, rng, activation=False, **norm)

    def __call__(self, ps: ParameterStore, x) -> Tensor:
        skip = self.first(ps, x)
        h = skip
        for layer in self.middle:
            h = layer(ps, h)
        return ops.relu(ops.add(self.last(ps, h), skip))


class Conv1dResidualBlock:
    """Two same-padded temporal convolutions, each followed by a norm; a
    1x1 projection carries the input when the channel count changes.

    Input and output are [..., T, C]; batch norm runs over all leading
    axes and time, group norm over the channels of every step.
    """

    def __init__(
        self,
        store: ParameterStore,
        name: str,
        in_channels: int,
        out_channels: int,
        rng: np.random.Generator,
        kernel: int = 3,
        kind: str = "batch",
        momentum: float = 0.1,
        eps: float = 1e-5,
    ):
        self.conv1 = f"{name}.conv1.weight"
        self.conv2 = f"{name}.conv2.weight"
        store.create(self.conv1, (kernel, in_channels, out_channels), rng, fan=(kernel * in_channels, kernel * out_channels))
        store.create(self.conv2, (kernel, out_channels, out_channels), rng, fan=(kernel * out_channels, kernel * out_channels))
        self.norm1 = make_norm(kind, store, f"{name}.norm1", out_channels, momentum, eps)
        self.norm2 = make_norm(kind, store, f"{name}.norm2", out_channels, momentum, eps)
        self.projection = (
            Linear(store, f"{name}.projection", in_channels, out_channels, rng, bias=False)
            if in_channels != out_channels
            else None
        )

    def __call__(self, ps: ParameterStore, x) -> Tensor:
        h = ops.relu(self.norm1(ps, ops.conv1d(x, ps[self.conv1])))
        h = self.norm2(ps, ops.conv1d(h, ps[self.conv2]))
        skip = self.projection(ps, x) if self.projection is not None else x
        return ops.relu(ops.add(h, skip))
