"""Transformer convolution: single-relation multi-head attention message
passing with edge features.

For an edge j -> i and head h::

    q_i = x_i W_q + b_q
    k_j = x_j W_k + b_k + e_ji W_e
    v_j = x_j W_v + b_v + e_ji W_e
    alpha_ji = softmax over the edges into i of (q_i . k_j) / sqrt(D / H)
    x_i' = x_i + sum_j alpha_ji v_j
"""

import math
from typing import Union

import numpy as np
from hgat_forecast.exceptions import DimensionError
from hgat_forecast.numerics import ops
from hgat_forecast.numerics.blocks import Linear
from hgat_forecast.numerics.params import ParameterStore
from hgat_forecast.numerics.tensor import Tensor, as_tensor


class TransformerConv:
    def __init__(
        self,
        store: ParameterStore,
        name: str,
        dim: int,
        heads: int,
        edge_dim: int,
        rng: np.random.Generator,
    ):
        if dim % heads != 0:
            raise DimensionError("transformer conv heads", (dim,), (heads,))
        self.dim = dim
        self.heads = heads
        self.head_dim = dim // heads
        self.query = Linear(store, f"{name}.query", dim, dim, rng)
        self.key = Linear(store, f"{name}.key", dim, dim, rng)
        self.value = Linear(store, f"{name}.value", dim, dim, rng)
        self.edge = Linear(store, f"{name}.edge", edge_dim, dim, rng, bias=False)

    def _heads(self, x: Tensor) -> Tensor:
        return ops.reshape(x, (x.shape[0], self.heads, self.head_dim))

    def _terms(self, ps, target, source, src, dst, edge_features):
        edge = self.edge(ps, as_tensor(edge_features))
        x_i = ops.gather(target, dst)
        x_j = ops.gather(source, src)
        q = self.query(ps, x_i)
        k = ops.add(self.key(ps, x_j), edge)
        v = ops.add(self.value(ps, x_j), edge)
        logits = ops.scale(
            ops.sum(ops.mul(self._heads(q), self._heads(k)), axis=2), 1.0 / math.sqrt(self.head_dim)
        )
        return ops.segment_softmax(logits, dst, target.shape[0]), v

    def attention(self, ps: ParameterStore, target, source, src, dst, edge_features) -> np.ndarray:
        """α [E, H] of every edge."""
        alpha, _ = self._terms(ps, target, source, src, dst, edge_features)
        return alpha.data

    def __call__(
        self,
        ps: ParameterStore,
        target: Tensor,
        source: Tensor,
        src: np.ndarray,
        dst: np.ndarray,
        edge_features: Union[np.ndarray, Tensor],
    ) -> Tensor:
        if len(src) == 0:
            return target
        alpha, v = self._terms(ps, target, source, src, dst, edge_features)
        weighted = ops.mul(self._heads(v), ops.reshape(alpha, alpha.shape + (1,)))
        messages = ops.reshape(weighted, (weighted.shape[0], self.dim))
        return ops.add(target, ops.segment_sum(messages, dst, target.shape[0]))
