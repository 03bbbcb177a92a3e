"""Heterogeneous graph attention layer.

For an edge from node j to node i through relation r, and head h::

    f     = [W_self,r v_i | W_neighbor,r v_j | W_edge,r e]      (head slice)
    logit = a_h . leaky_relu(f)
    alpha = softmax of the logits over every active edge into i, all
            relations pooled, separately per head
    v_i'  = leaky_relu(W_res,type(i) v_i + sum_j alpha (W_neighbor,r v_j + W_edge,r e))

Each projection is a [D, D] matrix whose column block h is the head-h
projection to D/H features; no biases are used.
"""

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from hgat_forecast.exceptions import DimensionError, MissingRelationError
from hgat_forecast.graph.relations import ALL_RELATIONS, RELATIONS, NodeType
from hgat_forecast.graph.tables import HeteroGraph
from hgat_forecast.hgat.attention import AttentionBlock, AttentionTrace
from hgat_forecast.numerics import ops
from hgat_forecast.numerics.params import ParameterStore
from hgat_forecast.numerics.tensor import Tensor

NodeFeatures = Dict[NodeType, Tensor]


class HgatLayer:
    def __init__(
        self,
        store: ParameterStore,
        name: str,
        dim: int,
        heads: int,
        relations: Sequence[str],
        node_types: Sequence[NodeType],
        rng: np.random.Generator,
        slope: float = 0.2,
    ):
        if dim % heads != 0:
            raise DimensionError("hgat heads", (dim,), (heads,))
        self.name = name
        self.dim = dim
        self.heads = heads
        self.head_dim = dim // heads
        self.slope = slope
        self.relations = [r for r in ALL_RELATIONS if r in set(relations)]
        self.node_types = list(node_types)
        for relation in self.relations:
            edge_dim = RELATIONS[relation].feature_dim
            store.create(self._param(relation, "w_self"), (dim, dim), rng)
            store.create(self._param(relation, "w_neighbor"), (dim, dim), rng)
            store.create(self._param(relation, "w_edge"), (edge_dim, dim), rng)
        store.create(
            f"{name}.attention", (heads, 3 * self.head_dim), rng, fan=(3 * self.head_dim, 1)
        )
        for node_type in self.node_types:
            store.create(self._residual(node_type), (dim, dim), rng)

    def _param(self, relation: str, kind: str) -> str:
        return f"{self.name}.{relation}.{kind}"

    def _residual(self, node_type: NodeType) -> str:
        return f"{self.name}.residual.{node_type.value}"

    def _heads(self, x: Tensor) -> Tensor:
        return ops.reshape(x, (x.shape[0], self.heads, self.head_dim))

    def _edge_terms(
        self, ps: ParameterStore, graph: HeteroGraph, feats: NodeFeatures, relation: str
    ) -> Tuple[Tensor, Tensor]:
        """(logits [E, H], messages [E, D]) of one relation."""
        if self._param(relation, "w_self") not in ps:
            raise MissingRelationError(relation)
        table = graph.edge(relation)
        meta = RELATIONS[relation]
        v_i = ops.gather(feats[meta.dst], table.dst)
        v_j = ops.gather(feats[meta.src], table.src)
        self_part = ops.matmul(v_i, ps[self._param(relation, "w_self")])
        neighbor = ops.matmul(v_j, ps[self._param(relation, "w_neighbor")])
        edge = ops.matmul(Tensor(table.features), ps[self._param(relation, "w_edge")])
        f = ops.concat([self._heads(self_part), self._heads(neighbor), self._heads(edge)], axis=2)
        logits = ops.sum(ops.mul(ops.leaky_relu(f, self.slope), ps[f"{self.name}.attention"]), axis=2)
        return logits, ops.add(neighbor, edge)

    def attend(
        self,
        ps: ParameterStore,
        graph: HeteroGraph,
        feats: NodeFeatures,
        relations: Optional[Iterable[str]] = None,
    ) -> Dict[NodeType, Tuple[List[str], List[int], Tensor, Tensor]]:
        """Per target node type: (relations, edge counts, α [E_t, H],
        messages [E_t, D]) with the relations' edges stacked in order."""
        active = self.relations if relations is None else [
            r for r in ALL_RELATIONS if r in set(relations)
        ]
        by_type: Dict[NodeType, Tuple[List[str], List[int], List[Tensor], List[Tensor]]] = {}
        for relation in active:
            if graph.edge(relation).count == 0:
                continue
            logits, messages = self._edge_terms(ps, graph, feats, relation)
            entry = by_type.setdefault(RELATIONS[relation].dst, ([], [], [], []))
            entry[0].append(relation)
            entry[1].append(graph.edge(relation).count)
            entry[2].append(logits)
            entry[3].append(messages)

        out = {}
        for node_type, (names, counts, logits, messages) in by_type.items():
            targets = np.concatenate([graph.edge(r).dst for r in names])
            alpha = ops.segment_softmax(
                ops.concat(logits, axis=0), targets, graph.node_count(node_type)
            )
            out[node_type] = (names, counts, alpha, ops.concat(messages, axis=0))
        return out

    def attention_scores(
        self,
        ps: ParameterStore,
        graph: HeteroGraph,
        feats: NodeFeatures,
        relations: Optional[Iterable[str]] = None,
    ) -> Dict[str, np.ndarray]:
        """α [E_r, H] per active relation with at least one edge."""
        scores = {}
        for names, counts, alpha, _ in self.attend(ps, graph, feats, relations).values():
            offsets = np.cumsum([0] + counts)
            for relation, start, stop in zip(names, offsets[:-1], offsets[1:]):
                scores[relation] = alpha.data[start:stop]
        return scores

    def __call__(
        self,
        ps: ParameterStore,
        graph: HeteroGraph,
        feats: NodeFeatures,
        relations: Optional[Iterable[str]] = None,
        trace: Optional[AttentionTrace] = None,
        layer_index: int = 0,
        stage: str = "scene",
    ) -> NodeFeatures:
        attended = self.attend(ps, graph, feats, relations)
        updated = {}
        for node_type in self.node_types:
            x = feats[node_type]
            h = ops.matmul(x, ps[self._residual(node_type)])
            if node_type in attended:
                names, counts, alpha, messages = attended[node_type]
                targets = np.concatenate([graph.edge(r).dst for r in names])
                weighted = ops.mul(
                    self._heads(messages), ops.reshape(alpha, alpha.shape + (1,))
                )
                flat = ops.reshape(weighted, (weighted.shape[0], self.dim))
                h = ops.add(h, ops.segment_sum(flat, targets, x.shape[0]))
                if trace is not None:
                    self._record(trace, graph, names, counts, alpha, layer_index, stage)
            updated[node_type] = ops.leaky_relu(h, self.slope)
        return updated

    def _record(self, trace, graph, names, counts, alpha, layer_index, stage):
        offsets = np.cumsum([0] + counts)
        for relation, start, stop in zip(names, offsets[:-1], offsets[1:]):
            table = graph.edge(relation)
            meta = RELATIONS[relation]
            trace.add(
                AttentionBlock(
                    layer=layer_index,
                    stage=stage,
                    relation=relation,
                    src_type=meta.src.value,
                    dst_type=meta.dst.value,
                    src=table.src.copy(),
                    dst=table.dst.copy(),
                    alpha=alpha.data[start:stop].copy(),
                )
            )


class HgatStack:
    """``depth`` HGAT layers over the same relations and node types."""

    def __init__(
        self,
        store: ParameterStore,
        name: str,
        depth: int,
        dim: int,
        heads: int,
        relations: Sequence[str],
        node_types: Sequence[NodeType],
        rng: np.random.Generator,
        slope: float = 0.2,
    ):
        self.stage = name.rsplit(".", 1)[-1]
        self.relations = list(relations)
        self.layers = [
            HgatLayer(store, f"{name}.{i}", dim, heads, relations, node_types, rng, slope)
            for i in range(depth)
        ]

    def __call__(
        self,
        ps: ParameterStore,
        graph: HeteroGraph,
        feats: NodeFeatures,
        relations: Optional[Iterable[str]] = None,
        trace: Optional[AttentionTrace] = None,
    ) -> NodeFeatures:
        relations = self.relations if relations is None else list(relations)
        feats = dict(feats)
        for i, layer in enumerate(self.layers):
            feats.update(layer(ps, graph, feats, relations, trace, i, self.stage))
        return feats


def collect_attention(
    ps: ParameterStore,
    stack: HgatStack,
    graph: HeteroGraph,
    feats: NodeFeatures,
    relations: Optional[Iterable[str]] = None,
) -> AttentionTrace:
    """Re-run ``stack`` on ``feats`` and return the α of every layer."""
    trace = AttentionTrace()
    stack(ps, graph, feats, relations, trace)
    return trace
