"""Encoder pipeline: raw features to uniform D-wide node features, map
attention over lane edges, scene attention over every edge, and the
final per-agent feature processor."""

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from hgat_forecast.graph.agents import STEP_FEATURES, TRAJ_FEATURES
from hgat_forecast.graph.lanes import LANE_FEATURES
from hgat_forecast.graph.relations import ALL_RELATIONS, LANE_RELATIONS, NodeType
from hgat_forecast.graph.tables import HeteroGraph
from hgat_forecast.hgat.attention import AttentionTrace
from hgat_forecast.hgat.layer import HgatStack
from hgat_forecast.numerics import ops
from hgat_forecast.numerics.blocks import MLP, Conv1dResidualBlock, ResidualMLP
from hgat_forecast.numerics.params import ParameterStore
from hgat_forecast.numerics.tensor import Tensor
from hgat_forecast.schemas.options import ModelOptions


@dataclass
class EncodedScene:
    lane: Tensor  # [N_lane, D] map encoder output
    scene_lane: Tensor  # [N_lane, D] after scene attention
    step: Tensor  # [N_step, D]
    traj: Tensor  # [A, D] full-trajectory nodes after scene attention
    traj_initial: Tensor  # [A, D] trajectory encoder output
    final: Tensor  # [A, D]
    attention: Optional[AttentionTrace] = None


class SceneEncoder:
    def __init__(self, store: ParameterStore, options: ModelOptions, rng: np.random.Generator):
        dim = options.dim
        norm = options.norm_args
        self.trajectory = [
            Conv1dResidualBlock(
                store, "encoder.trajectory.0", TRAJ_FEATURES, dim, rng, options.conv_kernel, **norm
            ),
            Conv1dResidualBlock(
                store, "encoder.trajectory.1", dim, dim, rng, options.conv_kernel, **norm
            ),
        ]
        self.step = ResidualMLP(store, "encoder.step", STEP_FEATURES, dim, rng, **norm)
        self.lane = ResidualMLP(store, "encoder.lane", LANE_FEATURES, dim, rng, **norm)
        self.map = HgatStack(
            store,
            "encoder.map",
            options.map_layers,
            dim,
            options.heads,
            LANE_RELATIONS,
            [NodeType.lane],
            rng,
            options.leaky_slope,
        )
        self.scene = HgatStack(
            store,
            "encoder.scene",
            options.scene_layers,
            dim,
            options.heads,
            ALL_RELATIONS,
            list(NodeType),
            rng,
            options.leaky_slope,
        )
        self.final = MLP(store, "encoder.final", 2 * dim, dim, 3, rng, **norm)

    def encode_full_trajectory(self, ps: ParameterStore, sequence) -> Tensor:
        """[A, T_obs, F] observed histories to [A, D]: the convolution
        output at the last observed step."""
        h = Tensor(sequence) if not isinstance(sequence, Tensor) else sequence
        for block in self.trajectory:
            h = block(ps, h)
        last = ops.gather(h, [h.shape[1] - 1], axis=1)
        return ops.reshape(last, (h.shape[0], h.shape[2]))

    def encode_trajectory_step(self, ps: ParameterStore, features) -> Tensor:
        return self.step(ps, features)

    def encode_lane_node(self, ps: ParameterStore, features) -> Tensor:
        return self.lane(ps, features)

    def encode_map(
        self,
        ps: ParameterStore,
        graph: HeteroGraph,
        lane_feats: Tensor,
        trace: Optional[AttentionTrace] = None,
    ) -> Tensor:
        return self.map(ps, graph, {NodeType.lane: lane_feats}, trace=trace)[NodeType.lane]

    def encode_scene(
        self,
        ps: ParameterStore,
        graph: HeteroGraph,
        feats,
        relations: Optional[Iterable[str]] = None,
        trace: Optional[AttentionTrace] = None,
    ):
        return self.scene(ps, graph, feats, relations, trace)

    def final_features(self, ps: ParameterStore, traj: Tensor, traj_initial: Tensor) -> Tensor:
        return self.final(ps, ops.concat([traj, traj_initial], axis=1))

    def __call__(
        self,
        ps: ParameterStore,
        graph: HeteroGraph,
        trace: Optional[AttentionTrace] = None,
    ) -> EncodedScene:
        traj_initial = self.encode_full_trajectory(ps, graph.trajectories.sequence)
        step = self.encode_trajectory_step(ps, graph.steps.features)
        lane = self.encode_map(ps, graph, self.encode_lane_node(ps, graph.lanes.features), trace)
        scene = self.encode_scene(
            ps,
            graph,
            {NodeType.lane: lane, NodeType.step: step, NodeType.traj: traj_initial},
            trace=trace,
        )
        return EncodedScene(
            lane=lane,
            scene_lane=scene[NodeType.lane],
            step=scene[NodeType.step],
            traj=scene[NodeType.traj],
            traj_initial=traj_initial,
            final=self.final_features(ps, scene[NodeType.traj], traj_initial),
            attention=trace,
        )
