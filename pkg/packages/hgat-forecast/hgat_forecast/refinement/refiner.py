"""Map-based refinement of trajectory proposals.

Every iteration links each predicted point to its closest lane nodes,
lets the points read the map, gathers the points of each proposal into
its trajectory node and hands the result back to the points, then moves
every point by a learned offset. A last accumulation feeds a separate
confidence head.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from hgat_forecast.encoders.encoder import EncodedScene
from hgat_forecast.exceptions import RefinementError
from hgat_forecast.forecaster.heads import PredictionSet
from hgat_forecast.graph.relations import RELATIONS
from hgat_forecast.graph.tables import EdgeTable, HeteroGraph
from hgat_forecast.numerics import ops
from hgat_forecast.numerics.blocks import MLP, Linear, LinearNorm
from hgat_forecast.numerics.params import ParameterStore
from hgat_forecast.numerics.tensor import Tensor
from hgat_forecast.refinement.contract import (
    RefinementGraph,
    RefinementInputs,
    build_refinement_graph,
)
from hgat_forecast.refinement.conv import TransformerConv
from hgat_forecast.refinement.geometry import (
    dynamic_edges,
    lane_edge_features,
    step_directions,
    step_headings,
)
from hgat_forecast.schemas.options import ModelOptions

CONFIDENCE_LAYERS = 4


@dataclass
class RefinementResult:
    prediction: PredictionSet
    graph: RefinementGraph


class Refiner:
    def __init__(self, store: ParameterStore, options: ModelOptions, rng: np.random.Generator):
        dim, heads = options.dim, options.refine_heads
        norm = options.norm_args
        self.dim = dim
        self.t_fut = options.t_fut
        self.iterations = options.refine_iterations
        self.neighbors = options.refine_neighbors
        self.coord_scale = options.refine_coord_scale_m
        # aux feature, normalized timestep, scaled coordinates
        self.step_init = Linear(store, "refinement.step_init", dim + 3, dim, rng)
        self.lane_to_step = TransformerConv(
            store, "refinement.lane_to_step", dim, heads, RELATIONS["lane_to_step"].feature_dim, rng
        )
        self.step_to_traj = TransformerConv(store, "refinement.step_to_traj", dim, heads, 1, rng)
        self.traj_to_step = TransformerConv(store, "refinement.traj_to_step", dim, heads, 1, rng)
        self.offset_hidden = LinearNorm(store, "refinement.offset.0", dim, dim, rng, **norm)
        self.offset_out = Linear(store, "refinement.offset.out", dim, 2, rng, zero_init=True)
        self.accumulate = TransformerConv(store, "refinement.accumulate", dim, heads, 1, rng)
        self.confidence = MLP(store, "refinement.confidence", dim, dim, CONFIDENCE_LAYERS, rng, **norm)
        self.confidence_out = Linear(store, "refinement.confidence.out", dim, 1, rng)

    def prepare_inputs(
        self,
        ps: ParameterStore,
        proposals: PredictionSet,
        encoded: EncodedScene,
        graph: HeteroGraph,
    ) -> RefinementInputs:
        """Refinement inputs of a scene encoded by this package's encoders."""
        n_agents, modes, steps, _ = proposals.trajectories.shape
        aux = ops.reshape(proposals.aux, (n_agents, modes, 1, self.dim))
        aux = ops.gather(aux, np.zeros(steps, dtype=np.int64), axis=2)
        tau = np.broadcast_to(
            ((np.arange(steps) + 1.0) / steps)[None, None, :, None], (n_agents, modes, steps, 1)
        )
        coords = ops.scale(proposals.trajectories, 1.0 / self.coord_scale)
        step_features = self.step_init(ps, ops.concat([aux, Tensor(tau), coords], axis=3))
        final = ops.reshape(encoded.final, (n_agents, 1, self.dim))
        traj_features = ops.gather(final, np.zeros(modes, dtype=np.int64), axis=1)
        return RefinementInputs(
            lane_coords=graph.lanes.coords,
            lane_headings=graph.lanes.headings,
            lane_features=encoded.lane,
            step_coords=proposals.trajectories,
            step_features=step_features,
            traj_features=traj_features,
            origins=graph.agents.last_positions,
            origin_headings=graph.agents.last_headings,
        )

    def init_refinement_graph(
        self,
        ps: ParameterStore,
        proposals: PredictionSet,
        encoded: EncodedScene,
        graph: HeteroGraph,
    ) -> RefinementGraph:
        return build_refinement_graph(self.prepare_inputs(ps, proposals, encoded, graph))

    def link_lanes(self, rgraph: RefinementGraph) -> Tuple[EdgeTable, Tensor]:
        """Lane edges of the current points and their features as a tensor
        that follows the point coordinates."""
        steps = rgraph.shape[2]
        coords = rgraph.step_coords.data
        headings = step_headings(coords, steps, rgraph.origins, rgraph.origin_headings)
        edges = dynamic_edges(coords, headings, rgraph.lane_coords, rgraph.lane_headings, self.neighbors)
        dirs = step_directions(rgraph.step_coords, steps, rgraph.origins, rgraph.origin_headings)
        features = lane_edge_features(
            rgraph.step_coords, dirs, rgraph.lane_coords, rgraph.lane_headings, edges.src, edges.dst
        )
        return edges, features

    def iterate(self, ps: ParameterStore, rgraph: RefinementGraph) -> RefinementGraph:
        """One refinement iteration; the lane edges are rebuilt from the
        current point coordinates (no gradient through the selection)."""
        edges, edge_features = self.link_lanes(rgraph)
        points = np.arange(rgraph.num_steps)
        owner, tau = rgraph.step_owner, rgraph.step_tau
        step = self.lane_to_step(ps, rgraph.step_feats, rgraph.lane_feats, edges.src, edges.dst, edge_features)
        traj = self.step_to_traj(ps, rgraph.traj_feats, step, points, owner, tau)
        step = self.traj_to_step(ps, step, traj, owner, points, tau)
        offsets = self.offset_out(ps, self.offset_hidden(ps, step))
        return rgraph.update(
            step_coords=ops.add(rgraph.step_coords, offsets),
            step_feats=step,
            traj_feats=traj,
            lane_edges=edges,
        )

    def rate_confidence(self, ps: ParameterStore, rgraph: RefinementGraph):
        n_agents, modes, _ = rgraph.shape
        points = np.arange(rgraph.num_steps)
        traj = self.accumulate(
            ps, rgraph.traj_feats, rgraph.step_feats, points, rgraph.step_owner, rgraph.step_tau
        )
        logits = self.confidence_out(ps, self.confidence(ps, traj))
        logits = ops.reshape(logits, (n_agents, modes))
        return logits, ops.softmax(logits, axis=1)

    def refine_graph(
        self,
        ps: ParameterStore,
        rgraph: RefinementGraph,
        aux: Tensor,
        iterations: Optional[int] = None,
    ) -> RefinementResult:
        iterations = self.iterations if iterations is None else iterations
        if iterations < 1:
            raise RefinementError(f"refinement needs at least one iteration, got {iterations}")
        for _ in range(iterations):
            rgraph = self.iterate(ps, rgraph)
        logits, confidences = self.rate_confidence(ps, rgraph)
        n_agents, modes, steps = rgraph.shape
        trajectories = ops.reshape(rgraph.step_coords, (n_agents, modes, steps, 2))
        return RefinementResult(PredictionSet(trajectories, aux, logits, confidences), rgraph)

    def __call__(
        self,
        ps: ParameterStore,
        proposals: PredictionSet,
        encoded: EncodedScene,
        graph: HeteroGraph,
        iterations: Optional[int] = None,
    ) -> RefinementResult:
        rgraph = self.init_refinement_graph(ps, proposals, encoded, graph)
        return self.refine_graph(ps, rgraph, proposals.aux, iterations)
