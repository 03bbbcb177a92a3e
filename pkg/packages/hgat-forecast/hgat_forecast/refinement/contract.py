"""What the refinement module needs from whoever produced the proposals.

Any pipeline can fill a :class:`RefinementInputs`: lane nodes with
coordinates, headings and features, the proposed trajectory points with
their initial features, and one initial feature vector per proposed
trajectory. Shapes use A agents, K modes, T future steps, D features.
"""

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from hgat_forecast.exceptions import RefinementContractError
from hgat_forecast.graph.tables import EdgeTable
from hgat_forecast.numerics import ops
from hgat_forecast.numerics.tensor import Tensor, as_tensor


@dataclass
class RefinementInputs:
    lane_coords: Optional[np.ndarray]  # [L, 2]
    lane_headings: Optional[np.ndarray]  # [L]
    lane_features: Optional[Tensor]  # [L, D]
    step_coords: Optional[Tensor]  # [A, K, T, 2]
    step_features: Optional[Tensor]  # [A, K, T, D]
    traj_features: Optional[Tensor]  # [A, K, D]
    # last observed pose per agent, used to orient the first step
    origins: Optional[np.ndarray] = None  # [A, 2]
    origin_headings: Optional[np.ndarray] = None  # [A]

    def validate(self) -> Tuple[int, int, int, int]:
        """Check the contract and return (A, K, T, D)."""
        if self.lane_coords is None:
            raise RefinementContractError("lane nodes need coordinates")
        if self.lane_headings is None:
            raise RefinementContractError("lane nodes need headings")
        if self.lane_features is None:
            raise RefinementContractError("lane nodes need features")
        if self.step_coords is None:
            raise RefinementContractError("trajectory-step nodes need coordinates")
        if self.step_features is None:
            raise RefinementContractError("trajectory-step nodes need initial features")
        if self.traj_features is None:
            raise RefinementContractError("full-trajectory nodes need initial features")

        n_lanes = np.shape(self.lane_coords)[0]
        if np.shape(self.lane_coords) != (n_lanes, 2) or np.shape(self.lane_headings) != (n_lanes,):
            raise RefinementContractError("lane coordinates must be [L, 2] with [L] headings")
        if self.lane_features.ndim != 2 or self.lane_features.shape[0] != n_lanes:
            raise RefinementContractError("lane features must be [L, D] matching the coordinates")
        dim = self.lane_features.shape[1]
        coords = self.step_coords.shape
        if len(coords) != 4 or coords[-1] != 2:
            raise RefinementContractError("trajectory-step coordinates must be [A, K, T, 2]")
        n_agents, modes, steps = coords[:3]
        if self.step_features.shape != (n_agents, modes, steps, dim):
            raise RefinementContractError("trajectory-step features must be [A, K, T, D]")
        if self.traj_features.shape != (n_agents, modes, dim):
            raise RefinementContractError("full-trajectory features must be [A, K, D]")
        if self.origins is not None and np.shape(self.origins) != (n_agents, 2):
            raise RefinementContractError("origins must be [A, 2]")
        if self.origin_headings is not None and np.shape(self.origin_headings) != (n_agents,):
            raise RefinementContractError("origin headings must be [A]")
        return n_agents, modes, steps, dim


@dataclass
class RefinementGraph:
    """Refinement graph with flattened nodes: step ``(a * K + k) * T + t``
    belongs to trajectory ``a * K + k``."""

    shape: Tuple[int, int, int]  # (A, K, T)
    lane_coords: np.ndarray
    lane_headings: np.ndarray
    lane_feats: Tensor  # [L, D], only ever sent from
    step_coords: Tensor  # [N, 2]
    step_feats: Tensor  # [N, D]
    traj_feats: Tensor  # [A * K, D]
    step_owner: np.ndarray  # [N]
    step_tau: np.ndarray  # [N, 1] normalized future timestep
    origins: Optional[np.ndarray]  # [A * K, 2]
    origin_headings: np.ndarray  # [A * K]
    lane_edges: Optional[EdgeTable] = None

    @property
    def num_steps(self) -> int:
        return self.step_owner.shape[0]

    @property
    def num_trajectories(self) -> int:
        return self.traj_feats.shape[0]

    def update(self, **changes) -> "RefinementGraph":
        return replace(self, **changes)


def build_refinement_graph(inputs: RefinementInputs) -> RefinementGraph:
    n_agents, modes, steps, dim = inputs.validate()
    n_traj = n_agents * modes
    origins = None
    if inputs.origins is not None:
        origins = np.repeat(np.asarray(inputs.origins, dtype=float), modes, axis=0)
    origin_headings = (
        np.zeros(n_agents)
        if inputs.origin_headings is None
        else np.asarray(inputs.origin_headings, dtype=float)
    )
    return RefinementGraph(
        shape=(n_agents, modes, steps),
        lane_coords=np.asarray(inputs.lane_coords, dtype=float),
        lane_headings=np.asarray(inputs.lane_headings, dtype=float),
        lane_feats=as_tensor(inputs.lane_features),
        step_coords=ops.reshape(inputs.step_coords, (n_traj * steps, 2)),
        step_feats=ops.reshape(inputs.step_features, (n_traj * steps, dim)),
        traj_feats=ops.reshape(inputs.traj_features, (n_traj, dim)),
        step_owner=np.repeat(np.arange(n_traj, dtype=np.int64), steps),
        step_tau=np.tile((np.arange(steps) + 1.0) / steps, n_traj)[:, None],
        origins=origins,
        origin_headings=np.repeat(origin_headings, modes),
    )
