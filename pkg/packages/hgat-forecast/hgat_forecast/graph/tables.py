from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from hgat_forecast.graph.frame import Frame
from hgat_forecast.graph.relations import RELATIONS, NodeType, Relation
from hgat_forecast.scenario.types import AgentType, TrackCategory


@dataclass
class NodeTable:
    node_type: NodeType
    features: np.ndarray  # [N, F]
    coords: Optional[np.ndarray] = None  # [N, 2] frame-relative
    headings: Optional[np.ndarray] = None  # [N] frame-relative
    owner: Optional[np.ndarray] = None  # lane index (lanes) or agent index
    timestep: Optional[np.ndarray] = None  # trajectory steps only
    arc: Optional[np.ndarray] = None  # lanes: arc length along the owning lane
    sequence: Optional[np.ndarray] = None  # full trajectories: [A, T_obs, F_seq]

    @property
    def count(self) -> int:
        return int(self.features.shape[0])

    @property
    def directions(self) -> Optional[np.ndarray]:
        if self.headings is None:
            return None
        return np.stack([np.cos(self.headings), np.sin(self.headings)], axis=-1)


@dataclass
class EdgeTable:
    relation: str
    src: np.ndarray  # [E] int
    dst: np.ndarray  # [E] int
    features: np.ndarray  # [E, F_edge]

    @classmethod
    def empty(cls, relation: str) -> "EdgeTable":
        dim = RELATIONS[relation].feature_dim
        return cls(
            relation,
            np.zeros(0, dtype=np.int64),
            np.zeros(0, dtype=np.int64),
            np.zeros((0, dim)),
        )

    @property
    def meta(self) -> Relation:
        return RELATIONS[self.relation]

    @property
    def count(self) -> int:
        return int(self.src.shape[0])


@dataclass
class AgentTable:
    """Per-agent bookkeeping kept next to the graph (track order)."""

    ids: List[str]
    types: List[AgentType]
    categories: List[TrackCategory]
    last_positions: np.ndarray  # [A, 2] frame-relative
    last_headings: np.ndarray  # [A] frame-relative
    future: Optional[np.ndarray] = None  # [A, T_fut, 2] frame-relative ground truth

    @property
    def count(self) -> int:
        return len(self.ids)

    def index(self, agent_id: str) -> int:
        return self.ids.index(agent_id)

    @property
    def focal_index(self) -> int:
        return self.categories.index(TrackCategory.focal)


@dataclass
class HeteroGraph:
    scenario_id: str
    frame: Frame
    nodes: Dict[NodeType, NodeTable]
    edges: Dict[str, EdgeTable]
    agents: AgentTable
    removed_relations: List[str] = field(default_factory=list)

    def node_count(self, node_type: NodeType) -> int:
        table = self.nodes.get(node_type)
        return table.count if table is not None else 0

    def edge(self, relation: str) -> EdgeTable:
        return self.edges.get(relation) or EdgeTable.empty(relation)

    def edge_counts(self) -> Dict[str, int]:
        return {name: table.count for name, table in self.edges.items()}

    @property
    def lanes(self) -> NodeTable:
        return self.nodes[NodeType.lane]

    @property
    def steps(self) -> NodeTable:
        return self.nodes[NodeType.step]

    @property
    def trajectories(self) -> NodeTable:
        return self.nodes[NodeType.traj]
