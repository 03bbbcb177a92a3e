from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import numpy as np


class AgentType(str, Enum):
    vehicle = "vehicle"
    pedestrian = "pedestrian"
    bus = "bus"
    cyclist = "cyclist"
    motorcyclist = "motorcyclist"


class TrackCategory(str, Enum):
    focal = "focal"
    scored = "scored"
    unscored = "unscored"
    fragment = "fragment"


class MarkType(str, Enum):
    dashed = "dashed"
    solid = "solid"
    none = "none"


AGENT_TYPES: List[AgentType] = list(AgentType)
MARK_TYPES: List[MarkType] = list(MarkType)


@dataclass
class LanePolyline:
    id: str
    centerline: np.ndarray  # [P, 2] meters
    left_dist: np.ndarray  # [P]
    right_dist: np.ndarray  # [P]
    left_mark: MarkType = MarkType.none
    right_mark: MarkType = MarkType.none
    predecessors: List[str] = field(default_factory=list)
    successors: List[str] = field(default_factory=list)
    left_neighbor: Optional[str] = None
    right_neighbor: Optional[str] = None
    is_intersection: bool = False

    @property
    def length(self) -> float:
        return float(np.linalg.norm(np.diff(self.centerline, axis=0), axis=1).sum())


@dataclass
class AgentTrack:
    id: str
    agent_type: AgentType
    category: TrackCategory
    positions: np.ndarray  # [T, 2]
    velocities: np.ndarray  # [T, 2]
    headings: np.ndarray  # [T] radians, counterclockwise from east
    observed: np.ndarray  # [T] bool

    @property
    def num_steps(self) -> int:
        return int(self.positions.shape[0])

    @property
    def num_observed(self) -> int:
        return int(self.observed.sum())


@dataclass
class Scenario:
    id: str
    lanes: List[LanePolyline]
    tracks: List[AgentTrack]
    dt: float

    @property
    def focal(self) -> AgentTrack:
        return next(t for t in self.tracks if t.category == TrackCategory.focal)

    @property
    def focal_index(self) -> int:
        return next(i for i, t in enumerate(self.tracks) if t.category == TrackCategory.focal)

    def lane_index(self) -> Dict[str, int]:
        return {lane.id: i for i, lane in enumerate(self.lanes)}

    @property
    def num_observed(self) -> int:
        return self.focal.num_observed

    @property
    def num_future(self) -> int:
        return self.focal.num_steps - self.focal.num_observed


def wrap_angle(angle):
    """Map angles to [-pi, pi)."""
    return (np.asarray(angle) + np.pi) % (2.0 * np.pi) - np.pi


def transform_scenario(scenario: Scenario, rotation: float, translation) -> Scenario:
    """Rigidly move a scenario: rotate by ``rotation`` about the origin,
    then translate."""
    c, s = np.cos(rotation), np.sin(rotation)
    rot = np.array([[c, -s], [s, c]])
    offset = np.asarray(translation, dtype=float)

    def points(p):
        return p @ rot.T + offset

    lanes = [
        LanePolyline(
            id=lane.id,
            centerline=points(lane.centerline),
            left_dist=lane.left_dist.copy(),
            right_dist=lane.right_dist.copy(),
            left_mark=lane.left_mark,
            right_mark=lane.right_mark,
            predecessors=list(lane.predecessors),
            successors=list(lane.successors),
            left_neighbor=lane.left_neighbor,
            right_neighbor=lane.right_neighbor,
            is_intersection=lane.is_intersection,
        )
        for lane in scenario.lanes
    ]
    tracks = [
        AgentTrack(
            id=t.id,
            agent_type=t.agent_type,
            category=t.category,
            positions=points(t.positions),
            velocities=t.velocities @ rot.T,
            headings=wrap_angle(t.headings + rotation),
            observed=t.observed.copy(),
        )
        for t in scenario.tracks
    ]
    return Scenario(id=scenario.id, lanes=lanes, tracks=tracks, dt=scenario.dt)
