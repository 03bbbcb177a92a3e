from enum import Enum
from typing import Dict, Iterable, NamedTuple, Tuple

from hgat_forecast.exceptions import AblationError


class NodeType(str, Enum):
    lane = "lane"
    step = "trajectory_step"
    traj = "full_trajectory"


class Relation(NamedTuple):
    name: str
    src: NodeType
    dst: NodeType
    feature_dim: int


RELATIONS: Dict[str, Relation] = {
    r.name: r
    for r in (
        Relation("lane_left", NodeType.lane, NodeType.lane, 4),
        Relation("lane_right", NodeType.lane, NodeType.lane, 4),
        Relation("lane_pred", NodeType.lane, NodeType.lane, 4),
        Relation("lane_succ", NodeType.lane, NodeType.lane, 4),
        Relation("lane_to_step", NodeType.lane, NodeType.step, 4),
        Relation("step_to_lane", NodeType.step, NodeType.lane, 4),
        Relation("step_to_step", NodeType.step, NodeType.step, 5),
        Relation("step_to_traj", NodeType.step, NodeType.traj, 1),
        Relation("traj_to_step", NodeType.traj, NodeType.step, 1),
    )
}

LANE_RELATIONS: Tuple[str, ...] = ("lane_left", "lane_right", "lane_pred", "lane_succ")
ALL_RELATIONS: Tuple[str, ...] = tuple(RELATIONS)
# edge families that may be left out of the scene graph
REMOVABLE_RELATIONS: Tuple[str, ...] = (
    "lane_to_step",
    "step_to_lane",
    "step_to_step",
    "traj_to_step",
)


def check_removable(relations: Iterable[str]) -> Tuple[str, ...]:
    relations = tuple(sorted(set(relations)))
    rejected = [r for r in relations if r not in REMOVABLE_RELATIONS]
    if rejected:
        raise AblationError(rejected)
    return relations
