from typing import List, Optional, Tuple

from hgat_forecast.scenario.types import AgentType, MarkType, TrackCategory
from pydantic import BaseModel, Field

SCENARIO_SCHEMA_VERSION = "1.0"

Point = Tuple[float, float]


class LaneDocument(BaseModel):
    """One lane centerline with its marking attributes and topology."""

    id: str = Field(..., description="Lane id, unique within the scenario")
    centerline: List[Point] = Field(
        ..., description="Centerline points [[x, y], ...] in meters"
    )
    left_dist: List[float] = Field(
        ..., description="Distance to the left marking at every centerline point"
    )
    right_dist: List[float] = Field(
        ..., description="Distance to the right marking at every centerline point"
    )
    left_mark: MarkType = Field(MarkType.none, description="Left marking type")
    right_mark: MarkType = Field(MarkType.none, description="Right marking type")
    predecessors: List[str] = Field([], description="Ids of lanes leading into this one")
    successors: List[str] = Field([], description="Ids of lanes this one leads into")
    left_neighbor: Optional[str] = Field(None, description="Id of the lane to the left")
    right_neighbor: Optional[str] = Field(
        None, description="Id of the lane to the right"
    )
    is_intersection: bool = Field(False, description="Lane lies inside an intersection")


class StateDocument(BaseModel):
    x: float
    y: float
    vx: float
    vy: float
    heading: float = Field(..., description="Radians, counterclockwise from east")
    observed: bool


class TrackDocument(BaseModel):
    id: str = Field(..., description="Track id, unique within the scenario")
    type: AgentType
    category: TrackCategory
    states: List[StateDocument] = Field(
        ..., description="One state per timestep; observed ones come first"
    )


class ScenarioDocument(BaseModel):
    """On-disk scenario: lanes plus agent tracks (observed history and
    ground-truth future) sampled every ``dt_s`` seconds."""

    schema_version: str = Field(SCENARIO_SCHEMA_VERSION)
    id: str
    dt_s: float = Field(..., gt=0, description="Timestep duration in seconds")
    lanes: List[LaneDocument] = []
    tracks: List[TrackDocument] = []
