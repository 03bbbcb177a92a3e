from typing import List, Optional, Tuple

from pydantic import BaseModel, Field


class NodeListDocument(BaseModel):
    node_type: str
    count: int
    coords: Optional[List[Tuple[float, float]]] = Field(
        None, description="Frame-relative coordinates; absent for full trajectories"
    )
    timestep: Optional[List[int]] = None
    owner: Optional[List[int]] = Field(
        None, description="Owning lane index (lanes) or agent index (trajectories)"
    )


class EdgeListDocument(BaseModel):
    relation: str
    src_type: str
    dst_type: str
    src: List[int]
    dst: List[int]


class GraphDocument(BaseModel):
    """Debug dump of a scene graph."""

    scenario_id: str
    frame_origin: Tuple[float, float]
    frame_heading: float
    nodes: List[NodeListDocument]
    edges: List[EdgeListDocument]
