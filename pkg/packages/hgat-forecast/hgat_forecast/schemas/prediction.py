from typing import List, Tuple

from hgat_forecast.scenario.types import AgentType
from pydantic import BaseModel, Field

PREDICTION_SCHEMA_VERSION = "1.0"


class ModeDocument(BaseModel):
    confidence: float = Field(..., ge=0, le=1)
    points: List[Tuple[float, float]] = Field(
        ..., description="Future positions [[x, y], ...] in world coordinates"
    )


class AgentPredictionDocument(BaseModel):
    agent_id: str
    agent_type: AgentType
    modes: List[ModeDocument] = Field(..., description="Sorted by decreasing confidence")


class PredictionDocument(BaseModel):
    """Multimodal forecasts of one scenario."""

    schema_version: str = Field(PREDICTION_SCHEMA_VERSION)
    scenario_id: str
    refined: bool = Field(False, description="Trajectories went through map refinement")
    dt_s: float = Field(..., gt=0)
    agents: List[AgentPredictionDocument]
