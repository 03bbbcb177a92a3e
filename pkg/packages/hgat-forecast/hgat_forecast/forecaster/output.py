import json
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np
from hgat_forecast.forecaster.heads import PredictionSet
from hgat_forecast.graph.tables import HeteroGraph
from hgat_forecast.scenario.types import TrackCategory
from hgat_forecast.schemas.prediction import (
    AgentPredictionDocument,
    ModeDocument,
    PredictionDocument,
)

SCORED_CATEGORIES = (TrackCategory.focal, TrackCategory.scored)


def prediction_to_document(
    prediction: PredictionSet,
    graph: HeteroGraph,
    dt: float,
    refined: bool = False,
    categories: Optional[Iterable[TrackCategory]] = SCORED_CATEGORIES,
) -> PredictionDocument:
    """World-frame document of ``prediction``; only agents whose category
    is in ``categories`` are written (all agents when None)."""
    keep = None if categories is None else set(categories)
    trajectories = graph.frame.to_world(prediction.trajectories.data)
    confidences = prediction.confidences.data
    agents = []
    for a, agent_id in enumerate(graph.agents.ids):
        if keep is not None and graph.agents.categories[a] not in keep:
            continue
        order = np.argsort(-confidences[a], kind="stable")
        agents.append(
            AgentPredictionDocument(
                agent_id=agent_id,
                agent_type=graph.agents.types[a],
                modes=[
                    ModeDocument(
                        confidence=float(confidences[a, k]),
                        points=[tuple(p) for p in trajectories[a, k].tolist()],
                    )
                    for k in order
                ],
            )
        )
    return PredictionDocument(scenario_id=graph.scenario_id, refined=refined, dt_s=dt, agents=agents)


def write_prediction(document: PredictionDocument, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(json.loads(document.json()), indent=1), encoding="utf-8")
    return path
