from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np
from hgat_common.logger import logger
from hgat_forecast.exceptions import MetricsError
from hgat_forecast.graph.tables import HeteroGraph
from hgat_forecast.metrics.evaluation import MISS_THRESHOLD_M, EvalReport, evaluate
from hgat_forecast.model import HgatForecaster
from hgat_forecast.scenario.types import Scenario
from hgat_forecast.training.trainer import build_scene_graphs


def focal_predictions(model: HgatForecaster, graph: HeteroGraph, refine: bool):
    """(trajectories [K, T, 2], confidences [K], future [T, 2]) of the
    focal agent, frame-relative."""
    prediction = model.predict(graph, refine=refine).final
    a = graph.agents.focal_index
    return (
        prediction.trajectories.data[a],
        prediction.confidences.data[a],
        graph.agents.future[a],
    )


def evaluate_graphs(
    model: HgatForecaster,
    graphs: Sequence[HeteroGraph],
    ks: Sequence[int] = (1, 6),
    refine: bool = True,
    miss_threshold: float = MISS_THRESHOLD_M,
    threads: int = 1,
) -> EvalReport:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda g: focal_predictions(model, g, refine), graphs))
    else:
        rows = [focal_predictions(model, g, refine) for g in graphs]
    trajectories, confidences, future = (np.stack(column) for column in zip(*rows))
    report = evaluate(trajectories, confidences, future, ks, miss_threshold)
    for k in report.ks:
        s = report[k]
        logger.info(
            "K={k}: minADE={ade:.3f} minFDE={fde:.3f} MR={mr:.3f} brier-minFDE={brier:.3f} over {n} focal agents",
            k=k,
            ade=s.min_ade,
            fde=s.min_fde,
            mr=s.miss_rate,
            brier=s.brier_min_fde,
            n=s.count,
        )
    return report


def evaluate_model(
    model: HgatForecaster,
    scenarios: Sequence[Scenario],
    ks: Sequence[int] = (1, 6),
    refine: bool = True,
    miss_threshold: float = MISS_THRESHOLD_M,
    removed_relations: Optional[Sequence[str]] = None,
    threads: int = 1,
) -> EvalReport:
    """Focal-agent metrics of ``model`` on ``scenarios``, with the graph
    built the way the model was trained."""
    for k in ks:
        if k > model.options.modes:
            raise MetricsError(f"K={k} exceeds the {model.options.modes} predicted modes")
    graphs = build_scene_graphs(scenarios, model.options, removed_relations or ())
    return evaluate_graphs(model, graphs, ks, refine, miss_threshold, threads)
