"""Retrain and evaluate with edge families left out of the scene graph.

Only the scene graph loses edges; the refinement graph is built the same
way for every configuration.
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from hgat_common.logger import logger
from hgat_forecast.graph.relations import REMOVABLE_RELATIONS, check_removable
from hgat_forecast.metrics.evaluation import MISS_THRESHOLD_M, REPORT_COLUMNS, EvalReport
from hgat_forecast.metrics.runner import evaluate_model
from hgat_forecast.scenario.types import Scenario
from hgat_forecast.schemas.options import ModelOptions, Regime, TrainingOptions
from hgat_forecast.training.trainer import train

ABLATION_COLUMNS = ("removed",) + REPORT_COLUMNS
PathLike = Union[str, Path]


def standard_removal_sets() -> List[Tuple[str, ...]]:
    """Full graph, every family on its own, then all of them together."""
    return [()] + [(r,) for r in REMOVABLE_RELATIONS] + [REMOVABLE_RELATIONS]


def removal_label(removed: Sequence[str]) -> str:
    return "+".join(removed) if removed else "none"


@dataclass
class AblationRow:
    removed: Tuple[str, ...]
    report: EvalReport

    def rows(self) -> List[List]:
        return [[removal_label(self.removed)] + row for row in self.report.rows()]


def ablate(
    scenarios: Sequence[Scenario],
    options: ModelOptions,
    training: TrainingOptions,
    removal_sets: Optional[Iterable[Sequence[str]]] = None,
    eval_scenarios: Optional[Sequence[Scenario]] = None,
    ks: Sequence[int] = (1, 6),
    miss_threshold: float = MISS_THRESHOLD_M,
    checkpoint_dir: Optional[PathLike] = None,
) -> List[AblationRow]:
    """One e2e training run and evaluation per removal set.

    Every set is validated before anything trains. ``eval_scenarios``
    defaults to the training scenarios.
    """
    sets = [check_removable(s) for s in (removal_sets if removal_sets is not None else standard_removal_sets())]
    eval_scenarios = eval_scenarios if eval_scenarios is not None else scenarios
    rows = []
    for removed in sets:
        label = removal_label(removed)
        logger.info("ablation run without {label}", label=label)
        run = training.copy(update={"regime": Regime.e2e, "removed_relations": list(removed)})
        checkpoint = Path(checkpoint_dir) / f"ablate-{label}.ckpt" if checkpoint_dir is not None else None
        result = train(scenarios, options, run, checkpoint)
        report = evaluate_model(
            result.model,
            eval_scenarios,
            ks,
            refine=True,
            miss_threshold=miss_threshold,
            removed_relations=removed,
            threads=training.threads,
        )
        rows.append(AblationRow(removed, report))
    return rows


def write_ablation(rows: Sequence[AblationRow], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(ABLATION_COLUMNS)
        for row in rows:
            writer.writerows(row.rows())
    return path
