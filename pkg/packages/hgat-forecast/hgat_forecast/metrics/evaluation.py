"""minADE, minFDE, miss rate and brier-minFDE over the top-K modes."""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
from hgat_forecast.exceptions import MetricsError

MISS_THRESHOLD_M = 2.0
REPORT_COLUMNS = ("K", "minADE", "minFDE", "MR", "brier_minFDE", "n")


@dataclass
class AgentMetrics:
    """Per-agent values at one K; every array has one entry per agent."""

    k: int
    min_ade: np.ndarray
    min_fde: np.ndarray
    miss: np.ndarray  # bool
    brier_min_fde: np.ndarray
    best_mode: np.ndarray  # index into the original mode order
    best_confidence: np.ndarray

    @property
    def count(self) -> int:
        return len(self.min_fde)

    def summary(self) -> "MetricSummary":
        if self.count == 0:
            raise MetricsError("no agents to evaluate")
        return MetricSummary(
            k=self.k,
            min_ade=float(self.min_ade.mean()),
            min_fde=float(self.min_fde.mean()),
            miss_rate=float(self.miss.mean()),
            brier_min_fde=float(self.brier_min_fde.mean()),
            count=self.count,
        )


@dataclass
class MetricSummary:
    k: int
    min_ade: float
    min_fde: float
    miss_rate: float
    brier_min_fde: float
    count: int

    def row(self) -> List:
        return [self.k, repr(self.min_ade), repr(self.min_fde), repr(self.miss_rate), repr(self.brier_min_fde), self.count]


@dataclass
class EvalReport:
    summaries: Dict[int, MetricSummary]
    agents: Dict[int, AgentMetrics]

    @property
    def ks(self) -> List[int]:
        return sorted(self.summaries)

    def __getitem__(self, k: int) -> MetricSummary:
        return self.summaries[k]

    def rows(self) -> List[List]:
        return [self.summaries[k].row() for k in self.ks]


def top_k_modes(confidences: np.ndarray, k: int) -> np.ndarray:
    """[A, k] mode indices by descending confidence, ties to the lower
    index."""
    confidences = np.asarray(confidences)
    modes = confidences.shape[1]
    if k < 1 or k > modes:
        raise MetricsError(f"K={k} needs between 1 and {modes} modes")
    return np.argsort(-confidences, axis=1, kind="stable")[:, :k]


def agent_metrics(
    trajectories: np.ndarray,
    confidences: np.ndarray,
    future: np.ndarray,
    k: int,
    miss_threshold: float = MISS_THRESHOLD_M,
) -> AgentMetrics:
    """Metrics of trajectories [A, K, T, 2] with confidences [A, K]
    against ground truth [A, T, 2]."""
    trajectories = np.asarray(trajectories, dtype=float)
    confidences = np.asarray(confidences, dtype=float)
    future = np.asarray(future, dtype=float)
    if trajectories.ndim != 4 or trajectories.shape[-1] != 2:
        raise MetricsError(f"trajectories must be [A, K, T, 2], got {trajectories.shape}")
    if confidences.shape != trajectories.shape[:2]:
        raise MetricsError(f"confidences {confidences.shape} do not match trajectories {trajectories.shape}")
    if future.shape != (trajectories.shape[0],) + trajectories.shape[2:]:
        raise MetricsError(f"ground truth {future.shape} does not match trajectories {trajectories.shape}")

    top = top_k_modes(confidences, k)
    rows = np.arange(len(top))[:, None]
    candidates = trajectories[rows, top]  # [A, k, T, 2]
    errors = np.linalg.norm(candidates - future[:, None], axis=-1)  # [A, k, T]
    ade = errors.mean(axis=2)
    fde = errors[:, :, -1]
    best = np.argmin(fde, axis=1)
    agents = np.arange(len(top))
    min_fde = fde[agents, best]
    best_confidence = confidences[agents, top[agents, best]]
    return AgentMetrics(
        k=k,
        min_ade=ade.min(axis=1),
        min_fde=min_fde,
        miss=min_fde > miss_threshold,
        brier_min_fde=min_fde + (1.0 - best_confidence) ** 2,
        best_mode=top[agents, best],
        best_confidence=best_confidence,
    )


def evaluate(
    trajectories: np.ndarray,
    confidences: np.ndarray,
    future: np.ndarray,
    ks: Sequence[int] = (1, 6),
    miss_threshold: float = MISS_THRESHOLD_M,
) -> EvalReport:
    agents = {k: agent_metrics(trajectories, confidences, future, k, miss_threshold) for k in ks}
    return EvalReport({k: m.summary() for k, m in agents.items()}, agents)


def write_report(report: EvalReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(REPORT_COLUMNS)
        writer.writerows(report.rows())
    return path
