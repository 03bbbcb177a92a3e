"""Winner-take-all trajectory regression and max-margin confidence losses.

For every agent the mode whose endpoint is closest to the ground truth
is the best mode. Its points are regressed with smooth-L1, and every
other mode's logit is pushed at least ``margin`` below the best one.
Agent terms are weighted by track category and summed.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from hgat_forecast.forecaster.heads import PredictionSet
from hgat_forecast.numerics import ops
from hgat_forecast.numerics.tensor import Tensor
from hgat_forecast.scenario.types import TrackCategory
from hgat_forecast.schemas.options import ImportanceWeights


@dataclass
class LossBreakdown:
    weights: np.ndarray  # [A]
    traj: np.ndarray  # [A] per-agent trajectory loss
    conf: np.ndarray  # [A] per-agent confidence loss
    best_modes: np.ndarray  # [A]
    total: Tensor  # scalar

    @property
    def weighted_traj(self) -> float:
        return float(self.weights @ self.traj)

    @property
    def weighted_conf(self) -> float:
        return float(self.weights @ self.conf)


def select_best_modes(trajectories: np.ndarray, future: np.ndarray) -> np.ndarray:
    """[A] index of the mode with the smallest endpoint error; ties go
    to the lower index."""
    trajectories = np.asarray(trajectories)
    endpoint = np.linalg.norm(trajectories[:, :, -1] - np.asarray(future)[:, None, -1], axis=-1)
    return np.argmin(endpoint, axis=1)


def _pick(x: Tensor, best: np.ndarray) -> Tensor:
    """Row ``best[a]`` of every agent ``a`` of x [A, K, ...]."""
    n_agents, modes = x.shape[:2]
    flat = ops.reshape(x, (n_agents * modes,) + x.shape[2:])
    return ops.gather(flat, np.arange(n_agents) * modes + best)


def trajectory_loss(trajectories: Tensor, future: np.ndarray, best: Optional[np.ndarray] = None):
    """(per-agent smooth-L1 of the best mode [A], best modes [A])."""
    if best is None:
        best = select_best_modes(trajectories.data, future)
    error = ops.sub(_pick(trajectories, best), np.asarray(future, dtype=float))
    return ops.mean(ops.smooth_l1(error), axis=(1, 2)), best


def confidence_loss(logits: Tensor, best: np.ndarray, margin: float = 0.2) -> Tensor:
    """Per-agent mean over the non-best modes of
    ``max(0, logit_k - logit_best + margin)``."""
    n_agents, modes = logits.shape
    if modes == 1:
        return Tensor(np.zeros(n_agents))
    best_logit = ops.reshape(_pick(logits, best), (n_agents, 1))
    hinge = ops.relu(ops.add(ops.sub(logits, best_logit), margin))
    others = np.ones((n_agents, modes))
    others[np.arange(n_agents), best] = 0.0
    return ops.scale(ops.sum(ops.mul(hinge, others), axis=1), 1.0 / (modes - 1))


def importance_weights(
    categories: Sequence[TrackCategory], importance: ImportanceWeights
) -> np.ndarray:
    return np.array([getattr(importance, TrackCategory(c).value) for c in categories])


def total_loss(
    prediction: PredictionSet,
    future: np.ndarray,
    categories: Sequence[TrackCategory],
    importance: ImportanceWeights = ImportanceWeights(),
    traj_weight: float = 1.0,
    margin: float = 0.2,
) -> LossBreakdown:
    """sum_a w(a) * (L_conf(a) + traj_weight * L_traj(a))."""
    traj, best = trajectory_loss(prediction.trajectories, future)
    conf = confidence_loss(prediction.logits, best, margin)
    weights = importance_weights(categories, importance)
    total = ops.sum(ops.mul(ops.add(conf, ops.scale(traj, traj_weight)), weights))
    return LossBreakdown(weights, traj.data.copy(), conf.data.copy(), best, total)
