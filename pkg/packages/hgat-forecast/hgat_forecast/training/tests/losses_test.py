import numpy as np
import pytest
from hgat_forecast.forecaster.heads import PredictionSet
from hgat_forecast.numerics import ops
from hgat_forecast.numerics.gradcheck import check_gradients
from hgat_forecast.numerics.tensor import Tensor
from hgat_forecast.scenario.types import TrackCategory
from hgat_forecast.schemas.options import ImportanceWeights
from hgat_forecast.training.losses import (
    confidence_loss,
    importance_weights,
    select_best_modes,
    total_loss,
    trajectory_loss,
)


def smooth_l1(x):
    x = np.abs(x)
    return np.where(x < 1.0, 0.5 * x**2, x - 0.5)


def prediction(trajectories, logits):
    trajectories = Tensor(np.asarray(trajectories, dtype=float), requires_grad=True, name="trajectories")
    logits = Tensor(np.asarray(logits, dtype=float), requires_grad=True, name="logits")
    aux = Tensor(np.zeros(trajectories.shape[:2] + (1,)))
    return PredictionSet(trajectories, aux, logits, ops.softmax(logits, axis=1))


def test_exact_mode_has_zero_trajectory_loss():
    future = np.array([[[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]])
    modes = np.stack([future[0] + 5.0, future[0], future[0] - 1.0])[None]
    loss, best = trajectory_loss(Tensor(modes), future)
    assert best.tolist() == [1]
    assert loss.data.tolist() == [0.0]


def test_identical_modes_select_the_first():
    future = np.zeros((1, 3, 2))
    modes = np.ones((1, 4, 3, 2))
    assert select_best_modes(modes, future).tolist() == [0]


def test_trajectory_loss_matches_hand_computation():
    future = np.array([[[0.0, 0.0], [1.0, 0.0]]])
    near = np.array([[0.5, 0.0], [1.0, 1.0]])  # endpoint error 1 m
    far = np.array([[0.0, 0.0], [4.0, 0.0]])  # endpoint error 3 m
    loss, best = trajectory_loss(Tensor(np.stack([far, near])[None]), future)
    assert best.tolist() == [1]
    expected = (smooth_l1(0.5) + 0 + 0 + smooth_l1(1.0)) / 4
    assert loss.item() == pytest.approx(expected)


def test_confidence_loss_cases():
    best = np.array([0])
    # 0.8 - 1.0 + 0.2 sits on the hinge only up to rounding
    assert confidence_loss(Tensor([[1.0, 0.5, 0.8]]), best, 0.2).item() == pytest.approx(0.0, abs=1e-12)
    assert confidence_loss(Tensor([[1.0, 0.5, 0.75]]), best, 0.25).item() == 0.0
    assert confidence_loss(Tensor([[0.3, 0.3, 0.3, 0.3]]), best, 0.2).item() == pytest.approx(0.2)
    assert confidence_loss(Tensor([[2.0]]), best, 0.2).item() == 0.0


def test_confidence_loss_matches_loop_oracle():
    rng = np.random.default_rng(3)
    logits = rng.standard_normal((7, 6))
    best = rng.integers(0, 6, 7)
    loss = confidence_loss(Tensor(logits), best, 0.2).data
    for a in range(7):
        others = [max(0.0, logits[a, k] - logits[a, best[a]] + 0.2) for k in range(6) if k != best[a]]
        assert loss[a] == pytest.approx(sum(others) / 5, abs=1e-12)


def test_importance_weights():
    categories = [TrackCategory.focal, TrackCategory.scored, TrackCategory.unscored, TrackCategory.fragment]
    assert importance_weights(categories, ImportanceWeights()).tolist() == [1.0, 0.5, 0.2, 0.0]


def test_single_focal_agent_total():
    future = np.array([[[1.0, 1.0]]])
    pred = prediction([[[[1.0, 2.0]], [[4.0, 4.0]]]], [[0.0, 1.0]])
    loss = total_loss(pred, future, [TrackCategory.focal])
    traj = smooth_l1(1.0) / 2  # one of two coordinates off by 1
    conf = 1.0 + 0.2
    assert loss.best_modes.tolist() == [0]
    assert loss.total.item() == pytest.approx(conf + traj)


def test_weighted_sum_over_agents():
    rng = np.random.default_rng(5)
    future = rng.standard_normal((3, 4, 2))
    trajectories = rng.standard_normal((3, 2, 4, 2))
    logits = rng.standard_normal((3, 2))
    categories = [TrackCategory.focal, TrackCategory.unscored, TrackCategory.fragment]
    loss = total_loss(prediction(trajectories, logits), future, categories, traj_weight=1.0)

    expected = 0.0
    for a, w in enumerate([1.0, 0.2, 0.0]):
        best = np.argmin(np.linalg.norm(trajectories[a, :, -1] - future[a, -1], axis=-1))
        traj = smooth_l1(trajectories[a, best] - future[a]).mean()
        conf = max(0.0, logits[a, 1 - best] - logits[a, best] + 0.2)
        expected += w * (conf + traj)
    assert loss.total.item() == pytest.approx(expected, abs=1e-12)
    assert loss.weighted_traj + loss.weighted_conf == pytest.approx(expected, abs=1e-12)
    assert np.all(loss.traj >= 0) and np.all(loss.conf >= 0)


def test_loss_gradients():
    rng = np.random.default_rng(8)
    future = rng.standard_normal((2, 3, 2))
    pred = prediction(rng.standard_normal((2, 3, 3, 2)), rng.standard_normal((2, 3)))
    categories = [TrackCategory.focal, TrackCategory.scored]
    best = select_best_modes(pred.trajectories.data, future)

    def fn():
        traj, _ = trajectory_loss(pred.trajectories, future, best)
        conf = confidence_loss(pred.logits, best)
        return ops.sum(ops.mul(ops.add(conf, traj), np.array([1.0, 0.5])))

    result = check_gradients(fn, [pred.trajectories, pred.logits])
    assert result.ok(1e-4), result.per_tensor
    assert total_loss(pred, future, categories).best_modes.tolist() == best.tolist()
