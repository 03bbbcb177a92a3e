import numpy as np
import pytest
from hgat_forecast.exceptions import MetricsError
from hgat_forecast.metrics import evaluate_model
from hgat_forecast.model import HgatForecaster


def test_evaluates_focal_agents(helpers):
    model = HgatForecaster(helpers.small_options(), seed=0)
    scenes = [helpers.straight_scene(n_agents=n) for n in (1, 2, 3)]
    report = evaluate_model(model, scenes, ks=(1, 3))
    assert report.ks == [1, 3]
    assert report[1].count == 3
    # untrained heads predict a standstill: the focal agent moves 4 m/s for 1.5 s
    np.testing.assert_allclose(report.agents[1].min_fde, 6.0, atol=1e-9)
    assert report[1].miss_rate == 1.0

    threaded = evaluate_model(model, scenes, ks=(1, 3), threads=2)
    assert threaded[3].brier_min_fde == report[3].brier_min_fde


def test_rejects_k_above_the_mode_count(helpers):
    model = HgatForecaster(helpers.small_options(), seed=0)
    with pytest.raises(MetricsError, match="K=6"):
        evaluate_model(model, [helpers.straight_scene()], ks=(1, 6))
