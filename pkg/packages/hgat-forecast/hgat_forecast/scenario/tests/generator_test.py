import numpy as np
import pytest
from hgat_forecast.config import load_config
from hgat_forecast.exceptions import LayoutError
from hgat_forecast.scenario.generator import (
    ROAD_KINDS,
    generate_blocking_scene,
    generate_dataset,
    generate_synthetic,
)
from hgat_forecast.scenario.io import scenario_to_document, validate_scenario
from hgat_forecast.scenario.layout import make_layout, timestep_layout
from hgat_forecast.scenario.types import AgentType, TrackCategory

FAST = make_layout(2.0)


def _point_segment_distance(point, centerline):
    a, b = centerline[:-1], centerline[1:]
    ab = b - a
    t = np.clip(((point - a) * ab).sum(axis=1) / (ab * ab).sum(axis=1), 0.0, 1.0)
    closest = a + t[:, None] * ab
    return np.linalg.norm(closest - point, axis=1).min()


def _lateral_distance(point, lanes):
    return min(_point_segment_distance(point, lane.centerline) for lane in lanes)


def _circumradius(p, q, r):
    a, b, c = np.linalg.norm(q - r), np.linalg.norm(p - r), np.linalg.norm(p - q)
    area = abs((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])) / 2.0
    return a * b * c / (4.0 * area)


def test_timestep_layout_defaults_and_fast_variant():
    assert tuple(timestep_layout(load_config())) == (50, 60, 10.0)
    assert tuple(timestep_layout(load_config(SCENARIO_RATE_HZ=2.0))) == (10, 12, 2.0)
    with pytest.raises(LayoutError):
        timestep_layout(load_config(SCENARIO_RATE_HZ=0.0))


@pytest.mark.parametrize("kind", ROAD_KINDS)
def test_generation_is_deterministic(kind):
    a = generate_synthetic(kind, 5, seed=7, layout=FAST)
    b = generate_synthetic(kind, 5, seed=7, layout=FAST)
    assert scenario_to_document(a) == scenario_to_document(b)
    c = generate_synthetic(kind, 5, seed=8, layout=FAST)
    assert scenario_to_document(a) != scenario_to_document(c)


@pytest.mark.parametrize("kind", ROAD_KINDS)
@pytest.mark.parametrize("seed", range(5))
def test_generated_scenarios_are_valid(kind, seed):
    scenario = generate_synthetic(kind, 6, seed=seed, layout=FAST)
    validate_scenario(scenario)
    assert len(scenario.tracks) == 6
    assert scenario.focal.agent_type == AgentType.vehicle
    assert scenario.num_observed == FAST.t_obs
    assert scenario.num_future == FAST.t_fut
    for track in scenario.tracks:
        speeds = np.linalg.norm(track.velocities, axis=1)
        assert np.all(speeds >= 0.0)
        assert np.all(speeds < 30.0)
        predicted = track.positions[:-1] + track.velocities[:-1] * scenario.dt
        assert np.abs(predicted - track.positions[1:]).max() <= 0.1


@pytest.mark.parametrize("seed", range(8))
def test_straight_focal_future_follows_centerline(seed):
    scenario = generate_synthetic("straight", 1, seed=seed)
    focal = scenario.focal
    for point in focal.positions[~focal.observed]:
        assert _lateral_distance(point, scenario.lanes) <= 0.1


def test_curve_heading_change_matches_arc_geometry():
    checked = 0
    for seed in range(10):
        scenario = generate_synthetic("curve", 1, seed=seed)
        focal = scenario.focal
        future = focal.positions[focal.num_observed - 1 :]
        arc = np.linalg.norm(np.diff(future, axis=0), axis=1).sum()
        if arc < 10.0:
            continue
        radius = _circumradius(future[0], future[len(future) // 2], future[-1])
        headings = np.unwrap(focal.headings[focal.num_observed - 1 :])
        turned = abs(headings[-1] - headings[0])
        assert turned == pytest.approx(arc / radius, rel=0.05)
        checked += 1
    assert checked >= 3


def test_track_categories_and_types_are_drawn_from_the_mix():
    scenario = generate_synthetic("straight", 40, seed=11, layout=FAST)
    categories = {t.category for t in scenario.tracks[1:]}
    assert TrackCategory.focal not in categories
    assert len(categories) >= 2
    assert len({t.agent_type for t in scenario.tracks}) >= 3


def test_dataset_round_robin_and_seeding():
    dataset = generate_dataset(6, "all", n_agents=3, seed=1, layout=FAST)
    kinds = [s.id.split("-")[0] for s in dataset]
    assert kinds == ["straight", "curve", "intersection"] * 2
    again = generate_dataset(6, "all", n_agents=3, seed=1, layout=FAST)
    assert [scenario_to_document(s) for s in dataset] == [
        scenario_to_document(s) for s in again
    ]
    assert len({s.id for s in dataset}) == 6


def test_blocking_scene_layout():
    scenario = generate_blocking_scene(seed=0, layout=FAST)
    focal = scenario.focal
    blocker, behind = scenario.tracks[1], scenario.tracks[2]
    heading = focal.headings[focal.num_observed - 1]
    forward = np.array([np.cos(heading), np.sin(heading)])
    last = focal.positions[focal.num_observed - 1]
    assert (blocker.positions[0] - last) @ forward > 0
    assert (behind.positions[0] - last) @ forward < 0
    assert np.linalg.norm(focal.velocities[-1]) < 0.5


def test_rejects_unknown_kind_and_empty_scene():
    with pytest.raises(ValueError):
        generate_synthetic("roundabout", 1, seed=0)
    with pytest.raises(ValueError):
        generate_synthetic("straight", 0, seed=0)
