import json

import numpy as np
import pytest
from hgat_forecast.exceptions import (
    ScenarioInvariantError,
    ScenarioParseError,
    SchemaVersionError,
)
from hgat_forecast.scenario.generator import generate_synthetic
from hgat_forecast.scenario.io import (
    load_dataset,
    load_scenario,
    save_dataset,
    save_scenario,
    scenario_to_document,
    validate_scenario,
)
from hgat_forecast.scenario.layout import make_layout
from hgat_forecast.scenario.types import TrackCategory

MINIMAL = {
    "schema_version": "1.0",
    "id": "minimal",
    "dt_s": 0.5,
    "lanes": [
        {
            "id": "l0",
            "centerline": [[0, 0], [10, 0]],
            "left_dist": [1.75, 1.75],
            "right_dist": [1.75, 1.75],
            "left_mark": "dashed",
            "right_mark": "solid",
        }
    ],
    "tracks": [
        {
            "id": "ego",
            "type": "vehicle",
            "category": "focal",
            "states": [
                {"x": float(i), "y": 0.0, "vx": 2.0, "vy": 0.0, "heading": 0.0, "observed": i < 2}
                for i in range(4)
            ],
        }
    ],
}


def _write(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_load_minimal_scenario(tmp_path):
    scenario = load_scenario(_write(tmp_path, MINIMAL))
    assert len(scenario.lanes) == 1
    assert len(scenario.tracks) == 1
    assert scenario.focal.id == "ego"
    assert scenario.num_observed == 2
    assert scenario.num_future == 2
    np.testing.assert_array_equal(scenario.lanes[0].centerline, [[0, 0], [10, 0]])


def test_two_focal_tracks_violate_invariant(tmp_path):
    doc = json.loads(json.dumps(MINIMAL))
    second = json.loads(json.dumps(doc["tracks"][0]))
    second["id"] = "other"
    doc["tracks"].append(second)
    with pytest.raises(ScenarioInvariantError, match="exactly one focal"):
        load_scenario(_write(tmp_path, doc))


def test_errors_are_distinct(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ScenarioParseError):
        load_scenario(broken)

    doc = dict(MINIMAL, schema_version="0.9")
    with pytest.raises(SchemaVersionError):
        load_scenario(_write(tmp_path, doc))

    doc = dict(MINIMAL, dt_s=-1)
    with pytest.raises(ScenarioParseError):
        load_scenario(_write(tmp_path, doc))


def test_unresolved_lane_reference(tmp_path):
    doc = json.loads(json.dumps(MINIMAL))
    doc["lanes"][0]["successors"] = ["missing"]
    with pytest.raises(ScenarioInvariantError, match="unknown lanes"):
        load_scenario(_write(tmp_path, doc))


def test_repeated_centerline_point(tmp_path):
    doc = json.loads(json.dumps(MINIMAL))
    doc["lanes"][0]["centerline"] = [[0, 0], [0, 0], [5, 0]]
    doc["lanes"][0]["left_dist"] = [1.0] * 3
    doc["lanes"][0]["right_dist"] = [1.0] * 3
    with pytest.raises(ScenarioInvariantError, match="repeats"):
        load_scenario(_write(tmp_path, doc))


def test_observed_flags_must_prefix(helpers):
    scenario = helpers.straight_scene(n_agents=2)
    scenario.tracks[1].observed = scenario.tracks[1].observed[::-1].copy()
    with pytest.raises(ScenarioInvariantError, match="observed exactly"):
        validate_scenario(scenario)


def test_round_trip_is_structural_identity(tmp_path):
    scenario = generate_synthetic("intersection", 4, seed=3, layout=make_layout(2.0))
    first = save_scenario(scenario, tmp_path / "a.json")
    loaded = load_scenario(first)
    second = save_scenario(loaded, tmp_path / "b.json")
    assert first.read_bytes() == second.read_bytes()
    assert scenario_to_document(loaded) == scenario_to_document(scenario)
    assert loaded.focal.category == TrackCategory.focal


def test_dataset_keeps_the_order(tmp_path):
    layout = make_layout(2.0)
    scenarios = [generate_synthetic(kind, 2, seed=i, layout=layout) for i, kind in enumerate(("curve", "straight", "curve"))]
    paths = save_dataset(scenarios, tmp_path / "data")
    assert [p.name.split("-")[0] for p in paths] == ["00000", "00001", "00002"]
    assert [s.id for s in load_dataset(tmp_path / "data")] == [s.id for s in scenarios]


def test_empty_dataset_directory(tmp_path):
    with pytest.raises(ScenarioParseError, match="no scenario files"):
        load_dataset(tmp_path)
    with pytest.raises(ScenarioParseError, match="does not exist"):
        load_dataset(tmp_path / "missing")
