import json
from pathlib import Path
from typing import Iterable, List, Union

import numpy as np
from hgat_forecast.exceptions import (
    ScenarioInvariantError,
    ScenarioParseError,
    SchemaVersionError,
)
from hgat_forecast.scenario.types import (
    AgentTrack,
    LanePolyline,
    Scenario,
    TrackCategory,
)
from hgat_forecast.schemas.scenario import (
    SCENARIO_SCHEMA_VERSION,
    LaneDocument,
    ScenarioDocument,
    StateDocument,
    TrackDocument,
)
from pydantic import ValidationError

PathLike = Union[str, Path]


def scenario_from_document(doc: ScenarioDocument) -> Scenario:
    lanes = [
        LanePolyline(
            id=lane.id,
            centerline=np.asarray(lane.centerline, dtype=float).reshape(-1, 2),
            left_dist=np.asarray(lane.left_dist, dtype=float),
            right_dist=np.asarray(lane.right_dist, dtype=float),
            left_mark=lane.left_mark,
            right_mark=lane.right_mark,
            predecessors=list(lane.predecessors),
            successors=list(lane.successors),
            left_neighbor=lane.left_neighbor,
            right_neighbor=lane.right_neighbor,
            is_intersection=lane.is_intersection,
        )
        for lane in doc.lanes
    ]
    tracks = []
    for track in doc.tracks:
        states = track.states
        tracks.append(
            AgentTrack(
                id=track.id,
                agent_type=track.type,
                category=track.category,
                positions=np.array([[s.x, s.y] for s in states], dtype=float).reshape(-1, 2),
                velocities=np.array([[s.vx, s.vy] for s in states], dtype=float).reshape(-1, 2),
                headings=np.array([s.heading for s in states], dtype=float),
                observed=np.array([s.observed for s in states], dtype=bool),
            )
        )
    scenario = Scenario(id=doc.id, lanes=lanes, tracks=tracks, dt=doc.dt_s)
    validate_scenario(scenario)
    return scenario


def scenario_to_document(scenario: Scenario) -> ScenarioDocument:
    lanes = [
        LaneDocument(
            id=lane.id,
            centerline=[tuple(map(float, p)) for p in lane.centerline],
            left_dist=[float(d) for d in lane.left_dist],
            right_dist=[float(d) for d in lane.right_dist],
            left_mark=lane.left_mark,
            right_mark=lane.right_mark,
            predecessors=list(lane.predecessors),
            successors=list(lane.successors),
            left_neighbor=lane.left_neighbor,
            right_neighbor=lane.right_neighbor,
            is_intersection=lane.is_intersection,
        )
        for lane in scenario.lanes
    ]
    tracks = [
        TrackDocument(
            id=t.id,
            type=t.agent_type,
            category=t.category,
            states=[
                StateDocument(
                    x=float(p[0]),
                    y=float(p[1]),
                    vx=float(v[0]),
                    vy=float(v[1]),
                    heading=float(h),
                    observed=bool(o),
                )
                for p, v, h, o in zip(t.positions, t.velocities, t.headings, t.observed)
            ],
        )
        for t in scenario.tracks
    ]
    return ScenarioDocument(id=scenario.id, dt_s=scenario.dt, lanes=lanes, tracks=tracks)


def validate_scenario(scenario: Scenario) -> None:
    """Raise ScenarioInvariantError naming the first violated invariant."""

    def fail(message: str):
        raise ScenarioInvariantError(f"scenario '{scenario.id}': {message}")

    lane_ids = [lane.id for lane in scenario.lanes]
    if len(set(lane_ids)) != len(lane_ids):
        fail("duplicate lane ids")
    known = set(lane_ids)
    for lane in scenario.lanes:
        points = lane.centerline
        if points.shape[0] < 2:
            fail(f"lane '{lane.id}' has fewer than 2 centerline points")
        if np.any(np.linalg.norm(np.diff(points, axis=0), axis=1) == 0):
            fail(f"lane '{lane.id}' repeats a centerline point")
        if lane.left_dist.shape[0] != points.shape[0] or lane.right_dist.shape[0] != points.shape[0]:
            fail(f"lane '{lane.id}' needs one marking distance per centerline point")
        refs = lane.predecessors + lane.successors
        refs += [r for r in (lane.left_neighbor, lane.right_neighbor) if r is not None]
        missing = [r for r in refs if r not in known]
        if missing:
            fail(f"lane '{lane.id}' references unknown lanes {missing}")

    if not scenario.tracks:
        fail("no tracks")
    track_ids = [t.id for t in scenario.tracks]
    if len(set(track_ids)) != len(track_ids):
        fail("duplicate track ids")
    focal = [t for t in scenario.tracks if t.category == TrackCategory.focal]
    if len(focal) != 1:
        fail(f"expected exactly one focal track, found {len(focal)}")

    total = focal[0].num_steps
    t_obs = focal[0].num_observed
    if t_obs < 1 or t_obs >= total:
        fail("the focal track needs both observed and future steps")
    expected_observed = np.arange(total) < t_obs
    for track in scenario.tracks:
        if track.num_steps != total:
            fail(f"track '{track.id}' has {track.num_steps} states, expected {total}")
        if not np.array_equal(track.observed, expected_observed):
            fail(f"track '{track.id}' must be observed exactly for its first {t_obs} states")
        for name in ("positions", "velocities", "headings"):
            if not np.all(np.isfinite(getattr(track, name))):
                fail(f"track '{track.id}' has non-finite {name}")


def load_scenario(path: PathLike) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ScenarioParseError(f"cannot read scenario {path}: {e}") from e
    if not isinstance(raw, dict):
        raise ScenarioParseError(f"{path}: top level must be an object")
    version = raw.get("schema_version")
    if version != SCENARIO_SCHEMA_VERSION:
        raise SchemaVersionError(version, SCENARIO_SCHEMA_VERSION)
    try:
        doc = ScenarioDocument.parse_obj(raw)
    except ValidationError as e:
        raise ScenarioParseError(f"{path}: {e}") from e
    return scenario_from_document(doc)


def save_scenario(scenario: Scenario, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(scenario_to_document(scenario).json(indent=1), encoding="utf-8")
    return path


def save_dataset(scenarios: Iterable[Scenario], directory: PathLike) -> List[Path]:
    """One ``<index>-<id>.json`` file per scenario."""
    directory = Path(directory)
    return [
        save_scenario(scenario, directory / f"{i:05d}-{scenario.id}.json")
        for i, scenario in enumerate(scenarios)
    ]


def load_dataset(directory: PathLike) -> List[Scenario]:
    """Every ``*.json`` scenario of ``directory`` in file name order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ScenarioParseError(f"dataset directory {directory} does not exist")
    paths = sorted(directory.glob("*.json"))
    if not paths:
        raise ScenarioParseError(f"no scenario files in {directory}")
    return [load_scenario(path) for path in paths]
