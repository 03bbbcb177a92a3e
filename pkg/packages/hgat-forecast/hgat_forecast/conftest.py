import os
from typing import List, Optional, Sequence

import numpy as np
import pytest
from hgat_forecast.numerics.tensor import default_dtype
from hgat_forecast.scenario.types import (
    AgentTrack,
    AgentType,
    LanePolyline,
    MarkType,
    Scenario,
    TrackCategory,
)
from hgat_forecast.schemas.options import GraphOptions, ModelOptions


class Helpers:
    @staticmethod
    def lane(
        lane_id: str,
        points: Sequence[Sequence[float]],
        **kwargs,
    ) -> LanePolyline:
        points = np.asarray(points, dtype=float)
        kwargs.setdefault("left_mark", MarkType.dashed)
        kwargs.setdefault("right_mark", MarkType.solid)
        return LanePolyline(
            id=lane_id,
            centerline=points,
            left_dist=np.full(len(points), 1.75),
            right_dist=np.full(len(points), 1.75),
            **kwargs,
        )

    @staticmethod
    def straight_lane(lane_id: str, start, end, n_points: int = 2, **kwargs) -> LanePolyline:
        points = np.linspace(np.asarray(start, float), np.asarray(end, float), n_points)
        return Helpers.lane(lane_id, points, **kwargs)

    @staticmethod
    def track(
        track_id: str,
        positions,
        t_obs: int,
        dt: float = 0.5,
        agent_type: AgentType = AgentType.vehicle,
        category: TrackCategory = TrackCategory.scored,
        headings: Optional[Sequence[float]] = None,
    ) -> AgentTrack:
        positions = np.asarray(positions, dtype=float)
        velocities = np.zeros_like(positions)
        if len(positions) > 1:
            velocities[:-1] = np.diff(positions, axis=0) / dt
            velocities[-1] = velocities[-2]
        if headings is None:
            headings = np.arctan2(velocities[:, 1], velocities[:, 0])
        return AgentTrack(
            id=track_id,
            agent_type=agent_type,
            category=category,
            positions=positions,
            velocities=velocities,
            headings=np.asarray(headings, dtype=float),
            observed=np.arange(len(positions)) < t_obs,
        )

    @staticmethod
    def line_positions(start, velocity, steps: int, dt: float = 0.5) -> np.ndarray:
        t = np.arange(steps)[:, None] * dt
        return np.asarray(start, float) + t * np.asarray(velocity, float)

    @staticmethod
    def straight_scene(
        n_agents: int = 2,
        t_obs: int = 4,
        t_fut: int = 3,
        dt: float = 0.5,
        lanes: bool = True,
    ) -> Scenario:
        """Agents driving east on a 40 m two-segment lane, 3 m apart."""
        lane_list: List[LanePolyline] = []
        if lanes:
            lane_list = [
                Helpers.straight_lane("a", (0.0, 0.0), (20.0, 0.0), 5, successors=["b"]),
                Helpers.straight_lane("b", (20.0, 0.0), (40.0, 0.0), 5, predecessors=["a"]),
            ]
        tracks = []
        for i in range(n_agents):
            tracks.append(
                Helpers.track(
                    f"agent_{i}",
                    Helpers.line_positions((3.0 * i + 2.0, 0.0), (4.0, 0.0), t_obs + t_fut, dt),
                    t_obs,
                    dt,
                    category=TrackCategory.focal if i == 0 else TrackCategory.scored,
                )
            )
        return Scenario(id="straight-scene", lanes=lane_list, tracks=tracks, dt=dt)

    @staticmethod
    def small_options(**overrides) -> ModelOptions:
        values = dict(
            t_obs=4,
            t_fut=3,
            rate_hz=2.0,
            dim=8,
            heads=2,
            map_layers=1,
            scene_layers=1,
            modes=3,
            refine_iterations=1,
            refine_neighbors=5,
            refine_heads=2,
            graph=GraphOptions(),
        )
        values.update(overrides)
        return ModelOptions(**values)


@pytest.fixture
def helpers() -> Helpers:
    return Helpers()


@pytest.fixture(autouse=True)
def float64_numerics():
    with default_dtype(np.float64):
        yield


def pytest_collection_modifyitems(config, items):
    if os.environ.get("HGAT_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="training run, set HGAT_RUN_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
