"""Deterministic synthetic scenarios.

Roads come from three parametric templates (parallel straight lanes,
concentric constant-curvature arcs, a four-way intersection with
connector lanes). Agents drive along lane routes with simple kinematic
profiles; pedestrians cross the road on straight lines. Everything is a
pure function of ``(kind, n_agents, seed)`` and the timestep layout.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from hgat_common.logger import logger
from hgat_forecast.scenario.layout import TimestepLayout, make_layout
from hgat_forecast.scenario.types import (
    AgentTrack,
    AgentType,
    LanePolyline,
    MarkType,
    Scenario,
    TrackCategory,
    transform_scenario,
    wrap_angle,
)

ROAD_KINDS = ("straight", "curve", "intersection")
LANE_WIDTH_M = 3.5
MAX_SPEED_MPS = 16.0

_KIND_CODES = {kind: i for i, kind in enumerate(ROAD_KINDS)}
_SPEED_RANGES = {
    AgentType.vehicle: (4.0, 15.0),
    AgentType.bus: (3.0, 11.0),
    AgentType.cyclist: (2.0, 6.0),
    AgentType.motorcyclist: (4.0, 16.0),
    AgentType.pedestrian: (1.0, 1.8),
}
_OTHER_TYPES = [
    AgentType.vehicle,
    AgentType.pedestrian,
    AgentType.bus,
    AgentType.cyclist,
    AgentType.motorcyclist,
]
_OTHER_TYPE_P = [0.55, 0.15, 0.1, 0.1, 0.1]
_OTHER_CATEGORIES = [TrackCategory.scored, TrackCategory.unscored, TrackCategory.fragment]
_OTHER_CATEGORY_P = [0.4, 0.4, 0.2]


@dataclass
class Route:
    """A drivable chain of lanes flattened into one polyline."""

    lane_ids: List[str]
    points: np.ndarray
    max_speed: float = MAX_SPEED_MPS
    # signed lateral shifts (left positive) that land on a neighbor lane
    lane_change_offsets: List[float] = field(default_factory=list)

    def __post_init__(self):
        steps = np.linalg.norm(np.diff(self.points, axis=0), axis=1)
        self.arc = np.concatenate([[0.0], np.cumsum(steps)])
        tangent = np.gradient(self.points, axis=0)
        self.headings = np.unwrap(np.arctan2(tangent[:, 1], tangent[:, 0]))

    @property
    def length(self) -> float:
        return float(self.arc[-1])

    def at(self, s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        s = np.clip(s, 0.0, self.length)
        x = np.interp(s, self.arc, self.points[:, 0])
        y = np.interp(s, self.arc, self.points[:, 1])
        return np.stack([x, y], axis=-1), np.interp(s, self.arc, self.headings)


@dataclass
class Road:
    lanes: List[LanePolyline]
    routes: List[Route]


def _lane(lane_id, points, left_mark, right_mark, **kwargs) -> LanePolyline:
    half = np.full(len(points), LANE_WIDTH_M / 2.0)
    return LanePolyline(
        id=lane_id,
        centerline=np.asarray(points, dtype=float),
        left_dist=half.copy(),
        right_dist=half.copy(),
        left_mark=left_mark,
        right_mark=right_mark,
        **kwargs,
    )


def _route(lanes_by_id, lane_ids, **kwargs) -> Route:
    parts = []
    for lane_id in lane_ids:
        points = lanes_by_id[lane_id].centerline
        if parts and np.allclose(parts[-1][-1], points[0]):
            points = points[1:]
        parts.append(points)
    return Route(lane_ids=list(lane_ids), points=np.concatenate(parts), **kwargs)


def _chained_lanes(
    prefix: str, n_lanes: int, segments: Sequence[Sequence[np.ndarray]]
) -> List[LanePolyline]:
    """Lanes from ``segments[i][j]`` = points of lane i (0 is rightmost),
    segment j; wires predecessor/successor and left/right neighbors."""
    lanes = []
    n_segments = len(segments[0])
    for i in range(n_lanes):
        for j in range(n_segments):
            lanes.append(
                _lane(
                    f"{prefix}{i}_{j}",
                    segments[i][j],
                    MarkType.solid if i == n_lanes - 1 else MarkType.dashed,
                    MarkType.solid if i == 0 else MarkType.dashed,
                    predecessors=[f"{prefix}{i}_{j - 1}"] if j > 0 else [],
                    successors=[f"{prefix}{i}_{j + 1}"] if j < n_segments - 1 else [],
                    left_neighbor=f"{prefix}{i + 1}_{j}" if i < n_lanes - 1 else None,
                    right_neighbor=f"{prefix}{i - 1}_{j}" if i > 0 else None,
                )
            )
    return lanes


def _parallel_routes(prefix, n_lanes, n_segments, lanes, max_speed) -> List[Route]:
    by_id = {lane.id: lane for lane in lanes}
    routes = []
    for i in range(n_lanes):
        offsets = []
        if i < n_lanes - 1:
            offsets.append(LANE_WIDTH_M)
        if i > 0:
            offsets.append(-LANE_WIDTH_M)
        ids = [f"{prefix}{i}_{j}" for j in range(n_segments)]
        routes.append(_route(by_id, ids, max_speed=max_speed, lane_change_offsets=offsets))
    return routes


def straight_road(rng: np.random.Generator) -> Road:
    n_lanes = int(rng.integers(2, 4))
    n_segments, segment_length = 7, 40.0
    segments = []
    for i in range(n_lanes):
        y = i * LANE_WIDTH_M
        lane_segments = []
        for j in range(n_segments):
            x = np.linspace(j * segment_length, (j + 1) * segment_length, 9)
            lane_segments.append(np.stack([x, np.full_like(x, y)], axis=-1))
        segments.append(lane_segments)
    lanes = _chained_lanes("s", n_lanes, segments)
    return Road(lanes, _parallel_routes("s", n_lanes, n_segments, lanes, MAX_SPEED_MPS))


def curve_road(rng: np.random.Generator) -> Road:
    """Two concentric arcs; lane 0 is the right lane of the turn."""
    n_lanes = 2
    inner = rng.uniform(20.0, 80.0)
    span = rng.uniform(0.9, 1.5) * np.pi
    turn = 1.0 if rng.random() < 0.5 else -1.0  # +1 counterclockwise (left turn)
    start_angle = -np.pi / 2 if turn > 0 else np.pi / 2
    n_segments = max(1, int(np.ceil(inner * span / 40.0)))
    segments = []
    for i in range(n_lanes):
        # the right lane of a left turn is the outer one
        radius = inner + (n_lanes - 1 - i) * LANE_WIDTH_M if turn > 0 else inner + i * LANE_WIDTH_M
        lane_segments = []
        for j in range(n_segments):
            a0 = start_angle + turn * span * j / n_segments
            a1 = start_angle + turn * span * (j + 1) / n_segments
            n_points = int(np.ceil(radius * abs(a1 - a0) / 0.5)) + 1
            angles = np.linspace(a0, a1, n_points)
            lane_segments.append(radius * np.stack([np.cos(angles), np.sin(angles)], axis=-1))
        segments.append(lane_segments)
    lanes = _chained_lanes("c", n_lanes, segments)
    max_speed = min(MAX_SPEED_MPS, float(np.sqrt(2.5 * inner)))
    return Road(lanes, _parallel_routes("c", n_lanes, n_segments, lanes, max_speed))


def _bezier(p0, control, p2, n_points=40) -> np.ndarray:
    tau = np.linspace(0.0, 1.0, n_points)[:, None]
    return (1 - tau) ** 2 * p0 + 2 * (1 - tau) * tau * control + tau**2 * p2


def _control_point(p0, d0, p2, d2) -> np.ndarray:
    """Intersection of the incoming and outgoing travel lines (midpoint
    when they are parallel)."""
    cross = d0[0] * d2[1] - d0[1] * d2[0]
    if abs(cross) < 1e-9:
        return (p0 + p2) / 2.0
    diff = p2 - p0
    t = (diff[0] * d2[1] - diff[1] * d2[0]) / cross
    return p0 + t * d0


def intersection_road(rng: np.random.Generator) -> Road:
    half, arm = 8.0, 60.0
    lanes = []
    ends = {}
    for k in range(4):
        phi = k * np.pi / 2 + rng.uniform(-0.1, 0.1)
        u = np.array([np.cos(phi), np.sin(phi)])
        right_of_out = np.array([u[1], -u[0]])
        inbound = np.linspace(u * (half + arm), u * half, 25) - right_of_out * LANE_WIDTH_M / 2
        outbound = np.linspace(u * half, u * (half + arm), 25) + right_of_out * LANE_WIDTH_M / 2
        lanes.append(_lane(f"in{k}", inbound, MarkType.solid, MarkType.solid))
        lanes.append(_lane(f"out{k}", outbound, MarkType.solid, MarkType.solid))
        ends[k] = (inbound[-1], -u, outbound[0], u)
    by_id = {lane.id: lane for lane in lanes}
    routes = []
    for k in range(4):
        p0, d0 = ends[k][0], ends[k][1]
        for m in range(4):
            if m == k:
                continue
            p2, d2 = ends[m][2], ends[m][3]
            connector = _lane(
                f"c{k}{m}",
                _bezier(p0, _control_point(p0, d0, p2, d2), p2),
                MarkType.none,
                MarkType.none,
                predecessors=[f"in{k}"],
                successors=[f"out{m}"],
                is_intersection=True,
            )
            lanes.append(connector)
            by_id[connector.id] = connector
            by_id[f"in{k}"].successors.append(connector.id)
            by_id[f"out{m}"].predecessors.append(connector.id)
            routes.append(_route(by_id, [f"in{k}", connector.id, f"out{m}"], max_speed=11.0))
    return Road(lanes, routes)


_ROAD_BUILDERS = {
    "straight": straight_road,
    "curve": curve_road,
    "intersection": intersection_road,
}


def speed_profile(
    profile: str, v0: float, times: np.ndarray, rng: np.random.Generator, v_max: float
) -> np.ndarray:
    if profile == "constant":
        return np.full_like(times, v0)
    if profile == "accelerate":
        return np.minimum(v0 + rng.uniform(0.5, 2.0) * times, v_max)
    if profile == "decelerate":
        brake_at = rng.uniform(0.0, times[-1] / 2)
        decel = rng.uniform(1.0, 3.0)
        return np.where(times < brake_at, v0, np.maximum(v0 - decel * (times - brake_at), 0.0))
    raise ValueError(f"unknown speed profile '{profile}'")


def _travel(speeds: np.ndarray, dt: float) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum((speeds[:-1] + speeds[1:]) * dt / 2.0)])


def _forward_velocity(positions: np.ndarray, dt: float) -> np.ndarray:
    velocity = np.empty_like(positions)
    velocity[:-1] = np.diff(positions, axis=0) / dt
    velocity[-1] = velocity[-2] if len(positions) > 1 else 0.0
    return velocity


def _track(track_id, agent_type, category, positions, headings, layout) -> AgentTrack:
    observed = np.arange(layout.total) < layout.t_obs
    return AgentTrack(
        id=track_id,
        agent_type=agent_type,
        category=category,
        positions=positions,
        velocities=_forward_velocity(positions, layout.dt),
        headings=wrap_angle(headings),
        observed=observed,
    )


def _drive(
    route: Route,
    agent_type: AgentType,
    profile: str,
    times: np.ndarray,
    dt: float,
    rng: np.random.Generator,
    lane_change: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    low, high = _SPEED_RANGES[agent_type]
    v_max = min(high, route.max_speed)
    v0 = rng.uniform(min(low, v_max), v_max)
    speeds = speed_profile(profile, v0, times, rng, v_max)
    travel = _travel(speeds, dt)
    room = route.length - 4.0
    if travel[-1] > room:
        speeds *= room / travel[-1] * 0.95
        travel = _travel(speeds, dt)
    s0 = rng.uniform(2.0, max(2.0, route.length - 2.0 - travel[-1]))
    positions, headings = route.at(s0 + travel)
    if lane_change is not None:
        duration = 4.0
        start = rng.uniform(0.0, max(times[-1] - duration, 0.0))
        phase = np.clip((times - start) / duration, 0.0, 1.0)
        offset = lane_change * (3 * phase**2 - 2 * phase**3)
        rate = lane_change * 6 * phase * (1 - phase) / duration
        normal = np.stack([-np.sin(headings), np.cos(headings)], axis=-1)
        positions = positions + offset[:, None] * normal
        headings = headings + np.arctan2(rate, np.maximum(speeds, 1e-3))
    return positions, headings


def _cross(
    route: Route, times: np.ndarray, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """Pedestrian walking straight across the road near a route point."""
    s = rng.uniform(0.2, 0.8) * route.length
    (anchor,), (lane_heading,) = route.at(np.array([s]))
    side = 1.0 if rng.random() < 0.5 else -1.0
    direction = side * np.array([-np.sin(lane_heading), np.cos(lane_heading)])
    speed = rng.uniform(*_SPEED_RANGES[AgentType.pedestrian])
    start = anchor - direction * rng.uniform(4.0, 8.0)
    positions = start + np.outer(times * speed, direction)
    headings = np.full_like(times, np.arctan2(direction[1], direction[0]))
    return positions, headings


def generate_synthetic(
    kind: str,
    n_agents: int,
    seed: int,
    layout: Optional[TimestepLayout] = None,
) -> Scenario:
    """One scenario of the given road ``kind`` with ``n_agents`` tracks
    (the first one is the focal vehicle)."""
    if kind not in _ROAD_BUILDERS:
        raise ValueError(f"unknown scenario kind '{kind}', use one of {ROAD_KINDS}")
    if n_agents < 1:
        raise ValueError("a scenario needs at least one agent")
    layout = layout or make_layout(10.0)
    rng = np.random.default_rng([int(seed), _KIND_CODES[kind], int(n_agents)])
    road = _ROAD_BUILDERS[kind](rng)
    times = np.arange(layout.total) * layout.dt

    tracks = []
    route = road.routes[int(rng.integers(len(road.routes)))]
    profile = str(rng.choice(["constant", "accelerate", "decelerate"]))
    positions, headings = _drive(route, AgentType.vehicle, profile, times, layout.dt, rng)
    tracks.append(
        _track("agent_0", AgentType.vehicle, TrackCategory.focal, positions, headings, layout)
    )

    for i in range(1, n_agents):
        agent_type = AgentType(rng.choice([t.value for t in _OTHER_TYPES], p=_OTHER_TYPE_P))
        category = TrackCategory(
            rng.choice([c.value for c in _OTHER_CATEGORIES], p=_OTHER_CATEGORY_P)
        )
        route = road.routes[int(rng.integers(len(road.routes)))]
        if agent_type == AgentType.pedestrian:
            positions, headings = _cross(route, times, rng)
        else:
            lane_change = None
            if route.lane_change_offsets and rng.random() < 0.3:
                lane_change = float(rng.choice(route.lane_change_offsets))
                profile = "constant"
            else:
                profile = str(rng.choice(["constant", "accelerate", "decelerate"]))
            positions, headings = _drive(
                route, agent_type, profile, times, layout.dt, rng, lane_change
            )
        tracks.append(_track(f"agent_{i}", agent_type, category, positions, headings, layout))

    scenario = Scenario(
        id=f"{kind}-{seed}-{n_agents}", lanes=road.lanes, tracks=tracks, dt=layout.dt
    )
    rotation = rng.uniform(-np.pi, np.pi)
    translation = rng.uniform(-500.0, 500.0, size=2)
    return transform_scenario(scenario, rotation, translation)


def generate_blocking_scene(seed: int, layout: Optional[TimestepLayout] = None) -> Scenario:
    """Straight road with the focal vehicle braking for a pedestrian
    standing in its lane ahead, and a second pedestrian far behind."""
    layout = layout or make_layout(10.0)
    rng = np.random.default_rng([int(seed), 99])
    road = straight_road(rng)
    route = road.routes[0]
    times = np.arange(layout.total) * layout.dt
    v0 = rng.uniform(8.0, 12.0)
    decel = v0 / 7.0  # standstill after 7 s
    stop_at = 60.0 + v0**2 / (2.0 * decel) + 3.0
    speeds = np.maximum(v0 - decel * times, 0.0)
    positions, headings = route.at(60.0 + _travel(speeds, layout.dt))
    tracks = [
        _track("agent_0", AgentType.vehicle, TrackCategory.focal, positions, headings, layout)
    ]
    for track_id, s in (("agent_1", stop_at), ("agent_2", 5.0)):
        (point,), (lane_heading,) = route.at(np.array([s]))
        standing = np.tile(point, (layout.total, 1))
        facing = np.full(layout.total, lane_heading + np.pi / 2)
        tracks.append(
            _track(track_id, AgentType.pedestrian, TrackCategory.scored, standing, facing, layout)
        )
    return Scenario(id=f"blocking-{seed}", lanes=road.lanes, tracks=tracks, dt=layout.dt)


def scenario_seeds(seed: int, count: int) -> List[int]:
    return [int(s) for s in np.random.SeedSequence(int(seed)).generate_state(count)]


def generate_dataset(
    count: int,
    kind: str = "all",
    n_agents: int = 4,
    seed: int = 0,
    layout: Optional[TimestepLayout] = None,
) -> List[Scenario]:
    """``count`` scenarios; ``kind='all'`` cycles through the road kinds."""
    kinds = ROAD_KINDS if kind == "all" else (kind,)
    scenarios = [
        generate_synthetic(kinds[i % len(kinds)], n_agents, child_seed, layout)
        for i, child_seed in enumerate(scenario_seeds(seed, count))
    ]
    logger.debug("generated {count} '{kind}' scenarios", count=count, kind=kind)
    return scenarios
