import numpy as np
from hgat_forecast.graph.agents import (
    STEP_FEATURES,
    build_step_lane_edges,
    build_step_nodes,
    build_step_step_edges,
    build_traj_nodes,
    build_trajectory_edges,
)
from hgat_forecast.graph.frame import Frame
from hgat_forecast.graph.lanes import LANE_FEATURES
from hgat_forecast.graph.relations import NodeType
from hgat_forecast.graph.tables import NodeTable
from hgat_forecast.scenario.types import AgentType
from hgat_forecast.schemas.options import GraphOptions

IDENTITY = Frame(np.zeros(2), 0.0)
OPTIONS = GraphOptions()


def _lane_nodes(coords, headings=None):
    coords = np.asarray(coords, dtype=float).reshape(-1, 2)
    headings = np.zeros(len(coords)) if headings is None else np.asarray(headings, float)
    return NodeTable(
        NodeType.lane, np.zeros((len(coords), LANE_FEATURES)), coords=coords, headings=headings
    )


def _static_track(helpers, track_id, xy, t_obs=1, heading=0.0, agent_type=AgentType.vehicle):
    positions = np.tile(np.asarray(xy, float), (t_obs + 1, 1))
    return helpers.track(
        track_id, positions, t_obs, agent_type=agent_type, headings=np.full(t_obs + 1, heading)
    )


def _incoming(table, dst):
    return sorted(table.src[table.dst == dst].tolist())


def test_step_node_features(helpers):
    scene = helpers.straight_scene(n_agents=2, t_obs=4)
    steps = build_step_nodes(scene.tracks, 4, IDENTITY)
    assert steps.features.shape == (8, STEP_FEATURES)
    assert steps.owner.tolist() == [0] * 4 + [1] * 4
    assert steps.timestep.tolist() == [0, 1, 2, 3] * 2
    np.testing.assert_allclose(steps.features[:, 4], 4.0)  # speed
    np.testing.assert_allclose(steps.features[:4, 12], [0, 1 / 3, 2 / 3, 1])

    trajs = build_traj_nodes(scene.tracks, 4, IDENTITY)
    assert trajs.sequence.shape == (2, 4, 8)
    assert trajs.coords is None
    np.testing.assert_allclose(trajs.sequence[0, 1:, 2], 2.0)  # displacement per step


def test_far_agent_has_no_lane_edges(helpers):
    steps = build_step_nodes([_static_track(helpers, "a", (0, 20))], 1, IDENTITY)
    lanes = _lane_nodes([[0, 0], [2, 0], [4, 0]])
    lane_to_step, step_to_lane = build_step_lane_edges(steps, lanes, [AgentType.vehicle], OPTIONS)
    assert lane_to_step.count == 0
    assert step_to_lane.count == 0


def test_single_aligned_lane_node(helpers):
    steps = build_step_nodes([_static_track(helpers, "a", (0, 0))], 1, IDENTITY)
    lanes = _lane_nodes([[3, 0]])
    lane_to_step, step_to_lane = build_step_lane_edges(steps, lanes, [AgentType.vehicle], OPTIONS)
    assert (lane_to_step.src.tolist(), lane_to_step.dst.tolist()) == ([0], [0])
    assert (step_to_lane.src.tolist(), step_to_lane.dst.tolist()) == ([0], [0])
    np.testing.assert_allclose(lane_to_step.features[0], [3.0, 0.0, 0.0, 1.0])


def test_gated_out_agents_leave_both_tables_empty(helpers):
    # both vehicles drive against every lane node within reach
    tracks = [_static_track(helpers, name, (x, 1.0), t_obs=3, heading=np.pi) for name, x in (("a", 0.0), ("b", 2.0))]
    steps = build_step_nodes(tracks, 3, IDENTITY)
    lanes = _lane_nodes([[0, 0], [2, 0], [4, 0]])
    lane_to_step, step_to_lane = build_step_lane_edges(steps, lanes, [AgentType.vehicle] * 2, OPTIONS)
    for table in (lane_to_step, step_to_lane):
        assert table.count == 0
        assert table.features.shape == (0, 4)


def test_orientation_gate_exempts_pedestrians(helpers):
    lanes = _lane_nodes([[3, 0]], headings=[np.pi / 2])
    for agent_type, expected in ((AgentType.vehicle, 0), (AgentType.pedestrian, 1)):
        steps = build_step_nodes([_static_track(helpers, "a", (0, 0), agent_type=agent_type)], 1, IDENTITY)
        lane_to_step, _ = build_step_lane_edges(steps, lanes, [agent_type], OPTIONS)
        assert lane_to_step.count == expected


def test_five_nearest_of_eight_candidates(helpers):
    rng = np.random.default_rng(3)
    angles = rng.uniform(0, 2 * np.pi, 8)
    radii = rng.uniform(0.5, 6.5, 8)
    coords = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=-1)
    steps = build_step_nodes([_static_track(helpers, "a", (0, 0))], 1, IDENTITY)
    lanes = _lane_nodes(coords)
    lane_to_step, _ = build_step_lane_edges(steps, lanes, [AgentType.vehicle], OPTIONS)
    expected = sorted(np.lexsort((np.arange(8), radii))[:5].tolist())
    assert sorted(lane_to_step.src.tolist()) == expected


def test_step_to_lane_keeps_one_step_per_agent(helpers):
    tracks = [
        helpers.track(f"a{i}", helpers.line_positions((-2.0 + 0.1 * i, 0.5 * i), (1.0, 0.0), 4), 3)
        for i in range(7)
    ]
    steps = build_step_nodes(tracks, 3, IDENTITY)
    lanes = _lane_nodes([[0, 0]])
    _, step_to_lane = build_step_lane_edges(steps, lanes, [AgentType.vehicle] * 7, OPTIONS)
    assert step_to_lane.count == 5
    owners = steps.owner[step_to_lane.src]
    assert len(set(owners.tolist())) == 5
    dist = np.linalg.norm(steps.coords, axis=1)
    best = [min(np.flatnonzero(steps.owner == a), key=lambda n: (dist[n], n)) for a in range(7)]
    nearest = sorted(best, key=lambda n: (dist[n], n))[:5]
    assert sorted(step_to_lane.src.tolist()) == sorted(nearest)


def test_single_agent_has_no_step_step_edges(helpers):
    steps = build_step_nodes([_static_track(helpers, "a", (0, 0), t_obs=3)], 3, IDENTITY)
    assert build_step_step_edges(steps, OPTIONS).count == 0


def test_two_agents_pair_every_timestep(helpers):
    tracks = [_static_track(helpers, "a", (0, 0), t_obs=6), _static_track(helpers, "b", (10, 0), t_obs=6)]
    steps = build_step_nodes(tracks, 6, IDENTITY)
    table = build_step_step_edges(steps, OPTIONS)
    assert table.count == 12
    assert np.all(steps.timestep[table.src] == steps.timestep[table.dst])
    assert np.all(steps.owner[table.src] != steps.owner[table.dst])


def test_clustered_agents_get_five_neighbors(helpers):
    rng = np.random.default_rng(5)
    tracks = [
        helpers.track(f"a{i}", helpers.line_positions(rng.uniform(-10, 10, 2), (1.0, 0.5), 3), 2)
        for i in range(7)
    ]
    steps = build_step_nodes(tracks, 2, IDENTITY)
    table = build_step_step_edges(steps, OPTIONS)
    for node in range(steps.count):
        same = np.flatnonzero((steps.timestep == steps.timestep[node]) & (steps.owner != steps.owner[node]))
        dist = np.linalg.norm(steps.coords[same] - steps.coords[node], axis=1)
        expected = sorted(same[np.lexsort((same, dist))][:5].tolist())
        assert _incoming(table, node) == expected


def test_trajectory_edges(helpers):
    scene = helpers.straight_scene(n_agents=2, t_obs=5)
    steps = build_step_nodes(scene.tracks, 5, IDENTITY)
    trajs = build_traj_nodes(scene.tracks, 5, IDENTITY)
    step_to_traj, traj_to_step = build_trajectory_edges(steps, trajs)
    assert step_to_traj.count == traj_to_step.count == 10
    assert np.all(steps.owner[step_to_traj.src] == step_to_traj.dst)
    assert np.all(steps.owner[traj_to_step.dst] == traj_to_step.src)
    for agent in range(2):
        tau = step_to_traj.features[step_to_traj.dst == agent, 0]
        assert np.all(np.diff(tau) > 0)
