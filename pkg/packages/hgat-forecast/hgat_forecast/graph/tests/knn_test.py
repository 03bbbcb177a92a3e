import numpy as np
import pytest
from hgat_forecast.graph.agents import build_step_lane_edges, build_step_nodes
from hgat_forecast.graph.frame import Frame
from hgat_forecast.graph.knn import candidate_pairs, select_k_nearest, tie_key
from hgat_forecast.graph.lanes import LANE_FEATURES
from hgat_forecast.graph.relations import NodeType
from hgat_forecast.graph.tables import NodeTable
from hgat_forecast.scenario.types import AgentType
from hgat_forecast.schemas.options import GraphOptions


def test_rounding_noise_is_a_tie():
    assert tie_key(np.array([1.0 + 1e-15]))[0] == tie_key(np.array([1.0]))[0]
    assert tie_key(np.array([1.0 + 1e-6]))[0] > tie_key(np.array([1.0]))[0]


def test_ties_go_to_the_smaller_reference():
    qi = np.array([0, 0, 0])
    ri = np.array([2, 1, 0])
    dist = np.array([1.0 - 1e-15, 1.0 + 1e-15, 3.0])
    q, r, d = select_k_nearest(qi, ri, dist, 1)
    assert (q.tolist(), r.tolist()) == ([0], [1])


def test_candidates_respect_the_radius():
    qi, ri, dist = candidate_pairs([[0.0, 0.0]], [[1.0, 0.0], [0.0, 2.5], [3.0, 0.0]], 2.5)
    assert sorted(ri.tolist()) == [0, 1]
    assert np.all(dist <= 2.5)
    assert len(candidate_pairs(np.zeros((0, 2)), [[1.0, 0.0]], 1.0)[0]) == 0


@pytest.mark.parametrize("angle, shift", [(0.0, (0.0, 0.0)), (1.1, (-37.0, 512.0)), (-2.3, (1e3, 7.5))])
def test_equidistant_lane_nodes_pick_the_same_edge_after_a_rigid_motion(helpers, angle, shift):
    c, s = np.cos(angle), np.sin(angle)
    rotation = np.array([[c, -s], [s, c]])

    def move(xy):
        return np.asarray(xy, dtype=float) @ rotation.T + np.asarray(shift)

    lane_xy = move([[-1.3, 0.0], [1.3, 0.0]])
    lanes = NodeTable(
        NodeType.lane, np.zeros((2, LANE_FEATURES)), coords=lane_xy, headings=np.full(2, angle)
    )
    positions = np.tile(move([[0.0, 1.0]]), (2, 1))
    track = helpers.track("a", positions, 1, agent_type=AgentType.pedestrian, headings=np.full(2, angle))
    steps = build_step_nodes([track], 1, Frame(np.zeros(2), 0.0))
    options = GraphOptions(step_lane_neighbors=1)
    lane_to_step, step_to_lane = build_step_lane_edges(steps, lanes, [AgentType.pedestrian], options)
    assert lane_to_step.src.tolist() == [0]
    assert sorted(step_to_lane.dst.tolist()) == [0, 1]
