import numpy as np
import pytest
from hgat_forecast.exceptions import DegenerateLaneError
from hgat_forecast.graph.lanes import LANE_FEATURES, build_lane_edges, sample_lane_nodes


def test_spacing_and_endpoints(helpers):
    nodes = sample_lane_nodes([helpers.straight_lane("l", (0, 0), (10, 0))], 2.0)
    assert nodes.count == 6
    np.testing.assert_allclose(nodes.arc, [0, 2, 4, 6, 8, 10])
    np.testing.assert_allclose(nodes.coords[:, 0], [0, 2, 4, 6, 8, 10])
    assert nodes.features.shape == (6, LANE_FEATURES)

    short = sample_lane_nodes([helpers.straight_lane("s", (0, 0), (1.5, 0))], 2.0)
    assert short.count == 2
    np.testing.assert_allclose(short.arc, [0.0, 1.5])


def test_uneven_length_keeps_gaps_below_spacing(helpers):
    nodes = sample_lane_nodes([helpers.straight_lane("l", (0, 0), (9.3, 0))], 2.0)
    assert np.diff(nodes.arc).max() <= 2.0 + 1e-12
    assert nodes.arc[-1] == pytest.approx(9.3)


def test_arc_directions_are_tangent(helpers):
    radius = 30.0
    angles = np.linspace(0.0, np.pi / 2, 200)
    points = radius * np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    nodes = sample_lane_nodes([helpers.lane("arc", points)], 2.0)
    theta = np.arctan2(nodes.coords[:, 1], nodes.coords[:, 0])
    tangent = theta + np.pi / 2
    diff = np.angle(np.exp(1j * (nodes.headings - tangent)))
    assert np.abs(np.rad2deg(diff)).max() <= 2.0


def test_degenerate_lane_is_rejected(helpers):
    lane = helpers.lane("bad", [[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(DegenerateLaneError):
        sample_lane_nodes([lane], 2.0)


def test_marking_features(helpers):
    lane = helpers.straight_lane("l", (0, 0), (4, 0), is_intersection=True)
    features = sample_lane_nodes([lane], 2.0).features
    np.testing.assert_allclose(features[:, 2:4], [[1.0, 0.0]] * 3)  # direction
    np.testing.assert_allclose(features[:, 4:6], 1.75)
    # dashed left, solid right, intersection flag
    np.testing.assert_array_equal(features[0, 6:12], [1, 0, 0, 0, 1, 0])
    assert features[0, 12] == 1.0


def test_single_lane_chain(helpers):
    lanes = [helpers.straight_lane("l", (0, 0), (4, 0))]
    edges = build_lane_edges(sample_lane_nodes(lanes, 2.0), lanes)
    assert edges["lane_succ"].src.tolist() == [0, 1]
    assert edges["lane_succ"].dst.tolist() == [1, 2]
    assert edges["lane_pred"].src.tolist() == [1, 2]
    assert edges["lane_pred"].dst.tolist() == [0, 1]
    assert edges["lane_left"].count == 0
    assert edges["lane_right"].count == 0
    np.testing.assert_allclose(edges["lane_succ"].features[0], [-2.0, 0.0, 0.0, 1.0])


def test_successor_lanes_are_bridged(helpers):
    lanes = [
        helpers.straight_lane("a", (0, 0), (4, 0), successors=["b"]),
        helpers.straight_lane("b", (4, 0), (8, 0), predecessors=["a"]),
    ]
    nodes = sample_lane_nodes(lanes, 2.0)
    edges = build_lane_edges(nodes, lanes)
    last_a = int(np.flatnonzero(nodes.owner == 0)[-1])
    first_b = int(np.flatnonzero(nodes.owner == 1)[0])
    pairs = set(zip(edges["lane_succ"].src.tolist(), edges["lane_succ"].dst.tolist()))
    assert (last_a, first_b) in pairs
    assert edges["lane_succ"].count == 5  # 2 + 2 inside the lanes, 1 bridge
    assert (first_b, last_a) in set(zip(edges["lane_pred"].src.tolist(), edges["lane_pred"].dst.tolist()))


def test_left_neighbor_matches_nearest_node(helpers):
    lanes = [
        helpers.straight_lane("right", (0, 0), (10, 0), left_neighbor="left"),
        helpers.straight_lane("left", (0.7, 3.5), (9.1, 3.5), right_neighbor="right"),
    ]
    nodes = sample_lane_nodes(lanes, 2.0)
    edges = build_lane_edges(nodes, lanes)
    right_nodes = np.flatnonzero(nodes.owner == 0)
    left_nodes = np.flatnonzero(nodes.owner == 1)
    table = edges["lane_left"]
    assert sorted(table.dst.tolist()) == right_nodes.tolist()
    for src, dst in zip(table.src, table.dst):
        dist = np.linalg.norm(nodes.coords[left_nodes] - nodes.coords[dst], axis=1)
        assert src == left_nodes[np.argmin(dist)]
    assert sorted(edges["lane_right"].dst.tolist()) == left_nodes.tolist()


@pytest.mark.parametrize("angle, shift", [(0.7, (250.0, -80.0)), (-2.9, (-1e3, 3.0))])
def test_equidistant_neighbor_nodes_survive_rigid_motion(helpers, angle, shift):
    c, s = np.cos(angle), np.sin(angle)

    def move(xy):
        x, y = xy
        return (c * x - s * y + shift[0], s * x + c * y + shift[1])

    def left_edges(moved):
        place = move if moved else (lambda xy: xy)
        lanes = [
            helpers.straight_lane("right", place((0, 0)), place((10, 0)), left_neighbor="left"),
            # half a spacing ahead: every inner right node has two nearest left nodes
            helpers.straight_lane("left", place((1, 3.5)), place((9, 3.5)), right_neighbor="right"),
        ]
        nodes = sample_lane_nodes(lanes, 2.0)
        table = build_lane_edges(nodes, lanes)["lane_left"]
        return table.src.tolist(), table.dst.tolist(), nodes

    src, dst, nodes = left_edges(False)
    assert (src, dst) == left_edges(True)[:2]
    left_nodes = np.flatnonzero(nodes.owner == 1)
    second = dst.index(int(np.flatnonzero(nodes.owner == 0)[1]))
    assert src[second] == left_nodes[0]
