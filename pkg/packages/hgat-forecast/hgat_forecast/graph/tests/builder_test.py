import json

import numpy as np
import pytest
from hgat_forecast.exceptions import AblationError
from hgat_forecast.graph.builder import assemble_scene_graph, dump_graph
from hgat_forecast.graph.lanes import sample_lane_nodes
from hgat_forecast.graph.relations import ALL_RELATIONS, RELATIONS, NodeType
from hgat_forecast.refinement.geometry import dynamic_edges
from hgat_forecast.scenario.generator import generate_synthetic
from hgat_forecast.scenario.layout import make_layout
from hgat_forecast.scenario.types import AgentType, transform_scenario, wrap_angle
from hgat_forecast.schemas.options import GraphOptions

FAST = make_layout(2.0)


def _incoming(table, dst):
    return sorted(table.src[table.dst == dst].tolist())


def test_single_agent_node_counts_and_origin(helpers):
    scene = helpers.straight_scene(n_agents=1, t_obs=4)
    graph = assemble_scene_graph(scene)
    lane_count = sample_lane_nodes(scene.lanes, 2.0).count
    total = sum(graph.node_count(t) for t in NodeType)
    assert total == lane_count + 4 + 1
    focal_last = graph.steps.coords[3]
    np.testing.assert_allclose(focal_last, [0.0, 0.0], atol=1e-12)
    assert graph.agents.last_headings[0] == pytest.approx(0.0)
    assert graph.agents.future.shape == (1, 3, 2)


def test_relation_endpoints_match_node_types():
    graph = assemble_scene_graph(generate_synthetic("intersection", 5, seed=2, layout=FAST))
    for name, table in graph.edges.items():
        meta = RELATIONS[name]
        assert table.src.size == 0 or table.src.max() < graph.node_count(meta.src)
        assert table.dst.size == 0 or table.dst.max() < graph.node_count(meta.dst)
        assert table.features.shape == (table.count, meta.feature_dim)


def _nearest_first(candidates, d):
    return candidates[np.lexsort((candidates, np.round(d[candidates], 9)))]


@pytest.mark.parametrize("seed", range(100))
def test_knn_constraints_on_seeded_scenarios(seed):
    kind = ("straight", "curve", "intersection")[seed % 3]
    options = GraphOptions()
    scenario = generate_synthetic(kind, 5, seed=seed, layout=FAST)
    graph = assemble_scene_graph(scenario, options)
    lanes, steps = graph.lanes, graph.steps
    gate = np.deg2rad(options.orientation_gate_deg)
    pedestrian = np.array([t == AgentType.pedestrian for t in graph.agents.types])[steps.owner]
    k = options.step_lane_neighbors
    pairs = np.linalg.norm(lanes.coords[:, None] - steps.coords[None], axis=-1)  # [L, S]
    aligned = np.abs(wrap_angle(lanes.headings[:, None] - steps.headings[None])) <= gate
    usable = (pairs <= options.step_lane_radius_m) & (aligned | pedestrian[None])

    table = graph.edges["lane_to_step"]
    for node in range(steps.count):
        expected = _nearest_first(np.flatnonzero(usable[:, node]), pairs[:, node])[:k]
        assert _incoming(table, node) == sorted(expected.tolist()), node

    table = graph.edges["step_to_lane"]
    for node in range(lanes.count):
        closest = []
        for agent in range(graph.agents.count):
            own = np.flatnonzero(usable[node] & (steps.owner == agent))
            if len(own):
                closest.append(_nearest_first(own, pairs[node])[0])
        expected = _nearest_first(np.array(closest, dtype=np.int64), pairs[node])[:k]
        assert _incoming(table, node) == sorted(expected.tolist()), node

    table = graph.edges["step_to_step"]
    for node in range(steps.count):
        d = np.linalg.norm(steps.coords - steps.coords[node], axis=1)
        candidates = np.flatnonzero(
            (steps.timestep == steps.timestep[node])
            & (steps.owner != steps.owner[node])
            & (d <= options.step_step_radius_m)
        )
        expected = _nearest_first(candidates, d)[: options.step_step_neighbors]
        assert _incoming(table, node) == sorted(expected.tolist()), node

    dynamic = dynamic_edges(steps.coords, steps.headings, lanes.coords, lanes.headings, k=5)
    counts = np.bincount(dynamic.dst, minlength=steps.count)
    np.testing.assert_array_equal(counts, min(5, lanes.count))
    for node in range(steps.count):
        expected = _nearest_first(np.arange(lanes.count), pairs[:, node])[:5]
        assert _incoming(dynamic, node) == sorted(expected.tolist()), node



def test_rigid_transform_invariance():
    scenario = generate_synthetic("curve", 5, seed=4, layout=FAST)
    moved = transform_scenario(scenario, 1.1, (-37.0, 512.0))
    a, b = assemble_scene_graph(scenario), assemble_scene_graph(moved)
    for node_type in NodeType:
        np.testing.assert_allclose(a.nodes[node_type].features, b.nodes[node_type].features, atol=1e-9)
    for name in ALL_RELATIONS:
        np.testing.assert_array_equal(a.edges[name].src, b.edges[name].src)
        np.testing.assert_array_equal(a.edges[name].dst, b.edges[name].dst)
        np.testing.assert_allclose(a.edges[name].features, b.edges[name].features, atol=1e-9)


def test_construction_is_deterministic():
    scenario = generate_synthetic("intersection", 6, seed=9, layout=FAST)
    a, b = assemble_scene_graph(scenario), assemble_scene_graph(scenario)
    for name in ALL_RELATIONS:
        np.testing.assert_array_equal(a.edges[name].src, b.edges[name].src)
        np.testing.assert_array_equal(a.edges[name].dst, b.edges[name].dst)


def test_removed_relations_are_absent():
    scenario = generate_synthetic("straight", 4, seed=1, layout=FAST)
    graph = assemble_scene_graph(scenario, removed_relations=["traj_to_step", "step_to_step"])
    assert "traj_to_step" not in graph.edges
    assert "step_to_step" not in graph.edges
    assert graph.edges["step_to_traj"].count == graph.steps.count
    assert graph.edge("traj_to_step").count == 0

    with pytest.raises(AblationError):
        assemble_scene_graph(scenario, removed_relations=["lane_succ"])


def test_dump_graph(tmp_path):
    graph = assemble_scene_graph(generate_synthetic("straight", 2, seed=0, layout=FAST))
    path = dump_graph(graph, tmp_path / "graph.json")
    doc = json.loads(path.read_text())
    assert doc["scenario_id"] == graph.scenario_id
    edges = {e["relation"]: e for e in doc["edges"]}
    assert set(edges) == set(ALL_RELATIONS)
    assert len(edges["step_to_traj"]["src"]) == graph.steps.count
    traj = next(n for n in doc["nodes"] if n["node_type"] == "full_trajectory")
    assert traj["coords"] is None
