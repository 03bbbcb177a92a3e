import json
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np
from hgat_common.logger import logger
from hgat_forecast.graph.agents import (
    build_step_lane_edges,
    build_step_nodes,
    build_step_step_edges,
    build_traj_nodes,
    build_trajectory_edges,
)
from hgat_forecast.graph.frame import Frame
from hgat_forecast.graph.lanes import build_lane_edges, sample_lane_nodes
from hgat_forecast.graph.relations import ALL_RELATIONS, NodeType, check_removable
from hgat_forecast.graph.tables import AgentTable, HeteroGraph
from hgat_forecast.scenario.types import Scenario
from hgat_forecast.schemas.graph import EdgeListDocument, GraphDocument, NodeListDocument
from hgat_forecast.schemas.options import GraphOptions


def assemble_scene_graph(
    scenario: Scenario,
    options: Optional[GraphOptions] = None,
    removed_relations: Iterable[str] = (),
) -> HeteroGraph:
    """Heterogeneous graph of the observed part of ``scenario``, in the
    frame of the focal agent's last observed pose."""
    options = options or GraphOptions()
    removed = check_removable(removed_relations)
    t_obs = scenario.num_observed
    focal = scenario.focal
    frame = Frame.from_track(focal, t_obs - 1)

    lanes = sample_lane_nodes(scenario.lanes, options.lane_spacing_m, frame)
    steps = build_step_nodes(scenario.tracks, t_obs, frame)
    trajectories = build_traj_nodes(scenario.tracks, t_obs, frame)
    agent_types = [t.agent_type for t in scenario.tracks]

    edges = build_lane_edges(lanes, scenario.lanes)
    edges["lane_to_step"], edges["step_to_lane"] = build_step_lane_edges(
        steps, lanes, agent_types, options
    )
    edges["step_to_step"] = build_step_step_edges(steps, options)
    edges["step_to_traj"], edges["traj_to_step"] = build_trajectory_edges(steps, trajectories)
    edges = {name: edges[name] for name in ALL_RELATIONS if name not in removed}

    future = None
    if scenario.num_future > 0:
        future = np.stack([frame.to_local(t.positions[t_obs:]) for t in scenario.tracks])
    agents = AgentTable(
        ids=[t.id for t in scenario.tracks],
        types=agent_types,
        categories=[t.category for t in scenario.tracks],
        last_positions=frame.to_local(np.stack([t.positions[t_obs - 1] for t in scenario.tracks])),
        last_headings=frame.heading_to_local(np.array([t.headings[t_obs - 1] for t in scenario.tracks])),
        future=future,
    )
    graph = HeteroGraph(
        scenario_id=scenario.id,
        frame=frame,
        nodes={NodeType.lane: lanes, NodeType.step: steps, NodeType.traj: trajectories},
        edges=edges,
        agents=agents,
        removed_relations=list(removed),
    )
    logger.debug(
        "scene graph {id}: {lanes} lane / {steps} step / {trajs} trajectory nodes, edges {edges}",
        id=scenario.id,
        lanes=lanes.count,
        steps=steps.count,
        trajs=trajectories.count,
        edges=graph.edge_counts(),
    )
    return graph


def graph_to_document(graph: HeteroGraph) -> GraphDocument:
    nodes = []
    for node_type, table in graph.nodes.items():
        nodes.append(
            NodeListDocument(
                node_type=node_type.value,
                count=table.count,
                coords=table.coords.tolist() if table.coords is not None else None,
                timestep=table.timestep.tolist() if table.timestep is not None else None,
                owner=table.owner.tolist() if table.owner is not None else None,
            )
        )
    edges = [
        EdgeListDocument(
            relation=name,
            src_type=table.meta.src.value,
            dst_type=table.meta.dst.value,
            src=table.src.tolist(),
            dst=table.dst.tolist(),
        )
        for name, table in graph.edges.items()
    ]
    return GraphDocument(
        scenario_id=graph.scenario_id,
        frame_origin=tuple(graph.frame.origin.tolist()),
        frame_heading=graph.frame.heading,
        nodes=nodes,
        edges=edges,
    )


def dump_graph(graph: HeteroGraph, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(json.loads(graph_to_document(graph).json()), indent=1))
    return path
