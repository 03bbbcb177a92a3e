from typing import List, Tuple

import numpy as np
from hgat_forecast.exceptions import GraphConstructionError
from hgat_forecast.graph.frame import Frame
from hgat_forecast.graph.knn import candidate_pairs, relative_features, select_k_nearest, tie_key
from hgat_forecast.graph.relations import NodeType
from hgat_forecast.graph.tables import EdgeTable, NodeTable
from hgat_forecast.schemas.options import GraphOptions
from hgat_forecast.scenario.types import AGENT_TYPES, AgentTrack, AgentType, wrap_angle

# position 2, velocity 2, speed 1, heading sin/cos 2, type one-hot 5,
# normalized timestep 1, observed flag 1
STEP_FEATURES = 14
# position 2, displacement 2, velocity 2, heading sin/cos 2
TRAJ_FEATURES = 8


def _normalized_time(t_obs: int) -> np.ndarray:
    return np.arange(t_obs) / max(t_obs - 1, 1)


def _type_one_hot(agent_type: AgentType) -> np.ndarray:
    out = np.zeros(len(AGENT_TYPES))
    out[AGENT_TYPES.index(agent_type)] = 1.0
    return out


def _local_states(track: AgentTrack, t_obs: int, frame: Frame):
    xy = frame.to_local(track.positions[:t_obs])
    vel = frame.vectors_to_local(track.velocities[:t_obs])
    heading = frame.heading_to_local(track.headings[:t_obs])
    return xy, vel, heading


def build_step_nodes(tracks: List[AgentTrack], t_obs: int, frame: Frame) -> NodeTable:
    """One node per agent and observed timestep; node ``a * t_obs + t``
    is agent ``a`` at time ``t``."""
    features, coords, headings = [], [], []
    tau = _normalized_time(t_obs)
    for track in tracks:
        xy, vel, heading = _local_states(track, t_obs, frame)
        speed = np.linalg.norm(vel, axis=1)
        features.append(
            np.concatenate(
                [
                    xy,
                    vel,
                    speed[:, None],
                    np.sin(heading)[:, None],
                    np.cos(heading)[:, None],
                    np.tile(_type_one_hot(track.agent_type), (t_obs, 1)),
                    tau[:, None],
                    track.observed[:t_obs, None].astype(float),
                ],
                axis=-1,
            )
        )
        coords.append(xy)
        headings.append(heading)
    n_agents = len(tracks)
    return NodeTable(
        NodeType.step,
        np.concatenate(features) if features else np.zeros((0, STEP_FEATURES)),
        coords=np.concatenate(coords) if coords else np.zeros((0, 2)),
        headings=np.concatenate(headings) if headings else np.zeros(0),
        owner=np.repeat(np.arange(n_agents, dtype=np.int64), t_obs),
        timestep=np.tile(np.arange(t_obs, dtype=np.int64), n_agents),
    )


def build_traj_nodes(tracks: List[AgentTrack], t_obs: int, frame: Frame) -> NodeTable:
    """One node per agent; ``sequence`` holds the observed history the
    trajectory encoder convolves over."""
    sequences = []
    for track in tracks:
        xy, vel, heading = _local_states(track, t_obs, frame)
        displacement = np.diff(xy, axis=0, prepend=xy[:1])
        sequences.append(
            np.concatenate(
                [xy, displacement, vel, np.sin(heading)[:, None], np.cos(heading)[:, None]],
                axis=-1,
            )
        )
    sequence = np.stack(sequences) if sequences else np.zeros((0, t_obs, TRAJ_FEATURES))
    return NodeTable(
        NodeType.traj,
        sequence[:, -1, :],
        owner=np.arange(len(tracks), dtype=np.int64),
        sequence=sequence,
    )


def _gate(lane_heading, step_heading, pedestrian, gate_rad) -> np.ndarray:
    return pedestrian | (np.abs(wrap_angle(lane_heading - step_heading)) <= gate_rad)


def build_step_lane_edges(
    steps: NodeTable,
    lanes: NodeTable,
    agent_types: List[AgentType],
    options: GraphOptions,
) -> Tuple[EdgeTable, EdgeTable]:
    """(lane_to_step, step_to_lane).

    lane_to_step: every step node receives its <= k nearest lane nodes
    within the radius. step_to_lane: every lane node receives the
    closest step of each of its <= k nearest agents. Vehicle-like agents
    only pair with lane nodes whose direction lies within the
    orientation gate of their heading.
    """
    empty = EdgeTable.empty("lane_to_step"), EdgeTable.empty("step_to_lane")
    if steps.count == 0 or lanes.count == 0:
        return empty
    gate = np.deg2rad(options.orientation_gate_deg)
    pedestrian = np.array([t == AgentType.pedestrian for t in agent_types])[steps.owner]
    k = options.step_lane_neighbors

    si, li, dist = candidate_pairs(steps.coords, lanes.coords, options.step_lane_radius_m)
    ok = _gate(lanes.headings[li], steps.headings[si], pedestrian[si], gate)
    si, li, dist = si[ok], li[ok], dist[ok]
    if len(li) == 0:
        return empty

    dst, src, _ = select_k_nearest(si, li, dist, k)
    lane_to_step = EdgeTable(
        "lane_to_step",
        src,
        dst,
        relative_features(lanes.coords[src], lanes.headings[src], steps.coords[dst], steps.headings[dst]),
    )

    # closest step per (lane node, agent), then the k nearest agents
    agent = steps.owner[si]
    order = np.lexsort((si, tie_key(dist), agent, li))
    li, si, dist, agent = li[order], si[order], dist[order], agent[order]
    first = np.r_[True, (li[1:] != li[:-1]) | (agent[1:] != agent[:-1])]
    dst, src, _ = select_k_nearest(li[first], si[first], dist[first], k)
    step_to_lane = EdgeTable(
        "step_to_lane",
        src,
        dst,
        relative_features(steps.coords[src], steps.headings[src], lanes.coords[dst], lanes.headings[dst]),
    )
    return lane_to_step, step_to_lane


def build_step_step_edges(steps: NodeTable, options: GraphOptions) -> EdgeTable:
    """Every step node receives the same-timestep steps of its <= k
    nearest other agents within the radius."""
    if steps.count == 0:
        return EdgeTable.empty("step_to_step")
    speed = steps.features[:, 4]
    dsts, srcs = [], []
    for t in np.unique(steps.timestep):
        nodes = np.flatnonzero(steps.timestep == t)
        qi, ri, dist = candidate_pairs(
            steps.coords[nodes], steps.coords[nodes], options.step_step_radius_m
        )
        other = steps.owner[nodes[qi]] != steps.owner[nodes[ri]]
        qi, ri, _ = select_k_nearest(nodes[qi[other]], nodes[ri[other]], dist[other], options.step_step_neighbors)
        dsts.append(qi)
        srcs.append(ri)
    dst = np.concatenate(dsts)
    src = np.concatenate(srcs)
    order = np.argsort(dst, kind="stable")
    dst, src = dst[order], src[order]
    if len(dst) == 0:
        return EdgeTable.empty("step_to_step")
    features = np.concatenate(
        [
            relative_features(steps.coords[src], steps.headings[src], steps.coords[dst], steps.headings[dst]),
            (speed[src] - speed[dst])[:, None],
        ],
        axis=-1,
    )
    return EdgeTable("step_to_step", src, dst, features)


def build_trajectory_edges(steps: NodeTable, trajectories: NodeTable) -> Tuple[EdgeTable, EdgeTable]:
    """(step_to_traj, traj_to_step): every step node with its own agent's
    full-trajectory node, both directions, timestep as the feature."""
    if steps.count == 0:
        return EdgeTable.empty("step_to_traj"), EdgeTable.empty("traj_to_step")
    owner = steps.owner
    if owner.min() < 0 or owner.max() >= trajectories.count:
        orphan = int(np.flatnonzero((owner < 0) | (owner >= trajectories.count))[0])
        raise GraphConstructionError(f"step node {orphan} has no full-trajectory node")
    t_obs = int(steps.timestep.max()) + 1
    tau = _normalized_time(t_obs)[steps.timestep][:, None]
    step_index = np.arange(steps.count, dtype=np.int64)
    return (
        EdgeTable("step_to_traj", step_index, owner.copy(), tau),
        EdgeTable("traj_to_step", owner.copy(), step_index, tau.copy()),
    )
