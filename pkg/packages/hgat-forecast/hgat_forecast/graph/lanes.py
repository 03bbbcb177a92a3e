from typing import Dict, List, Optional, Tuple

import numpy as np
from hgat_forecast.exceptions import DegenerateLaneError
from hgat_forecast.graph.frame import Frame
from hgat_forecast.graph.knn import relative_features, tie_key
from hgat_forecast.graph.relations import NodeType
from hgat_forecast.graph.tables import EdgeTable, NodeTable
from hgat_forecast.scenario.types import MARK_TYPES, LanePolyline

# position 2, direction 2, marking distances 2, marking one-hots 2x3, intersection 1
LANE_FEATURES = 13


def _clean_centerline(lane: LanePolyline) -> Tuple[np.ndarray, np.ndarray]:
    """Centerline without repeated points, and the kept point indices."""
    points = np.asarray(lane.centerline, dtype=float)
    keep = np.r_[True, np.linalg.norm(np.diff(points, axis=0), axis=1) > 0]
    if keep.sum() < 2:
        raise DegenerateLaneError(lane.id)
    return points[keep], np.flatnonzero(keep)


def _interp_polyline(arc: np.ndarray, values: np.ndarray, s: np.ndarray) -> np.ndarray:
    if values.ndim == 1:
        return np.interp(s, arc, values)
    return np.stack([np.interp(s, arc, values[:, i]) for i in range(values.shape[1])], axis=-1)


def _one_hot(mark) -> np.ndarray:
    out = np.zeros(len(MARK_TYPES))
    out[MARK_TYPES.index(mark)] = 1.0
    return out


def sample_lane_nodes(
    lanes: List[LanePolyline], spacing: float, frame: Optional[Frame] = None
) -> NodeTable:
    """Nodes every <= ``spacing`` meters of arc length along each lane,
    both endpoints included. Coordinates and features are expressed in
    ``frame`` (world coordinates when no frame is given)."""
    if spacing <= 0:
        raise ValueError(f"lane node spacing must be positive, got {spacing}")
    coords, headings, features, owner, arcs = [], [], [], [], []
    for lane_index, lane in enumerate(lanes):
        points, kept = _clean_centerline(lane)
        if frame is not None:
            points = frame.to_local(points)
        arc = np.r_[0.0, np.cumsum(np.linalg.norm(np.diff(points, axis=0), axis=1))]
        length = arc[-1]
        intervals = max(1, int(np.ceil(length / spacing - 1e-9)))
        s = np.linspace(0.0, length, intervals + 1)

        xy = _interp_polyline(arc, points, s)
        h = min(0.25, length / 4.0)
        ahead = _interp_polyline(arc, points, np.minimum(s + h, length))
        behind = _interp_polyline(arc, points, np.maximum(s - h, 0.0))
        chord = ahead - behind
        heading = np.arctan2(chord[:, 1], chord[:, 0])

        left = np.interp(s, arc, np.asarray(lane.left_dist, dtype=float)[kept])
        right = np.interp(s, arc, np.asarray(lane.right_dist, dtype=float)[kept])
        marks = np.concatenate([_one_hot(lane.left_mark), _one_hot(lane.right_mark)])
        n = len(s)
        features.append(
            np.concatenate(
                [
                    xy,
                    np.cos(heading)[:, None],
                    np.sin(heading)[:, None],
                    left[:, None],
                    right[:, None],
                    np.tile(marks, (n, 1)),
                    np.full((n, 1), float(lane.is_intersection)),
                ],
                axis=-1,
            )
        )
        coords.append(xy)
        headings.append(heading)
        owner.append(np.full(n, lane_index, dtype=np.int64))
        arcs.append(s)

    if not lanes:
        return NodeTable(
            NodeType.lane,
            np.zeros((0, LANE_FEATURES)),
            coords=np.zeros((0, 2)),
            headings=np.zeros(0),
            owner=np.zeros(0, dtype=np.int64),
            arc=np.zeros(0),
        )
    return NodeTable(
        NodeType.lane,
        np.concatenate(features),
        coords=np.concatenate(coords),
        headings=np.concatenate(headings),
        owner=np.concatenate(owner),
        arc=np.concatenate(arcs),
    )


def _lane_slices(nodes: NodeTable, n_lanes: int) -> List[np.ndarray]:
    return [np.flatnonzero(nodes.owner == i) for i in range(n_lanes)]


def _edge_table(relation: str, nodes: NodeTable, src: List[int], dst: List[int]) -> EdgeTable:
    if not src:
        return EdgeTable.empty(relation)
    src_a = np.asarray(src, dtype=np.int64)
    dst_a = np.asarray(dst, dtype=np.int64)
    features = relative_features(
        nodes.coords[src_a], nodes.headings[src_a], nodes.coords[dst_a], nodes.headings[dst_a]
    )
    return EdgeTable(relation, src_a, dst_a, features)


def build_lane_edges(nodes: NodeTable, lanes: List[LanePolyline]) -> Dict[str, EdgeTable]:
    """lane_succ edges point from a node to the next one along travel
    (bridging to the first node of every successor lane), lane_pred edges
    the other way; lane_left/lane_right edges reach every node from its
    closest node on the left/right neighbor lane."""
    slices = _lane_slices(nodes, len(lanes))
    index = {lane.id: i for i, lane in enumerate(lanes)}

    succ_src, succ_dst = [], []
    for chain in slices:
        succ_src.extend(chain[:-1].tolist())
        succ_dst.extend(chain[1:].tolist())
    connections = set()
    for i, lane in enumerate(lanes):
        connections.update((i, index[s]) for s in lane.successors if s in index)
        connections.update((index[p], i) for p in lane.predecessors if p in index)
    for a, b in sorted(connections):
        succ_src.append(int(slices[a][-1]))
        succ_dst.append(int(slices[b][0]))

    sides = {"lane_left": ([], []), "lane_right": ([], [])}
    for i, lane in enumerate(lanes):
        for relation, neighbor in (("lane_left", lane.left_neighbor), ("lane_right", lane.right_neighbor)):
            if neighbor is None or neighbor not in index:
                continue
            candidates = slices[index[neighbor]]
            src, dst = sides[relation]
            for node in slices[i]:
                dist = np.linalg.norm(nodes.coords[candidates] - nodes.coords[node], axis=1)
                src.append(int(candidates[np.argmin(tie_key(dist))]))
                dst.append(int(node))

    return {
        "lane_left": _edge_table("lane_left", nodes, *sides["lane_left"]),
        "lane_right": _edge_table("lane_right", nodes, *sides["lane_right"]),
        "lane_pred": _edge_table("lane_pred", nodes, succ_dst, succ_src),
        "lane_succ": _edge_table("lane_succ", nodes, succ_src, succ_dst),
    }
