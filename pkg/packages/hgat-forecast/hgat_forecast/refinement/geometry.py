from typing import Optional, Sequence

import numpy as np
from hgat_forecast.exceptions import RefinementError
from hgat_forecast.graph.knn import relative_features, select_k_nearest
from hgat_forecast.graph.tables import EdgeTable
from hgat_forecast.numerics import ops
from hgat_forecast.numerics.tensor import Tensor
from scipy.spatial import cKDTree

MIN_STEP_M = 1e-6


def step_headings(
    coords: np.ndarray,
    steps: int,
    origins: Optional[np.ndarray] = None,
    fallback: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Heading of every predicted point from the displacement since the
    previous point (the origin for the first one).

    ``coords`` is [M * steps, 2] in trajectory order; a point that did
    not move keeps the heading of the point before it, and the first
    point falls back to ``fallback`` ([M], default 0).
    """
    points = np.asarray(coords, dtype=float).reshape(-1, steps, 2)
    n = points.shape[0]
    start = points[:, :1] if origins is None else np.asarray(origins, dtype=float).reshape(n, 1, 2)
    delta = points - np.concatenate([start, points[:, :-1]], axis=1)
    moved = np.linalg.norm(delta, axis=-1) > MIN_STEP_M
    raw = np.arctan2(delta[..., 1], delta[..., 0])
    headings = np.zeros((n, steps))
    current = np.zeros(n) if fallback is None else np.asarray(fallback, dtype=float).copy()
    for t in range(steps):
        current = np.where(moved[:, t], raw[:, t], current)
        headings[:, t] = current
    return headings.reshape(-1)


def _last_moved(moved: np.ndarray) -> np.ndarray:
    """[M, T] index of the latest moved step at or before each step, -1 if
    none."""
    steps = moved.shape[1]
    marks = np.where(moved, np.arange(steps)[None, :], -1)
    return np.maximum.accumulate(marks, axis=1)


def step_directions(
    coords: Tensor,
    steps: int,
    origins: Optional[np.ndarray] = None,
    fallback: Optional[np.ndarray] = None,
) -> Tensor:
    """Unit heading vectors [M * steps, 2] of the predicted points, on the
    tape. Same rule as :func:`step_headings`: a point that did not move
    keeps the direction of the point before it."""
    n = coords.shape[0] // steps
    points = ops.reshape(coords, (n, steps, 2))
    start = (
        ops.gather(points, np.zeros(1, dtype=np.int64), axis=1)
        if origins is None
        else Tensor(np.asarray(origins, dtype=float).reshape(n, 1, 2))
    )
    previous = ops.concat([start, ops.gather(points, np.arange(steps - 1), axis=1)], axis=1)
    delta = ops.reshape(ops.sub(points, previous), (n * steps, 2))
    moved = np.linalg.norm(delta.data, axis=-1).reshape(n, steps) > MIN_STEP_M

    rows = np.flatnonzero(moved.reshape(-1))
    fallback = np.zeros(n) if fallback is None else np.asarray(fallback, dtype=float)
    table = ops.concat(
        [
            ops.normalize(ops.gather(delta, rows)),
            Tensor(np.stack([np.cos(fallback), np.sin(fallback)], axis=-1)),
        ]
    )
    # position of every moved step inside ``table``
    slot = np.full(n * steps, -1, dtype=np.int64)
    slot[rows] = np.arange(len(rows))
    last = _last_moved(moved)
    owner = np.repeat(np.arange(n), steps).reshape(n, steps)
    flat_last = owner * steps + np.maximum(last, 0)
    index = np.where(last >= 0, slot[flat_last], len(rows) + owner)
    return ops.gather(table, index.reshape(-1))


def lane_edge_features(
    step_coords: Tensor,
    step_dirs: Tensor,
    lane_xy: np.ndarray,
    lane_heading: np.ndarray,
    src: np.ndarray,
    dst: np.ndarray,
) -> Tensor:
    """Differentiable ``lane_to_step`` features [E, 4]: lane node position
    in the step's heading-aligned frame, then sin/cos of the lane heading
    relative to the step."""
    lane_xy = np.asarray(lane_xy, dtype=float)[src]
    lane_heading = np.asarray(lane_heading, dtype=float)[src]
    d = ops.sub(Tensor(lane_xy), ops.gather(step_coords, dst))
    u = ops.gather(step_dirs, dst)
    normal = ops.matmul(u, Tensor(np.array([[0.0, 1.0], [-1.0, 0.0]])))
    sin_cos = np.stack([np.sin(lane_heading), -np.cos(lane_heading)], axis=-1)
    cos_sin = np.stack([np.cos(lane_heading), np.sin(lane_heading)], axis=-1)
    columns = [
        ops.mul(d, u),
        ops.mul(d, normal),
        ops.mul(u, Tensor(sin_cos)),
        ops.mul(u, Tensor(cos_sin)),
    ]
    return ops.concat([ops.sum(c, axis=1, keepdims=True) for c in columns], axis=1)


def dynamic_edges(
    step_xy: np.ndarray,
    step_heading: np.ndarray,
    lane_xy: np.ndarray,
    lane_heading: np.ndarray,
    k: int = 5,
) -> EdgeTable:
    """``lane_to_step`` edges from the ``min(k, L)`` closest lane nodes of
    every step, without a distance limit. Ties go to the lower lane index.

    Features are the lane node position in the step's heading-aligned
    frame and the sin/cos of the lane heading relative to the step.
    """
    lane_xy = np.asarray(lane_xy, dtype=float).reshape(-1, 2)
    step_xy = np.asarray(step_xy, dtype=float).reshape(-1, 2)
    if len(lane_xy) == 0:
        raise RefinementError("refinement needs at least one lane node")
    k = min(k, len(lane_xy))
    if len(step_xy) == 0:
        return EdgeTable.empty("lane_to_step")

    tree = cKDTree(lane_xy)
    kth, _ = tree.query(step_xy, k=k)
    kth = kth if k == 1 else kth[:, -1]
    hits = tree.query_ball_point(step_xy, r=kth * (1.0 + 1e-9) + 1e-9)
    sizes = np.array([len(h) for h in hits], dtype=np.int64)
    qi = np.repeat(np.arange(len(step_xy), dtype=np.int64), sizes)
    ri = np.concatenate([np.asarray(h, dtype=np.int64) for h in hits])
    dist = np.linalg.norm(step_xy[qi] - lane_xy[ri], axis=1)
    qi, ri, _ = select_k_nearest(qi, ri, dist, k)

    lane_heading = np.asarray(lane_heading, dtype=float)
    step_heading = np.asarray(step_heading, dtype=float)
    features = relative_features(lane_xy[ri], lane_heading[ri], step_xy[qi], step_heading[qi])
    return EdgeTable("lane_to_step", ri, qi, features)


def _segments(centerlines: Sequence[np.ndarray]) -> np.ndarray:
    parts = [
        np.stack([c[:-1], c[1:]], axis=1) for c in (np.asarray(c, dtype=float) for c in centerlines)
        if len(c) >= 2
    ]
    return np.concatenate(parts) if parts else np.zeros((0, 2, 2))


def lateral_lane_distance(points: np.ndarray, centerlines: Sequence[np.ndarray]) -> np.ndarray:
    """Distance of every point ([..., 2]) to the closest lane centerline
    segment."""
    points = np.asarray(points, dtype=float)
    segments = _segments(centerlines)
    if len(segments) == 0:
        raise RefinementError("no lane centerline to measure against")
    flat = points.reshape(-1, 2)
    a, b = segments[:, 0], segments[:, 1]
    ab = b - a
    length2 = np.maximum((ab**2).sum(axis=1), 1e-12)
    ap = flat[:, None, :] - a[None]
    u = np.clip((ap * ab[None]).sum(axis=-1) / length2, 0.0, 1.0)
    closest = a[None] + u[..., None] * ab[None]
    distances = np.linalg.norm(flat[:, None, :] - closest, axis=-1).min(axis=1)
    return distances.reshape(points.shape[:-1])
