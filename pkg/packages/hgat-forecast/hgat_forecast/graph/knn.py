"""Radius-limited k-nearest-neighbor selection with deterministic ties."""

from typing import Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

Pairs = Tuple[np.ndarray, np.ndarray, np.ndarray]


def _empty_pairs() -> Pairs:
    return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0)


def candidate_pairs(query_xy: np.ndarray, ref_xy: np.ndarray, radius: Optional[float]) -> Pairs:
    """All (query, ref, distance) pairs with distance <= radius.

    ``radius=None`` pairs every query with every reference.
    """
    query_xy = np.asarray(query_xy, dtype=float).reshape(-1, 2)
    ref_xy = np.asarray(ref_xy, dtype=float).reshape(-1, 2)
    if len(query_xy) == 0 or len(ref_xy) == 0:
        return _empty_pairs()
    if radius is None:
        qi = np.repeat(np.arange(len(query_xy)), len(ref_xy))
        ri = np.tile(np.arange(len(ref_xy)), len(query_xy))
    else:
        hits = cKDTree(ref_xy).query_ball_point(query_xy, r=radius)
        sizes = np.array([len(h) for h in hits], dtype=np.int64)
        if sizes.sum() == 0:
            return _empty_pairs()
        qi = np.repeat(np.arange(len(query_xy)), sizes)
        ri = np.concatenate([np.asarray(h, dtype=np.int64) for h in hits if h])
    dist = np.linalg.norm(query_xy[qi] - ref_xy[ri], axis=1)
    if radius is not None:
        keep = dist <= radius
        qi, ri, dist = qi[keep], ri[keep], dist[keep]
    return qi.astype(np.int64), ri.astype(np.int64), dist


def tie_key(dist: np.ndarray) -> np.ndarray:
    """Sort key for distances: equal up to 1e-9 m counts as a tie."""
    return np.round(dist, 9)


def group_rank(groups: np.ndarray) -> np.ndarray:
    """Position of every entry within its run of equal (sorted) group ids."""
    if len(groups) == 0:
        return np.zeros(0, dtype=np.int64)
    starts = np.r_[True, groups[1:] != groups[:-1]]
    first = np.maximum.accumulate(np.where(starts, np.arange(len(groups)), 0))
    return np.arange(len(groups)) - first


def select_k_nearest(qi: np.ndarray, ri: np.ndarray, dist: np.ndarray, k: int) -> Pairs:
    """Keep the ``k`` closest references per query; ties go to the smaller
    reference index. Output is ordered by query, distance, reference."""
    order = np.lexsort((ri, tie_key(dist), qi))
    qi, ri, dist = qi[order], ri[order], dist[order]
    keep = group_rank(qi) < k
    return qi[keep], ri[keep], dist[keep]


def relative_features(
    src_xy: np.ndarray,
    src_heading: np.ndarray,
    dst_xy: np.ndarray,
    dst_heading: np.ndarray,
) -> np.ndarray:
    """[E, 4]: source displacement in the target's heading-aligned frame,
    then sin/cos of the relative heading."""
    d = src_xy - dst_xy
    c, s = np.cos(dst_heading), np.sin(dst_heading)
    local = np.stack([c * d[:, 0] + s * d[:, 1], -s * d[:, 0] + c * d[:, 1]], axis=-1)
    rel = src_heading - dst_heading
    return np.concatenate([local, np.sin(rel)[:, None], np.cos(rel)[:, None]], axis=-1)
