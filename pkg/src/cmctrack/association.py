"""IoU cost matrices and optimal track/detection assignment."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import boxes_to_array, iou_matrix

DEFAULT_GATE = 0.3


def linear_sum_assignment(cost) -> tuple[np.ndarray, np.ndarray]:
    """Minimum-cost assignment of a (possibly rectangular) cost matrix.

    Kuhn-Munkres in its shortest-augmenting-path form with row/column
    potentials, O(n^2 m).  Returns ``(rows, cols)`` sorted by row; exactly
    ``min(n_rows, n_cols)`` pairs are produced.
    """
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2:
        raise ValueError("cost matrix must be 2-D")
    if c.size == 0:
        return np.zeros(0, dtype=np.intp), np.zeros(0, dtype=np.intp)
    if not np.isfinite(c).all():
        raise ValueError("cost matrix must be finite")
    transposed = c.shape[0] > c.shape[1]
    if transposed:
        c = c.T
    n, m = c.shape

    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    owner = np.zeros(m + 1, dtype=np.intp)  # owner[j]: 1-based row matched to column j (0 = free)
    way = np.zeros(m + 1, dtype=np.intp)
    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = owner[j0]
            free = ~used[1:]
            cur = c[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            cand = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(cand)) + 1  # lowest column index on ties
            delta = cand[j1 - 1]
            u[owner[used]] += delta
            v[used] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1

    cols = np.flatnonzero(owner[1:])
    rows = owner[1:][cols] - 1
    if transposed:
        rows, cols = cols, rows
    order = np.argsort(rows, kind="stable")
    return rows[order].astype(np.intp), cols[order].astype(np.intp)


@dataclass
class AssignmentResult:
    matches: list[tuple[int, int]] = field(default_factory=list)
    unmatched_tracks: list[int] = field(default_factory=list)
    unmatched_detections: list[int] = field(default_factory=list)


def build_cost_matrix(tracks, dets) -> np.ndarray:
    """Entry (i, j) is ``1 - IoU(tracks[i], dets[j])``."""
    a = tracks if isinstance(tracks, np.ndarray) else boxes_to_array(list(tracks))
    b = dets if isinstance(dets, np.ndarray) else boxes_to_array(list(dets))
    return 1.0 - iou_matrix(a, b)


def solve_assignment(cost, gate: float = DEFAULT_GATE) -> AssignmentResult:
    """Optimal assignment, then demote any pair whose IoU falls below ``gate``."""
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2:
        raise ValueError("cost matrix must be 2-D")
    n_t, n_d = c.shape
    rows, cols = linear_sum_assignment(c)
    matches = []
    for r, k in zip(rows.tolist(), cols.tolist()):
        if c[r, k] <= 1.0 - gate:
            matches.append((r, k))
    mt = {r for r, _ in matches}
    md = {k for _, k in matches}
    return AssignmentResult(
        matches,
        [i for i in range(n_t) if i not in mt],
        [j for j in range(n_d) if j not in md],
    )


def associate(tracks, dets, gate: float = DEFAULT_GATE) -> AssignmentResult:
    return solve_assignment(build_cost_matrix(tracks, dets), gate)
