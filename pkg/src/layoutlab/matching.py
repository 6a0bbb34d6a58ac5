"""Minimum-cost bipartite assignment via the potential-based Hungarian method."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MatchResult:
    """An injective row-to-column assignment and its total cost."""

    assignment: tuple[int, ...]
    total_cost: float

    def __post_init__(self) -> None:
        if len(set(self.assignment)) != len(self.assignment):
            raise ValueError("assignment must be injective")


def hungarian(cost) -> MatchResult:
    """Optimal assignment of each row to a distinct column, n rows <= m columns.

    Runs the O(n^2 m) shortest-augmenting-path formulation with row/column
    potentials; rectangular matrices are handled directly, no padding needed.
    """
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2:
        raise ValueError(f"cost must be a 2-D matrix, got shape {c.shape}")
    n, m = c.shape
    if n > m:
        raise ValueError(f"need rows <= columns, got {n}x{m}")
    if n > 0 and not np.isfinite(c).all():
        raise ValueError("costs must be finite")
    if n == 0:
        return MatchResult((), 0.0)

    inf = float("inf")
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    p = [0] * (m + 1)  # p[j]: row (1-based) currently matched to column j
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            for j in range(1, m + 1):
                if used[j]:
                    continue
                cur = c[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    assignment = [-1] * n
    for j in range(1, m + 1):
        if p[j]:
            assignment[p[j] - 1] = j - 1
    total = float(sum(c[i, assignment[i]] for i in range(n)))
    return MatchResult(tuple(assignment), total)
