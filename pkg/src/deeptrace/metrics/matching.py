"""Hopcroft-Karp maximum-cardinality matching on a bipartite (statement, source) graph."""

from __future__ import annotations

from collections import deque
from typing import Sequence

import numpy as np

_INF = float("inf")


def adjacency_from_matrix(matrix) -> list[list[int]]:
    """Row -> sorted list of columns with a nonzero entry."""
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    return [list(np.flatnonzero(row)) for row in m]


def hopcroft_karp(adj: Sequence[Sequence[int]], n_right: int) -> tuple[int, list[int]]:
    """Maximum matching between ``len(adj)`` left vertices and ``n_right`` right vertices.

    Returns ``(size, match_left)`` where ``match_left[u]`` is the right vertex
    matched to ``u`` or -1.
    """
    n_left = len(adj)
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    dist = [0.0] * n_left

    def bfs() -> bool:
        queue = deque()
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = _INF
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(root: int) -> bool:
        # Iterative layered DFS; the stack holds (left vertex, next edge position).
        stack = [(root, 0)]
        path: list[tuple[int, int]] = []
        while stack:
            u, i = stack[-1]
            if i >= len(adj[u]):
                dist[u] = _INF
                stack.pop()
                if path:
                    path.pop()
                continue
            stack[-1] = (u, i + 1)
            v = adj[u][i]
            w = match_r[v]
            if w == -1:
                path.append((u, v))
                for pu, pv in path:
                    match_l[pu] = pv
                    match_r[pv] = pu
                return True
            if dist[w] == dist[u] + 1:
                path.append((u, v))
                stack.append((w, 0))
        return False

    size = 0
    while bfs():
        for u in range(n_left):
            if match_l[u] == -1 and dfs(u):
                size += 1
    return size, match_l


def maximum_matching_size(matrix) -> int:
    m = np.asarray(matrix)
    if m.size == 0:
        return 0
    size, _ = hopcroft_karp(adjacency_from_matrix(m), m.shape[1])
    return size
