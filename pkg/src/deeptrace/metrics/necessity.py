"""Minimum set of sources that keeps every supported statement supported.

Rows of the support matrix are statements, columns are sources. A selection
of columns is valid when each row holding at least one 1 has a selected 1;
all-zero rows impose nothing. The search is exact (iterative deepening with a
disjoint-row lower bound and memoization) up to a node budget, after which it
can fall back to greedy set cover.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InstanceTooLarge
from .matching import maximum_matching_size

DEFAULT_NODE_BUDGET = 1_000_000


@dataclass(frozen=True)
class NecessityResult:
    necessary_sources: frozenset[int]
    cover_size: int
    matching_size: int
    approximate: bool = False

    def __post_init__(self):
        if self.cover_size != len(self.necessary_sources):
            raise ValueError("cover_size must equal the number of necessary sources")


class _BudgetExceeded(Exception):
    pass


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _reduce(rows: Sequence[int]) -> list[int]:
    """Drop duplicate rows and rows that contain another row (implied constraints)."""
    uniq = sorted(set(rows), key=lambda r: (bin(r).count("1"), r))
    kept: list[int] = []
    for r in uniq:
        if not any(k & r == k for k in kept):
            kept.append(r)
    return kept


def _packing_bound(rows: Sequence[int]) -> int:
    """Greedy count of pairwise-disjoint rows; each needs its own column."""
    used = 0
    count = 0
    for r in sorted(rows, key=lambda r: bin(r).count("1")):
        if not r & used:
            used |= r
            count += 1
    return count


class _Search:
    def __init__(self, node_budget: int):
        self.node_budget = node_budget
        self.nodes = 0
        self.memo: dict[tuple, bool] = {}

    def feasible(self, rows: Sequence[int], allowed: int, k: int) -> bool:
        """Can ``k`` columns from ``allowed`` hit every row?"""
        eff = _reduce([r & allowed for r in rows])
        if not eff:
            return True
        if eff[0] == 0 or k == 0:
            return False
        key = (tuple(eff), k)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise _BudgetExceeded
        if _packing_bound(eff) > k:
            result = False
        else:
            pivot = min(eff, key=lambda r: bin(r).count("1"))
            result = False
            tried = 0
            for c in _bits(pivot):
                bit = 1 << c
                rest = [r for r in eff if not r & bit]
                if self.feasible(rest, allowed & ~tried & ~bit, k - 1):
                    result = True
                    break
                tried |= bit
        self.memo[key] = result
        return result


def greedy_cover(rows: Sequence[int], n_cols: int) -> list[int]:
    """Classic greedy set cover; ties go to the lowest column."""
    remaining = [r for r in rows if r]
    chosen: list[int] = []
    while remaining:
        best = max(range(n_cols), key=lambda c: (sum(1 for r in remaining if r >> c & 1), -c))
        chosen.append(best)
        remaining = [r for r in remaining if not r >> best & 1]
    return sorted(chosen)


def _lexicographic_cover(search: _Search, rows: list[int], n_cols: int, k: int) -> list[int]:
    chosen: list[int] = []
    remaining = rows
    start = 0
    for step in range(k):
        for c in range(start, n_cols):
            bit = 1 << c
            if not any(r & bit for r in remaining):
                continue
            rest = [r for r in remaining if not r & bit]
            later = ((1 << n_cols) - 1) & ~((1 << (c + 1)) - 1)
            if search.feasible(rest, later, k - step - 1):
                chosen.append(c)
                remaining = rest
                start = c + 1
                break
        else:  # pragma: no cover - k is the proven optimum
            raise AssertionError("no completion for a feasible cover size")
    return chosen


def minimum_cover(support, node_budget: int = DEFAULT_NODE_BUDGET, greedy_fallback: bool = True) -> tuple[list[int], bool]:
    """0-based column indices of the lexicographically smallest minimum cover.

    Returns ``(columns, approximate)``; ``approximate`` is True when the node
    budget ran out and the greedy cover was used instead.
    """
    m = np.asarray(support, dtype=np.uint8)
    if m.ndim != 2:
        raise ValueError("support must be a 2-d matrix")
    n_cols = m.shape[1]
    rows = [int(sum(1 << int(c) for c in np.flatnonzero(row))) for row in m]
    rows = _reduce([r for r in rows if r])
    if not rows:
        return [], False
    upper = greedy_cover(rows, n_cols)
    search = _Search(node_budget)
    try:
        k = len(upper)
        for size in range(_packing_bound(rows), len(upper)):
            if search.feasible(rows, (1 << n_cols) - 1, size):
                k = size
                break
        return _lexicographic_cover(search, rows, n_cols, k), False
    except _BudgetExceeded:
        if not greedy_fallback:
            raise InstanceTooLarge(node_budget) from None
        return upper, True


def necessity(
    support,
    columns: Sequence[int] | None = None,
    *,
    node_budget: int = DEFAULT_NODE_BUDGET,
    greedy_fallback: bool = True,
) -> NecessityResult:
    """Necessary sources (as listing indices via ``columns``) plus the matching size."""
    m = np.asarray(support, dtype=np.uint8)
    if m.ndim != 2:
        m = m.reshape(0, 0)
    cols = list(columns) if columns is not None else list(range(1, m.shape[1] + 1))
    if len(cols) != m.shape[1]:
        raise ValueError("column map length does not match support matrix width")
    picked, approximate = minimum_cover(m, node_budget, greedy_fallback)
    return NecessityResult(
        necessary_sources=frozenset(cols[c] for c in picked),
        cover_size=len(picked),
        matching_size=maximum_matching_size(m),
        approximate=approximate,
    )
