# Which sources are really needed?
#
# Source necessity asks for the smallest set of sources that still supports
# every supported statement: a minimum hitting set over the rows of the
# support matrix. It is NP-hard in general, but real answers have a few
# dozen rows and columns, where exact branch-and-bound is instant.

from __future__ import annotations

import time

import numpy as np

from deeptrace.errors import InstanceTooLarge
from deeptrace.metrics import maximum_matching_size, minimum_cover, necessity

# Two statements both supported by sources 1 and 2: one source suffices.
shared = np.array([[1, 1], [1, 1]], dtype=np.uint8)
r = necessity(shared)
print("shared rows: cover", sorted(r.necessary_sources), "size", r.cover_size, "matching", r.matching_size)

# Note the matching (2) is larger than the cover (1). A maximum matching pairs
# statements with distinct sources, but a hitting set may reuse one source
# for many statements, so matching size is reported alongside as a
# diagnostic rather than as a bound.

# The identity matrix is the other extreme: every source is necessary.
print("identity:", necessity(np.eye(4, dtype=np.uint8)).cover_size)

# Ties are broken lexicographically, so the result is deterministic.
# Here {1,3} and {2,3} both work; {1,3} wins.
tie = np.array([[1, 1, 0], [0, 0, 1]], dtype=np.uint8)
print("tie-break:", sorted(necessity(tie).necessary_sources))

# A realistic instance: 60 statements x 30 sources, 10% density.
rng = np.random.default_rng(0)
big = (rng.random((60, 30)) < 0.1).astype(np.uint8)
t0 = time.perf_counter()
cols, approximate = minimum_cover(big)
print(f"60x30: cover size {len(cols)} in {time.perf_counter() - t0:.3f}s, approximate={approximate}")
print("matching size:", maximum_matching_size(big))

# The search has a node budget. With greedy_fallback=False, exceeding the
# budget fails loudly; with the default it returns the greedy cover and marks
# the result approximate.
try:
    minimum_cover(big, node_budget=5, greedy_fallback=False)
except InstanceTooLarge as exc:
    print("strict:", exc)
cols, approximate = minimum_cover(big, node_budget=5)
print(f"greedy fallback: size {len(cols)}, approximate={approximate}")
