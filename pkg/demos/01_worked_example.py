# A worked audit by hand
#
# An answer with 7 sentences cites 5 sources. The first sentence is filler
# ("That's a great question!"), so 6 statements are relevant. We write down
# the two matrices directly. Rows are relevant statements and columns are
# listed sources, then we compute all eight metrics.

from __future__ import annotations

import numpy as np

from deeptrace.metrics import Metric, compute_metrics


def cells(rows, cols, ones):
    m = np.zeros((rows, cols), dtype=np.uint8)
    for r, c in ones:
        m[r - 1, c - 1] = 1
    return m


# Citation matrix: which sources each statement points at with [n] markers.
citation = cells(6, 5, [(1, 1), (2, 2), (4, 2), (5, 5), (3, 1), (3, 3), (6, 4)])

# Support matrix: which sources actually back each statement, as judged
# against the fetched page text. Statement 3 has no support at all.
support = cells(6, 5, [(1, 1), (1, 4), (2, 2), (2, 5), (4, 1), (4, 2), (5, 3), (5, 5), (6, 2), (6, 3)])

print("citation\n", citation)
print("support\n", support)

# Stances of the relevant statements with respect to the question.
stances = ["pro", "pro", "con", "pro", "con", "neutral"]

metrics = compute_metrics(
    is_debate=True,
    n_total=7,
    stances=stances,
    confidence=4,
    citation=citation,
    support=support,
    n_listed=5,
)

# Ratio metrics are exact fractions. They are kept unreduced so 4/10 still
# shows "4 supported citations out of 10 support links".
for m in Metric:
    v = metrics[m]
    shown = v.to_dict()["value"]
    print(f"{m.label:<24} {shown!s:<8} {'' if v.as_fraction is None else f'{float(v.as_fraction):.3f}'}")

# The necessity metric also reports which sources form the minimum cover.
print("necessary sources:", metrics[Metric.SOURCE_NECESSITY].extras["cover"])

# Both pro and con statements are present, so the answer is not one-sided,
# and therefore it cannot be overconfident whatever its confidence.
assert metrics[Metric.ONE_SIDED].value is False
