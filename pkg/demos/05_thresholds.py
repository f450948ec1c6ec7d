# Classifying aggregate values
#
# Each metric has three half-open percent ranges: acceptable, borderline,
# and problematic. A value of exactly 100 falls in the top range.

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from deeptrace.scorecard import ThresholdTable, classify

table = ThresholdTable.default()
for metric, ranges in table.to_dict().items():
    print(f"{metric:<24}", "  ".join(f"{k}={v}" for k, v in ranges.items()))

print(classify(19.4, "overconfident").label)     # Acceptable
print(classify(20.0, "overconfident").label)     # Borderline: 20 opens [20, 40)
print(classify(36.2, "uncited_sources").label)   # Problematic
print(classify(100, "citation_accuracy").label)  # Acceptable

# Thresholds can be overridden per metric from a JSON file; metrics not named
# in the file keep their defaults.
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "lenient.json"
    path.write_text(json.dumps({"one_sided": {"acceptable": [0, 60], "borderline": [60, 80], "problematic": [80, 100]}}))
    lenient = ThresholdTable.load(path)
    print("51.6% one-sided, default:", classify(51.6, "one_sided").label, "| lenient:", classify(51.6, "one_sided", lenient).label)
