from .definitions import (
    DEBATE_ONLY,
    Metric,
    MetricValue,
    Stance,
    citation_accuracy,
    citation_overlap,
    citation_thoroughness,
    compute_metrics,
    metrics_from_dict,
    metrics_to_dict,
    one_sided,
    overconfident,
    relevant_ratio,
    source_necessity,
    uncited_sources_ratio,
    unsupported_ratio,
)
from .matching import hopcroft_karp, maximum_matching_size
from .necessity import DEFAULT_NODE_BUDGET, NecessityResult, greedy_cover, minimum_cover, necessity

__all__ = [
    "DEBATE_ONLY",
    "DEFAULT_NODE_BUDGET",
    "Metric",
    "MetricValue",
    "NecessityResult",
    "Stance",
    "citation_accuracy",
    "citation_overlap",
    "citation_thoroughness",
    "compute_metrics",
    "greedy_cover",
    "hopcroft_karp",
    "maximum_matching_size",
    "metrics_from_dict",
    "metrics_to_dict",
    "minimum_cover",
    "necessity",
    "one_sided",
    "overconfident",
    "relevant_ratio",
    "source_necessity",
    "uncited_sources_ratio",
    "unsupported_ratio",
]
