"""Transcript-driven auditing of generative search engines and deep-research agents."""

from .analysis import AuditRecord, Statement, SupportAnalysis, build_citation_matrix, build_statements, build_support_matrix
from .corpus import Category, Corpus, Query, filter_by_category, load_corpus
from .fetcher import FetchOutcome, Fetcher, FetchStatus
from .judge import Judge, JudgeConfig, MockJudge
from .metrics import Metric, MetricValue, compute_metrics, source_necessity
from .pipeline import AuditConfig, run_audit
from .scorecard import Classification, Scorecard, ThresholdTable, aggregate, classify, render_report
from .transcript import CitationMark, Transcript, load_transcript, parse_citation_marks

__version__ = "0.1.0"

__all__ = [
    "AuditConfig",
    "AuditRecord",
    "Category",
    "CitationMark",
    "Classification",
    "Corpus",
    "FetchOutcome",
    "FetchStatus",
    "Fetcher",
    "Judge",
    "JudgeConfig",
    "Metric",
    "MetricValue",
    "MockJudge",
    "Query",
    "Scorecard",
    "Statement",
    "SupportAnalysis",
    "ThresholdTable",
    "Transcript",
    "aggregate",
    "build_citation_matrix",
    "build_statements",
    "build_support_matrix",
    "classify",
    "compute_metrics",
    "filter_by_category",
    "load_corpus",
    "load_transcript",
    "parse_citation_marks",
    "render_report",
    "run_audit",
    "source_necessity",
]
