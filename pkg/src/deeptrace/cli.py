"""Command-line entry point: ``deeptrace audit|metrics|report``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .analysis import PARTIAL_COUNT, PARTIAL_IGNORE, AuditRecord
from .corpus import load_corpus
from .errors import DeepTraceError
from .fetcher import DEFAULT_READER_BASE
from .judge import JudgeConfig
from .pipeline import AuditConfig, load_run_summaries, run_audit, summarize
from .scorecard import ThresholdTable, aggregate_by_engine, render_report


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deeptrace", description="Audit generative search engine transcripts.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("audit", help="run the full pipeline over a corpus and transcripts")
    a.add_argument("--corpus", required=True, help="JSON-lines query corpus")
    a.add_argument("--transcripts", required=True, help="directory of <query_id>__<engine>.json files")
    a.add_argument("--out", required=True, help="run directory to write")
    a.add_argument("--judge-model", default=JudgeConfig.model_name)
    a.add_argument("--judge-endpoint", default=JudgeConfig.endpoint, help="chat-completions base URL")
    a.add_argument("--mock-judge", nargs="?", const="", default=None, metavar="FIXTURE",
                   help="use the deterministic mock judge, optionally with a fixture file")
    a.add_argument("--max-retries", type=int, default=JudgeConfig.max_retries)
    a.add_argument("--max-in-flight", type=int, default=JudgeConfig.max_in_flight)
    a.add_argument("--partial-support", choices=(PARTIAL_COUNT, PARTIAL_IGNORE), default=PARTIAL_IGNORE)
    a.add_argument("--reader-base", default=DEFAULT_READER_BASE)
    a.add_argument("--fetch-backend", choices=("reader", "direct"), default="reader")
    a.add_argument("--fetch-delay-ms", type=float, default=0.0)
    a.add_argument("--fetch-timeout", type=float, default=30.0)
    a.add_argument("--cache-dir", default=None, help="shared cache root (default <out>/cache)")
    a.add_argument("--thresholds", default=None, help="JSON file overriding the default thresholds")
    a.add_argument("--strict", action="store_true", help="abort on the first failing record")

    m = sub.add_parser("metrics", help="compute metrics for one saved AuditRecord")
    m.add_argument("--record", required=True)

    r = sub.add_parser("report", help="render scorecards from a run directory")
    r.add_argument("--run", required=True)
    r.add_argument("--format", choices=("json", "markdown"), default="markdown")
    r.add_argument("--thresholds", default=None)
    return parser


def _audit(args) -> int:
    config = AuditConfig(
        judge=JudgeConfig(
            endpoint=args.judge_endpoint,
            model_name=args.judge_model,
            max_retries=args.max_retries,
            max_in_flight=args.max_in_flight,
        ),
        mock_judge=args.mock_judge,
        reader_base=args.reader_base,
        fetch_backend=args.fetch_backend,
        fetch_delay_ms=args.fetch_delay_ms,
        fetch_timeout=args.fetch_timeout,
        cache_dir=args.cache_dir,
        partial_support=args.partial_support,
        strict=args.strict,
        thresholds=args.thresholds,
    )
    out = run_audit(load_corpus(args.corpus), args.transcripts, args.out, config)
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    print(
        f"{len(manifest['records'])} records audited, {len(manifest['skipped'])} skipped, "
        f"{len(manifest['failures'])} failed -> {out}"
    )
    return 1 if manifest["failures"] else 0


def _metrics(args) -> int:
    summary = summarize(AuditRecord.load(args.record))
    sys.stdout.write(json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n")
    return 0


def _report(args) -> int:
    table = ThresholdTable.load(args.thresholds) if args.thresholds else ThresholdTable.default()
    summaries = load_run_summaries(args.run)
    if not summaries:
        print(f"no per-record metrics under {Path(args.run) / 'metrics'}", file=sys.stderr)
        return 2
    sys.stdout.write(render_report(aggregate_by_engine(summaries, table), args.format))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return {"audit": _audit, "metrics": _metrics, "report": _report}[args.command](args)
    except (DeepTraceError, OSError) as exc:
        print(f"deeptrace: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
