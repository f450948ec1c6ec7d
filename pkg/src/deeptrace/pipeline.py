"""End-to-end audit runs over a corpus and a directory of transcripts.

Run directory layout::

    <out>/records/<query_id>__<engine>.json   AuditRecord
    <out>/metrics/<query_id>__<engine>.json   RecordSummary (per-record metrics)
    <out>/scorecards.json                      all engines, JSON
    <out>/scorecard.md                         all engines, markdown
    <out>/manifest.json                        config hash, prompt version, cache stats, skips, failures
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path
from typing import Sequence

from .analysis import (
    PARTIAL_IGNORE,
    AuditRecord,
    SourceEntry,
    build_citation_matrix,
    build_statements,
    build_support_matrix,
    count_discarded_marks,
    record_metrics,
)
from .cache import content_key
from .corpus import Corpus, Query
from .errors import DeepTraceError
from .fetcher import DEFAULT_READER_BASE, DirectBackend, Fetcher, ReaderBackend
from .judge import HttpChatBackend, Judge, JudgeConfig, MockJudge
from .metrics import DEFAULT_NODE_BUDGET
from .scorecard import RecordSummary, ThresholdTable, aggregate_by_engine, render_report
from .transcript import Transcript, attach_marks, load_transcript, parse_citation_marks, transcript_filename

logger = logging.getLogger(__name__)

MANIFEST_SCHEMA = "deeptrace.manifest/1"


@dataclass(frozen=True)
class AuditConfig:
    judge: JudgeConfig = field(default_factory=JudgeConfig)
    mock_judge: str | None = None  # fixture path; "" selects the rule-based mock alone
    reader_base: str = DEFAULT_READER_BASE
    fetch_backend: str = "reader"
    fetch_delay_ms: float = 0.0
    fetch_timeout: float = 30.0
    fetch_max_in_flight: int = 8
    cache_dir: str | None = None  # defaults to <out>/cache
    partial_support: str = PARTIAL_IGNORE
    strict: bool = False
    thresholds: str | None = None
    node_budget: int = DEFAULT_NODE_BUDGET
    greedy_fallback: bool = True
    record_workers: int = 4

    def fingerprint(self) -> dict:
        d = dataclasses.asdict(self)
        d["judge"].pop("cache_dir", None)
        d.pop("cache_dir", None)
        d.pop("record_workers", None)
        return json.loads(json.dumps(d, default=str))


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def audit_transcript(
    query: Query,
    transcript: Transcript,
    judge: Judge,
    fetcher: Fetcher,
    partial: str = PARTIAL_IGNORE,
) -> AuditRecord:
    """Run every judge and fetch step for one transcript."""
    answer = transcript.answer_text
    k = transcript.n_sources
    marks = parse_citation_marks(answer, k)
    decomp = judge.decompose_answer(query.text, answer)
    marks = attach_marks(marks, [s.span for s in decomp.sentences])

    stance = confidence = None
    if query.is_debate:
        core = [s.text for s in decomp.sentences if s.core]
        if core:
            stance = judge.classify_stance(query.text, core)
        confidence = judge.score_confidence(query.text, answer).level
    relevant, filler = build_statements(decomp, stance)
    citation = build_citation_matrix(relevant, marks, k)

    outcomes = fetcher.fetch_all([s.url for s in transcript.listed_sources])
    support, _ = build_support_matrix(relevant, outcomes, judge, partial)
    sources = [
        SourceEntry(s.index, s.url, o.accessible, o.status.value, s.title)
        for s, o in zip(transcript.listed_sources, outcomes)
    ]
    per_sentence = [0] * len(decomp.sentences)
    for m in marks:
        if m.sentence is not None:
            per_sentence[m.sentence] += 1
    record = AuditRecord(
        query_id=query.id,
        query_text=query.text,
        category=query.category.value,
        engine=transcript.engine,
        answer_text=answer,
        statements=relevant,
        filler=filler,
        sources=sources,
        marks=marks,
        citation=citation,
        support=support,
        confidence=confidence,
        captured_at=transcript.captured_at,
        partial_policy=partial,
    )
    record.diagnostics = {
        "marks_per_sentence": per_sentence,
        "discarded_marks": count_discarded_marks(relevant, marks),
        "dangling_marks": sum(m.dangling for m in marks),
        "n_citations": record.n_citations,
    }
    return record


def summarize(record: AuditRecord, *, node_budget: int = DEFAULT_NODE_BUDGET, greedy_fallback: bool = True) -> RecordSummary:
    return RecordSummary(
        query_id=record.query_id,
        engine=record.engine,
        category=record.category,
        metrics=record_metrics(record, node_budget=node_budget, greedy_fallback=greedy_fallback),
        n_sources=len(record.sources),
        n_statements=record.n_total,
        n_citations=record.n_citations,
        confidence=record.confidence,
    )


def discover_transcripts(transcripts_dir: str | PathLike) -> dict[tuple[str, str], Path]:
    found = {}
    for path in sorted(Path(transcripts_dir).glob("*__*.json")):
        query_id, _, engine = path.stem.rpartition("__")
        found[(query_id, engine)] = path
    return found


def _make_judge(config: AuditConfig, cache_root: Path) -> Judge:
    cfg = dataclasses.replace(config.judge, cache_dir=str(cache_root / "judge"))
    if config.mock_judge is not None:
        backend = MockJudge.from_file(config.mock_judge) if config.mock_judge else MockJudge()
        # keep mock verdicts out of any cache shared with a real model
        cfg = dataclasses.replace(cfg, model_name=f"mock/{cfg.model_name}")
    else:
        backend = HttpChatBackend(cfg.endpoint, cfg.model_name, cfg.temperature)
    return Judge(backend, cfg)


def _make_fetcher(config: AuditConfig, cache_root: Path) -> Fetcher:
    backend = DirectBackend() if config.fetch_backend == "direct" else ReaderBackend(config.reader_base)
    return Fetcher(
        backend,
        cache_dir=cache_root / "pages",
        timeout=config.fetch_timeout,
        max_in_flight=config.fetch_max_in_flight,
        delay_ms=config.fetch_delay_ms,
    )


def run_audit(
    corpus: Corpus,
    transcripts_dir: str | PathLike,
    out_dir: str | PathLike,
    config: AuditConfig | None = None,
    *,
    judge: Judge | None = None,
    fetcher: Fetcher | None = None,
) -> Path:
    """Audit every (query, engine) transcript and write the run directory.

    Per-record failures are listed in the manifest and the run continues,
    unless ``config.strict`` is set.
    """
    config = config or AuditConfig()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cache_root = Path(config.cache_dir) if config.cache_dir else out / "cache"
    judge = judge or _make_judge(config, cache_root)
    own_fetcher = fetcher is None
    fetcher = fetcher or _make_fetcher(config, cache_root)
    table = ThresholdTable.load(config.thresholds) if config.thresholds else ThresholdTable.default()

    available = discover_transcripts(transcripts_dir)
    engines = sorted({e for _, e in available})
    known = {q.id for q in corpus}
    jobs, skipped = [], []
    for q in corpus:
        for e in engines:
            path = available.get((q.id, e))
            if path is None:
                skipped.append({"query_id": q.id, "engine": e, "reason": "missing transcript"})
            else:
                jobs.append((q, e, path))
    orphans = sorted(f"{qid}__{e}" for qid, e in available if qid not in known)

    judge_stats0 = judge.cache.stats()
    fetch_stats0 = fetcher.cache.stats()
    judge_calls0 = getattr(judge.backend, "calls", 0)
    fetch_calls0 = fetcher.requests

    def process(job):
        q, e, path = job
        name = transcript_filename(q.id, e)
        try:
            transcript = load_transcript(path)
            if transcript.query_id != q.id or transcript.engine != e:
                raise DeepTraceError(f"{path.name}: file name disagrees with query_id/engine fields")
            record = audit_transcript(q, transcript, judge, fetcher, config.partial_support)
            summary = summarize(record, node_budget=config.node_budget, greedy_fallback=config.greedy_fallback)
        except Exception as exc:
            if config.strict:
                raise
            logger.warning("record %s failed: %s", name, exc)
            return name, None, None, f"{type(exc).__name__}: {exc}"
        return name, record, summary, None

    try:
        with ThreadPoolExecutor(max_workers=max(1, config.record_workers)) as pool:
            results = list(pool.map(process, jobs))
    finally:
        if own_fetcher:
            fetcher.close()

    summaries, failures, outcomes_ok = [], [], []
    for name, record, summary, error in results:
        if error is not None:
            failures.append({"record": name, "error": error})
            continue
        atomic_write_text(out / "records" / name, _dump(record.to_dict()))
        atomic_write_text(out / "metrics" / name, _dump(summary.to_dict()))
        summaries.append(summary)
        outcomes_ok.extend(s.accessible for s in record.sources)

    if summaries:
        cards = aggregate_by_engine(summaries, table)
        atomic_write_text(out / "scorecards.json", render_report(cards, "json"))
        atomic_write_text(out / "scorecard.md", render_report(cards, "markdown"))

    def delta(now, then):
        return {k: now[k] - then[k] for k in now}

    fingerprint = config.fingerprint()
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "config": fingerprint,
        "config_hash": content_key(fingerprint),
        "prompt_version": judge.cfg.prompt_version,
        "judge_model": judge.cfg.model_name,
        "aggregation": "macro",
        "corpus": {"name": corpus.name, "n_queries": len(corpus)},
        "engines": engines,
        "records": sorted(r[0] for r in results if r[3] is None),
        "skipped": skipped,
        "orphan_transcripts": orphans,
        "failures": sorted(failures, key=lambda f: f["record"]),
        "cache": {"judge": delta(judge.cache.stats(), judge_stats0), "fetch": delta(fetcher.cache.stats(), fetch_stats0)},
        "network_calls": {
            "judge": getattr(judge.backend, "calls", 0) - judge_calls0,
            "fetch": fetcher.requests - fetch_calls0,
        },
        "accessibility_rate": (sum(outcomes_ok) / len(outcomes_ok)) if outcomes_ok else None,
    }
    atomic_write_text(out / "manifest.json", _dump(manifest))
    return out


def load_run_summaries(run_dir: str | PathLike) -> list[RecordSummary]:
    paths: Sequence[Path] = sorted((Path(run_dir) / "metrics").glob("*.json"))
    return [RecordSummary.from_dict(json.loads(p.read_text(encoding="utf-8"))) for p in paths]
