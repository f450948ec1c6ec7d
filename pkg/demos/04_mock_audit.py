# An offline end-to-end audit
#
# The test fixture corpus has three queries and one engine, "alpha". We run
# the whole pipeline with the deterministic mock judge, and serve the source
# pages through an in-process httpx transport instead of the network.
# Run from the repository root.

from __future__ import annotations

import json
import tempfile
from pathlib import Path

import httpx

from deeptrace.corpus import load_corpus
from deeptrace.fetcher import Fetcher, ReaderBackend
from deeptrace.pipeline import AuditConfig, run_audit

fixture = Path(__file__).resolve().parents[1] / "tests" / "data" / "e2e"
pages = json.loads((fixture / "pages.json").read_text())
base = "http://reader.local"


def handler(request: httpx.Request) -> httpx.Response:
    # The reader endpoint receives the page URL as its path.
    url = request.url.raw_path.decode()[1:]
    if url in pages:
        return httpx.Response(200, text=pages[url])
    return httpx.Response(404, text="not found")


corpus = load_corpus(fixture / "corpus.jsonl")
print(f"{len(corpus)} queries:", [(q.id, q.category.value) for q in corpus])

with tempfile.TemporaryDirectory() as tmp:
    config = AuditConfig(mock_judge=str(fixture / "mock_judge.json"), cache_dir=str(Path(tmp) / "cache"))
    fetcher = Fetcher(ReaderBackend(base), client=httpx.Client(transport=httpx.MockTransport(handler)))
    run = run_audit(corpus, fixture / "transcripts", Path(tmp) / "run", config, fetcher=fetcher)

    print((run / "scorecard.md").read_text())

    manifest = json.loads((run / "manifest.json").read_text())
    print("network calls:", manifest["network_calls"])
    print("accessible sources:", f"{manifest['accessibility_rate']:.2f}")

    # Each record is self-contained: the metrics can be recomputed from it
    # without the judge or the network.
    record = json.loads((run / "records" / "q1__alpha.json").read_text())
    print("q1 support matrix:", record["support_matrix"], "columns", record["support_columns"])
