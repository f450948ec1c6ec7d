"""Full-text retrieval of listed sources.

The default backend asks a reader endpoint (``https://r.jina.ai/<url>``) for
the page's main content as markdown. :class:`DirectBackend` fetches the page
itself and strips markup locally. Failures are reported through
:class:`FetchStatus`, never raised.
"""

from __future__ import annotations

import enum
import logging
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from html.parser import HTMLParser
from os import PathLike
from typing import Sequence
from urllib.parse import urlsplit

import httpx

from .cache import JsonDiskCache, content_key

logger = logging.getLogger(__name__)

DEFAULT_READER_BASE = "https://r.jina.ai"
DEFAULT_MAX_IN_FLIGHT = 8

_NOT_FOUND = {404, 410}
_PAYWALLED = {401, 402, 403, 451}
# Reader endpoints report upstream failures in the body with a 200 or 422.
_UPSTREAM_ERROR = re.compile(r"Target URL returned error (\d{3})")


class FetchStatus(str, enum.Enum):
    OK = "ok"
    PAYWALLED = "paywalled"
    NOT_FOUND = "not_found"
    TIMEOUT = "timeout"
    EXTRACTION_ERROR = "extraction_error"


@dataclass(frozen=True)
class FetchOutcome:
    url: str
    status: FetchStatus
    text: str | None = None
    fetched_at: str | None = None
    detail: str | None = None

    def __post_init__(self):
        has_text = bool(self.text and self.text.strip())
        if (self.status is FetchStatus.OK) != has_text:
            raise ValueError("status must be OK exactly when text is present and non-empty")

    @property
    def accessible(self) -> bool:
        return self.status is FetchStatus.OK

    def to_dict(self) -> dict:
        return {
            "url": self.url,
            "status": self.status.value,
            "text": self.text,
            "fetched_at": self.fetched_at,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FetchOutcome":
        return cls(
            url=d["url"],
            status=FetchStatus(d["status"]),
            text=d.get("text"),
            fetched_at=d.get("fetched_at"),
            detail=d.get("detail"),
        )


def _status_for_code(code: int) -> FetchStatus:
    if code in _NOT_FOUND:
        return FetchStatus.NOT_FOUND
    if code in _PAYWALLED:
        return FetchStatus.PAYWALLED
    if code in (408, 504):
        return FetchStatus.TIMEOUT
    return FetchStatus.EXTRACTION_ERROR


class _TextExtractor(HTMLParser):
    _SKIP = {"script", "style", "noscript", "nav", "header", "footer", "aside", "form", "svg", "template"}
    _BLOCK = {"p", "div", "br", "li", "h1", "h2", "h3", "h4", "h5", "h6", "tr", "section", "article", "blockquote"}

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self._skip = 0

    def handle_starttag(self, tag, attrs):
        if tag in self._SKIP:
            self._skip += 1
        elif tag in self._BLOCK:
            self.parts.append("\n")

    def handle_endtag(self, tag):
        if tag in self._SKIP and self._skip:
            self._skip -= 1
        elif tag in self._BLOCK:
            self.parts.append("\n")

    def handle_data(self, data):
        if not self._skip:
            self.parts.append(data)


def html_to_text(html: str) -> str:
    parser = _TextExtractor()
    parser.feed(html)
    parser.close()
    lines = (" ".join(line.split()) for line in "".join(parser.parts).splitlines())
    return "\n".join(line for line in lines if line)


class ReaderBackend:
    """Content extraction through a reader service: ``GET {base}/{url}``."""

    def __init__(self, base: str = DEFAULT_READER_BASE, headers: dict | None = None):
        self.base = base.rstrip("/")
        self.headers = headers or {}

    def request_url(self, url: str) -> str:
        return f"{self.base}/{url}"

    def extract(self, response: httpx.Response) -> tuple[FetchStatus, str | None, str | None]:
        upstream = _UPSTREAM_ERROR.search(response.text[:2000]) if response.status_code in (200, 422) else None
        if upstream:
            return _status_for_code(int(upstream.group(1))), None, upstream.group(0)
        if response.status_code != 200:
            return _status_for_code(response.status_code), None, f"HTTP {response.status_code}"
        text = response.text.strip()
        if not text:
            return FetchStatus.EXTRACTION_ERROR, None, "empty extraction"
        return FetchStatus.OK, text, None


class DirectBackend:
    """Fetch the page itself and strip HTML with the standard-library parser."""

    headers = {"User-Agent": "deeptrace-fetcher/0.1"}

    def request_url(self, url: str) -> str:
        return url

    def extract(self, response: httpx.Response) -> tuple[FetchStatus, str | None, str | None]:
        if response.status_code != 200:
            return _status_for_code(response.status_code), None, f"HTTP {response.status_code}"
        ctype = response.headers.get("content-type", "")
        text = html_to_text(response.text) if "html" in ctype or response.text.lstrip().startswith("<") else response.text
        text = text.strip()
        if not text:
            return FetchStatus.EXTRACTION_ERROR, None, "no text content"
        return FetchStatus.OK, text, None


def _valid_http_url(url: str) -> bool:
    parts = urlsplit(url)
    return parts.scheme in ("http", "https") and bool(parts.netloc)


class Fetcher:
    """Cached, bounded-concurrency source fetcher.

    ``delay_ms`` spaces out successive requests to the same source host.
    Timeouts are not cached, every other outcome is (keyed by exact URL).
    """

    def __init__(
        self,
        backend=None,
        *,
        cache_dir: str | PathLike | None = None,
        ttl: float | None = 7 * 24 * 3600,
        timeout: float = 30.0,
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
        delay_ms: float = 0.0,
        client: httpx.Client | None = None,
    ):
        self.backend = backend or ReaderBackend()
        self.cache = JsonDiskCache(cache_dir, ttl=ttl)
        self.timeout = timeout
        self.max_in_flight = max_in_flight
        self.delay = delay_ms / 1000.0
        self._client = client or httpx.Client(timeout=timeout, follow_redirects=True)
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._host_locks: dict[str, threading.Lock] = {}
        self._host_last: dict[str, float] = {}
        self._lock = threading.Lock()
        self.requests = 0

    def close(self) -> None:
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _host_lock(self, host: str) -> threading.Lock:
        with self._lock:
            lock = self._host_locks.setdefault(host, threading.Lock())
        return lock

    def _request(self, url: str) -> FetchOutcome:
        now = datetime.now(timezone.utc).isoformat(timespec="seconds")
        host = urlsplit(url).netloc
        with self._host_lock(host):
            if self.delay:
                wait = self._host_last.get(host, 0.0) + self.delay - time.monotonic()
                if wait > 0:
                    time.sleep(wait)
            with self._slots:
                with self._lock:
                    self.requests += 1
                try:
                    resp = self._client.get(
                        self.backend.request_url(url), headers=getattr(self.backend, "headers", None)
                    )
                except httpx.TimeoutException as exc:
                    return FetchOutcome(url, FetchStatus.TIMEOUT, fetched_at=now, detail=str(exc) or "timeout")
                except httpx.HTTPError as exc:
                    return FetchOutcome(url, FetchStatus.EXTRACTION_ERROR, fetched_at=now, detail=str(exc))
                finally:
                    self._host_last[host] = time.monotonic()
        status, text, detail = self.backend.extract(resp)
        return FetchOutcome(url, status, text=text, fetched_at=now, detail=detail)

    def fetch_source(self, url: str) -> FetchOutcome:
        url = url.strip()
        if not _valid_http_url(url):
            return FetchOutcome(url, FetchStatus.EXTRACTION_ERROR, detail="not an http(s) URL")
        key = content_key("fetch", url)
        cached = self.cache.get(key)
        if cached is not None:
            return FetchOutcome.from_dict(cached)
        outcome = self._request(url)
        if outcome.status is not FetchStatus.TIMEOUT:
            self.cache.put(key, outcome.to_dict())
        return outcome

    def fetch_all(self, urls: Sequence[str]) -> list[FetchOutcome]:
        """Fetch every URL; outcomes come back in input order.

        Duplicate URLs are fetched once and the later copies read the cache.
        """
        if not urls:
            return []
        unique = list(dict.fromkeys(u.strip() for u in urls))
        with ThreadPoolExecutor(max_workers=min(self.max_in_flight, len(unique))) as pool:
            results = dict(zip(unique, pool.map(self.fetch_source, unique)))
        out = []
        for u in urls:
            u = u.strip()
            if u in results:
                out.append(results.pop(u))
            else:
                out.append(self.fetch_source(u))
        return out


def accessibility_rate(outcomes: Sequence[FetchOutcome]) -> float | None:
    if not outcomes:
        return None
    return sum(o.accessible for o in outcomes) / len(outcomes)
