"""Content-addressed JSON cache on disk, shared by the judge and the fetcher."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
import time
from os import PathLike
from pathlib import Path
from typing import Any

__all__ = ["JsonDiskCache", "content_key"]


def content_key(*parts: Any) -> str:
    """Stable sha256 hex digest of a JSON-serializable tuple of parts."""
    blob = json.dumps(parts, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class JsonDiskCache:
    """Maps hex keys to JSON values stored as ``<dir>/<key[:2]>/<key>.json``.

    With ``directory=None`` the cache lives in memory only. Writes go through a
    temp file and ``os.replace`` so concurrent readers never see partial files.
    Entries older than ``ttl`` seconds are treated as missing.
    """

    def __init__(self, directory: str | PathLike | None = None, ttl: float | None = None):
        self.directory = Path(directory) if directory is not None else None
        self.ttl = ttl
        self._mem: dict[str, tuple[float, Any]] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        assert self.directory is not None
        return self.directory / key[:2] / f"{key}.json"

    def _fresh(self, stored_at: float) -> bool:
        return self.ttl is None or (time.time() - stored_at) <= self.ttl

    def get(self, key: str) -> Any | None:
        with self._lock:
            entry = self._mem.get(key)
        if entry is None and self.directory is not None:
            try:
                payload = json.loads(self._path(key).read_text(encoding="utf-8"))
                entry = (float(payload["stored_at"]), payload["value"])
            except (OSError, ValueError, KeyError):
                entry = None
        with self._lock:
            if entry is not None and self._fresh(entry[0]):
                self._mem[key] = entry
                self.hits += 1
                return entry[1]
            self.misses += 1
        return None

    def put(self, key: str, value: Any) -> None:
        stored_at = time.time()
        with self._lock:
            self._mem[key] = (stored_at, value)
        if self.directory is None:
            return
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = json.dumps({"stored_at": stored_at, "value": value}, ensure_ascii=False, sort_keys=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def stats(self) -> dict[str, int]:
        with self._lock:
            return {"hits": self.hits, "misses": self.misses}
