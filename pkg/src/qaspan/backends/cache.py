"""Append-only, replayable response cache.

Each record is one JSON line ``{"key": ..., "request": ..., "response": ...}``.
A trailing partial line (a crash mid-write) is cut off when the file is
opened; every complete record before it is kept.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
from pathlib import Path
from typing import Any

log = logging.getLogger(__name__)


def cache_key(*parts: str) -> str:
    h = hashlib.sha256()
    for p in parts:
        b = p.encode("utf-8")
        h.update(len(b).to_bytes(8, "big"))
        h.update(b)
    return h.hexdigest()


class ResponseCache:
    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._data: dict[str, Any] = {}
        self._lock = threading.Lock()
        if self.path is not None:
            self._load()

    def _load(self) -> None:
        if not self.path.exists():
            self.path.parent.mkdir(parents=True, exist_ok=True)
            return
        raw = self.path.read_bytes()
        good = 0
        pos = 0
        while pos < len(raw):
            nl = raw.find(b"\n", pos)
            if nl < 0:
                break
            line = raw[pos:nl]
            try:
                rec = json.loads(line)
                self._data[rec["key"]] = rec["response"]
            except (ValueError, KeyError, TypeError):
                break
            pos = nl + 1
            good = pos
        if good < len(raw):
            log.warning("cache %s: dropping %d bytes of partial trailing record",
                        self.path, len(raw) - good)
            with open(self.path, "r+b") as fh:
                fh.truncate(good)

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, key: str) -> bool:
        return key in self._data

    def get(self, key: str, default: Any = None) -> Any:
        return self._data.get(key, default)

    def put(self, key: str, request: Any, response: Any) -> Any:
        """Store a response; returns the stored value, which wins if one already exists."""
        with self._lock:
            if key in self._data:
                return self._data[key]
            self._data[key] = response
            if self.path is None:
                return response
            line = json.dumps({"key": key, "request": request, "response": response},
                              ensure_ascii=False, sort_keys=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            return response
