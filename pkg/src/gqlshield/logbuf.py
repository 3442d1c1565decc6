"""Batched JSON-lines event logging.

Events buffer in memory and flush when the buffer reaches ``batch_size``
entries or ``flush_interval`` seconds elapse, and always on close. Events
that fail to serialize are written with an ``error`` field instead of
being dropped.
"""

from __future__ import annotations

import json
import threading
from typing import Any

DEFAULT_BATCH_SIZE = 100
DEFAULT_FLUSH_INTERVAL = 0.5


class BatchLogWriter:
    def __init__(self, path: str, batch_size: int = DEFAULT_BATCH_SIZE,
                 flush_interval: float = DEFAULT_FLUSH_INTERVAL):
        self.path = path
        self.batch_size = batch_size
        self.flush_interval = flush_interval
        self._buffer: list[str] = []
        self._lock = threading.Lock()
        self._closed = threading.Event()
        self._flush_count = 0
        self._flusher = threading.Thread(target=self._flush_loop, daemon=True)
        self._flusher.start()

    def log(self, event: Any) -> None:
        try:
            line = json.dumps(event, separators=(",", ":"), default=str)
        except Exception as exc:
            try:
                shown = repr(event)[:500]
            except Exception:
                shown = "<repr failed>"
            line = json.dumps({"error": f"unserializable event: {exc}",
                               "repr": shown})
        flush_now = False
        with self._lock:
            self._buffer.append(line)
            flush_now = len(self._buffer) >= self.batch_size
        if flush_now:
            self.flush()

    def flush(self) -> None:
        with self._lock:
            if not self._buffer:
                return
            lines, self._buffer = self._buffer, []
            self._flush_count += 1
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    @property
    def flush_count(self) -> int:
        return self._flush_count

    def close(self) -> None:
        self._closed.set()
        self._flusher.join(timeout=self.flush_interval * 4)
        self.flush()

    def _flush_loop(self) -> None:
        while not self._closed.wait(self.flush_interval):
            self.flush()


class NullLogWriter:
    """Drop-in writer for contexts without a log path."""

    flush_count = 0

    def log(self, event: Any) -> None:
        pass

    def flush(self) -> None:
        pass

    def close(self) -> None:
        pass
