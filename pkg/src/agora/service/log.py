"""Append-only newline-delimited JSON event log.

Every state change in the service is one JSON record on one line; replay
folds the records back into identical in-memory state.  A torn final
line (the process died mid-write) is detected and ignored on replay, and
the next append truncates it away.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Iterator


def canonical_json(value) -> str:
    """Stable byte representation: sorted keys, no whitespace."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


class EventLog:
    def __init__(self, path: Path | str):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._valid_bytes = self._scan_valid_prefix()

    def _scan_valid_prefix(self) -> int:
        """Byte length of the longest prefix of whole, parseable lines."""
        if not self.path.exists():
            return 0
        good = 0
        with self.path.open("rb") as fh:
            for line in fh:
                if not line.endswith(b"\n"):
                    break  # torn tail from an interrupted write
                try:
                    json.loads(line)
                except json.JSONDecodeError:
                    break
                good += len(line)
        return good

    def replay(self) -> Iterator[dict]:
        if not self.path.exists():
            return
        read = 0
        with self.path.open("rb") as fh:
            for line in fh:
                if read >= self._valid_bytes:
                    break
                read += len(line)
                yield json.loads(line)

    def append(self, record: dict) -> None:
        data = (canonical_json(record) + "\n").encode("utf-8")
        with self._lock:
            with self.path.open("r+b" if self.path.exists() else "wb") as fh:
                fh.truncate(self._valid_bytes)
                fh.seek(self._valid_bytes)
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            self._valid_bytes += len(data)
