"""
Event Log

Append-only JSON-lines log of database events. Replaying the log into an
empty database reproduces its state.
"""

import json
import logging
import os
import threading
from pathlib import Path
from typing import Any, Iterator, Union

from .errors import CorruptLog
from .models import EventType

logger = logging.getLogger(__name__)

REQUIRED_FIELDS: dict[str, tuple[str, ...]] = {
    EventType.SEED.value: ("source", "record"),
    EventType.REGISTER.value: ("island", "source", "record"),
    EventType.SKIP.value: ("candidate_id",),
    EventType.RESET.value: ("auto",),
}


class EventLog:
    """Append-only event file; one JSON object per line."""

    def __init__(self, path: Union[str, Path], fsync: bool = False):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.fsync = fsync
        self._lock = threading.Lock()

    def append(self, event: dict[str, Any]) -> None:
        line = json.dumps(event, sort_keys=True, separators=(",", ":"))
        with self._lock, open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            if self.fsync:
                os.fsync(fh.fileno())

    def read(self) -> Iterator[tuple[int, dict[str, Any]]]:
        return read_events(self.path)


def read_events(path: Union[str, Path]) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield (line number, event); raise CorruptLog on bad lines."""
    path = Path(path)
    if not path.exists():
        return
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                event = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorruptLog(f"invalid JSON ({e.msg})", lineno) from e
            if not isinstance(event, dict):
                raise CorruptLog("event is not an object", lineno)
            kind = event.get("type")
            if kind not in REQUIRED_FIELDS:
                raise CorruptLog(f"unknown event type {kind!r}", lineno)
            missing = [f for f in REQUIRED_FIELDS[kind] if f not in event]
            if missing:
                raise CorruptLog(f"{kind} event missing {', '.join(missing)}", lineno)
            yield lineno, event
