"""Record/replay cassettes for provider calls.

A cassette maps request digests to recorded responses. Recording wraps a live
backend and appends entries through a single-writer lock; replay answers from
the file alone and raises :class:`ReplayMissError` on unknown digests.
"""
from __future__ import annotations

import threading
from pathlib import Path
from typing import Any

from ..docio import SCHEMA_VERSION, read_document, write_document
from ..errors import ReplayMissError, ValidationFailure


class Cassette:
    def __init__(self, entries: dict[str, dict[str, Any]] | None = None):
        self.entries: dict[str, dict[str, Any]] = entries or {}
        self._lock = threading.Lock()

    @classmethod
    def load(cls, path: Path | str) -> "Cassette":
        doc = read_document(path, expected_kind="cassette")
        return cls(entries=doc["entries"])

    def save(self, path: Path | str) -> None:
        with self._lock:
            write_document(
                path,
                {
                    "schema_version": SCHEMA_VERSION,
                    "doc_kind": "cassette",
                    "entries": self.entries,
                },
            )

    def record(self, digest: str, kind: str, response: dict[str, Any]) -> None:
        with self._lock:
            self.entries[digest] = {"kind": kind, "response": response}

    def lookup(self, digest: str, kind: str) -> dict[str, Any]:
        entry = self.entries.get(digest)
        if entry is None:
            raise ReplayMissError(digest)
        if entry["kind"] != kind:
            raise ValidationFailure(
                f"cassette entry {digest} is a {entry['kind']} response, not {kind}"
            )
        return entry["response"]

    def __len__(self) -> int:
        return len(self.entries)
