"""Canonical on-disk document format.

Every persisted artifact (outline, session snapshot, cassette, storybook,
template, run summary) is one UTF-8 JSON document with key-sorted maps, a
``schema_version`` field, and a ``doc_kind`` tag. Sorting plus a fixed indent
makes the encoding byte-stable, which is what the golden-file tests rely on.
"""
from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from .errors import SchemaVersionError, ValidationFailure

SCHEMA_VERSION = 1


def encode_document(doc: dict[str, Any]) -> str:
    """Canonical text for a document: sorted keys, 2-space indent, newline."""
    if "schema_version" not in doc:
        raise ValidationFailure("document is missing schema_version")
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def decode_document(text: str, expected_kind: str | None = None) -> dict[str, Any]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationFailure(f"document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationFailure("document root must be a map")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})"
        )
    if expected_kind is not None and doc.get("doc_kind") != expected_kind:
        raise ValidationFailure(
            f"expected doc_kind {expected_kind!r}, found {doc.get('doc_kind')!r}"
        )
    return doc


def write_document(path: Path | str, doc: dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(encode_document(doc), encoding="utf-8")
    return path


def read_document(path: Path | str, expected_kind: str | None = None) -> dict[str, Any]:
    return decode_document(Path(path).read_text(encoding="utf-8"), expected_kind)


def compact_json(value: Any) -> str:
    """Single-line canonical JSON, used for event-log lines and digests."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def format_ts(dt: datetime) -> str:
    """UTC timestamp with millisecond precision, e.g. 2025-01-01T00:00:00.000Z."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    dt = dt.astimezone(timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"


def parse_ts(text: str) -> datetime:
    try:
        base, millis = text[:-1].rsplit(".", 1)
        dt = datetime.strptime(base, "%Y-%m-%dT%H:%M:%S")
        return dt.replace(microsecond=int(millis) * 1000, tzinfo=timezone.utc)
    except (ValueError, IndexError) as exc:
        raise ValidationFailure(f"bad timestamp {text!r}") from exc
