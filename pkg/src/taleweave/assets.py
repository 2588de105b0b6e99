"""Asset storage: images and audio referenced by relative path.

References are relative paths under an ``assets/`` directory. Stored files are
content-addressed (digest-named), so identical content maps to identical
references — a prerequisite for byte-stable seeded runs.
"""
from __future__ import annotations

import hashlib
import threading
from pathlib import Path

from .errors import AssetMissingError

AssetRef = str


def _digest_name(data: bytes, suffix: str) -> str:
    return f"assets/{hashlib.sha256(data).hexdigest()[:20]}{suffix}"


class AssetStore:
    """Directory-backed store; ``root`` is the directory containing assets/."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        (self.root / "assets").mkdir(parents=True, exist_ok=True)

    def put(self, data: bytes, suffix: str) -> AssetRef:
        ref = _digest_name(data, suffix)
        path = self.root / ref
        if not path.exists():
            path.write_bytes(data)
        return ref

    def get(self, ref: AssetRef) -> bytes:
        path = self.resolve(ref)
        return path.read_bytes()

    def resolve(self, ref: AssetRef) -> Path:
        path = self.root / ref
        if not path.is_file():
            raise AssetMissingError(f"asset reference {ref!r} does not resolve")
        return path

    def exists(self, ref: AssetRef) -> bool:
        return (self.root / ref).is_file()

    def import_file(self, source: Path | str, suffix: str | None = None) -> AssetRef:
        source = Path(source)
        if not source.is_file():
            raise AssetMissingError(f"no such file: {source}")
        return self.put(source.read_bytes(), suffix or source.suffix)


class MemoryAssetStore:
    """In-memory store with the same surface; used by fast property tests."""

    def __init__(self):
        self._blobs: dict[AssetRef, bytes] = {}
        self._lock = threading.Lock()

    def put(self, data: bytes, suffix: str) -> AssetRef:
        ref = _digest_name(data, suffix)
        with self._lock:
            self._blobs[ref] = data
        return ref

    def get(self, ref: AssetRef) -> bytes:
        try:
            return self._blobs[ref]
        except KeyError:
            raise AssetMissingError(f"asset reference {ref!r} does not resolve") from None

    def resolve(self, ref: AssetRef):
        raise AssetMissingError("memory asset store has no filesystem paths")

    def exists(self, ref: AssetRef) -> bool:
        return ref in self._blobs

    def import_file(self, source: Path | str, suffix: str | None = None) -> AssetRef:
        source = Path(source)
        if not source.is_file():
            raise AssetMissingError(f"no such file: {source}")
        return self.put(source.read_bytes(), suffix or source.suffix)
