"""Deterministic placeholder media for mock providers.

PNG: a minimal RGB encoder built on zlib so output bytes depend only on the
pixel content and metadata we pass in (no library version drift, no
timestamps). Metadata rides in tEXt chunks.

WAV: standard PCM files whose sample data doubles as a marker payload. Mock
text-to-speech embeds the spoken text; mock speech recognition reads it back.
A file without the marker transcribes as silence.
"""
from __future__ import annotations

import io
import json
import struct
import wave
import zlib

from ..errors import UnsupportedFormatError

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_WAV_MARKER = b"TWAVMARK"


def _chunk(tag: bytes, body: bytes) -> bytes:
    return (
        struct.pack(">I", len(body))
        + tag
        + body
        + struct.pack(">I", zlib.crc32(tag + body) & 0xFFFFFFFF)
    )


def encode_png(
    width: int,
    height: int,
    quadrant_colors: list[tuple[int, int, int]],
    metadata: dict[str, str],
) -> bytes:
    """RGB PNG filled with 1, 2 or 4 solid regions plus tEXt metadata."""
    if not quadrant_colors:
        raise UnsupportedFormatError("need at least one fill color")
    rows = []
    half_h = height // 2
    half_w = width // 2
    for y in range(height):
        row = bytearray(b"\x00")  # filter type 0
        for x in range(width):
            if len(quadrant_colors) == 1:
                color = quadrant_colors[0]
            elif len(quadrant_colors) == 2:
                color = quadrant_colors[0 if x < half_w else 1]
            else:
                q = (0 if y < half_h else 2) + (0 if x < half_w else 1)
                color = quadrant_colors[q % len(quadrant_colors)]
            row += bytes(color)
        rows.append(bytes(row))
    ihdr = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    parts = [_PNG_SIGNATURE, _chunk(b"IHDR", ihdr)]
    for key in sorted(metadata):
        parts.append(_chunk(b"tEXt", key.encode("latin-1") + b"\x00" + metadata[key].encode("latin-1")))
    parts.append(_chunk(b"IDAT", zlib.compress(b"".join(rows), 6)))
    parts.append(_chunk(b"IEND", b""))
    return b"".join(parts)


def png_metadata(data: bytes) -> dict[str, str]:
    if not data.startswith(_PNG_SIGNATURE):
        raise UnsupportedFormatError("not a PNG file")
    meta: dict[str, str] = {}
    offset = len(_PNG_SIGNATURE)
    while offset + 8 <= len(data):
        (length,) = struct.unpack(">I", data[offset : offset + 4])
        tag = data[offset + 4 : offset + 8]
        body = data[offset + 8 : offset + 8 + length]
        if tag == b"tEXt" and b"\x00" in body:
            key, value = body.split(b"\x00", 1)
            meta[key.decode("latin-1")] = value.decode("latin-1")
        if tag == b"IEND":
            break
        offset += 12 + length
    return meta


def png_size(data: bytes) -> tuple[int, int]:
    if not data.startswith(_PNG_SIGNATURE):
        raise UnsupportedFormatError("not a PNG file")
    width, height = struct.unpack(">II", data[16:24])
    return width, height


def _write_wav(frames: bytes) -> bytes:
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(16000)
        wav.writeframes(frames)
    return buf.getvalue()


def encode_marker_wav(payload: dict[str, str]) -> bytes:
    """PCM WAV whose sample data carries a JSON payload behind a magic prefix."""
    body = json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8")
    frames = _WAV_MARKER + struct.pack(">I", len(body)) + body
    if len(frames) % 2:
        frames += b"\x00"
    return _write_wav(frames)


def decode_marker_wav(data: bytes) -> dict[str, str] | None:
    """The payload of a marker WAV, or None for ordinary audio (e.g. silence)."""
    try:
        with wave.open(io.BytesIO(data), "rb") as wav:
            frames = wav.readframes(wav.getnframes())
    except (wave.Error, EOFError) as exc:
        raise UnsupportedFormatError(f"not a PCM WAV file: {exc}") from exc
    if not frames.startswith(_WAV_MARKER):
        return None
    (length,) = struct.unpack(">I", frames[8:12])
    return json.loads(frames[12 : 12 + length].decode("utf-8"))


def silence_wav(n_frames: int = 1600) -> bytes:
    return _write_wav(b"\x00\x00" * n_frames)
