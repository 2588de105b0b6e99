"""Facade over the four generative capabilities.

The gateway owns backend selection (mock / replay / remote per capability),
request digesting, optional cassette recording, and the structural checks
that hold for every backend (non-empty text, resolvable references, layout
tags).
"""
from __future__ import annotations

import hashlib
from typing import Optional

from ..errors import MalformedOutputError, ValidationFailure
from . import media
from .cassette import Cassette
from .remote import RemoteBackend
from .mock import MockImageBackend, MockSpeechBackend, MockTextBackend
from .types import (
    BackendKind,
    ImageLayout,
    ImageRequest,
    ImageResult,
    ProviderConfig,
    TextRequest,
    TextResult,
    audio_digest,
    b64,
    text_digest,
    unb64,
)


class ProviderGateway:
    def __init__(
        self,
        cfg: ProviderConfig,
        asset_store,
        transport=None,
        recording: bool = False,
    ):
        self.cfg = cfg
        self.assets = asset_store
        self._mock_text = MockTextBackend(cfg.seed)
        self._mock_image = MockImageBackend(cfg.seed, asset_store)
        self._mock_speech = MockSpeechBackend(cfg.seed, asset_store)
        self._remote: Optional[RemoteBackend] = None
        self._transport = transport
        self.recording = recording
        needs_cassette = recording or BackendKind.REPLAY in cfg.backends().values()
        self.cassette: Optional[Cassette] = None
        if needs_cassette:
            if recording:
                self.cassette = Cassette()
            else:
                if not cfg.cassette_path:
                    raise ValidationFailure("replay backend requires a cassette path")
                self.cassette = Cassette.load(cfg.cassette_path)

    def _remote_backend(self) -> RemoteBackend:
        if self._remote is None:
            self._remote = RemoteBackend(self.cfg, transport=self._transport)
        return self._remote

    def save_cassette(self, path: str | None = None) -> None:
        if self.cassette is None:
            raise ValidationFailure("gateway has no cassette to save")
        target = path or self.cfg.cassette_path
        if not target:
            raise ValidationFailure("no cassette path configured")
        self.cassette.save(target)

    # -- text ---------------------------------------------------------------

    def generate_text(self, req: TextRequest) -> TextResult:
        backend = self.cfg.text_backend
        digest = req.digest()
        if backend is BackendKind.MOCK:
            result = self._mock_text.generate(req)
        elif backend is BackendKind.REPLAY:
            payload = self.cassette.lookup(digest, "text")
            result = TextResult(text=payload["text"], latency_ms=payload.get("latency_ms", 0))
        else:
            payload = self._remote_backend().call(
                self.cfg.remote.text_url,
                {
                    "role_tag": req.role_tag.value,
                    "prompt": req.prompt,
                    "context": [list(pair) for pair in req.context],
                },
            )
            result = TextResult(text=payload.get("text", ""), latency_ms=0)
        if not result.text.strip():
            raise MalformedOutputError("provider returned empty text", raw_output=result.text)
        if self.recording:
            self.cassette.record(
                digest, "text", {"text": result.text, "latency_ms": result.latency_ms}
            )
        return result

    # -- images --------------------------------------------------------------

    def generate_image(self, req: ImageRequest) -> ImageResult:
        reference_digests = []
        for ref in req.reference_images:
            data = self.assets.get(ref)  # raises AssetMissingError on dangling refs
            reference_digests.append(hashlib.sha256(data).hexdigest())
        digest = req.digest_with(reference_digests)
        backend = self.cfg.image_backend
        if backend is BackendKind.MOCK:
            result = self._mock_image.generate(req, reference_digests)
        elif backend is BackendKind.REPLAY:
            payload = self.cassette.lookup(digest, "image")
            ref = self.assets.put(unb64(payload["image_b64"]), ".png")
            result = ImageResult(image=ref, layout=ImageLayout(payload["layout"]), latency_ms=0)
        else:
            payload = self._remote_backend().call(
                self.cfg.remote.image_url,
                {
                    "prompt": req.prompt,
                    "layout": req.layout_hint.value,
                    "references": [b64(self.assets.get(r)) for r in req.reference_images],
                },
            )
            ref = self.assets.put(unb64(payload["image_b64"]), ".png")
            result = ImageResult(
                image=ref,
                layout=ImageLayout(payload.get("layout", req.layout_hint.value)),
                latency_ms=0,
            )
        if result.layout is not req.layout_hint:
            raise MalformedOutputError(
                f"layout tag mismatch: requested {req.layout_hint.value}, got {result.layout.value}"
            )
        if self.recording:
            self.cassette.record(
                digest,
                "image",
                {"image_b64": b64(self.assets.get(result.image)), "layout": result.layout.value},
            )
        return result

    # -- speech ---------------------------------------------------------------

    def synthesize_speech(self, text: str, voice_profile: str | None = None) -> str:
        if not text.strip():
            raise ValidationFailure("cannot synthesize empty text")
        voice = voice_profile or self.cfg.voice_profile
        digest = text_digest(text, voice)
        backend = self.cfg.tts_backend
        if backend is BackendKind.MOCK:
            ref = self._mock_speech.synthesize(text, voice)
        elif backend is BackendKind.REPLAY:
            payload = self.cassette.lookup(digest, "tts")
            ref = self.assets.put(unb64(payload["audio_b64"]), ".wav")
        else:
            payload = self._remote_backend().call(
                self.cfg.remote.tts_url, {"text": text, "voice": voice}
            )
            ref = self.assets.put(unb64(payload["audio_b64"]), ".wav")
        if self.recording:
            self.cassette.record(digest, "tts", {"audio_b64": b64(self.assets.get(ref))})
        return ref

    def transcribe(self, audio_ref: str) -> str:
        audio_bytes = self.assets.get(audio_ref)
        digest = audio_digest(audio_bytes)
        backend = self.cfg.asr_backend
        if backend is BackendKind.MOCK:
            text = self._mock_speech.transcribe(audio_bytes)
        elif backend is BackendKind.REPLAY:
            text = self.cassette.lookup(digest, "asr")["text"]
        else:
            payload = self._remote_backend().call(
                self.cfg.remote.asr_url, {"audio_b64": b64(audio_bytes)}
            )
            text = payload.get("text", "")
        if self.recording:
            self.cassette.record(digest, "asr", {"text": text})
        return text

    def close(self) -> None:
        if self._remote is not None:
            self._remote.close()


def validate_wav(data: bytes) -> None:
    """Raise UnsupportedFormatError unless the bytes parse as PCM WAV."""
    media.decode_marker_wav(data)
