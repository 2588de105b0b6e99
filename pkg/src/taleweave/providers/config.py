"""Provider configuration: file-based with environment overrides."""
from __future__ import annotations

import os
from pathlib import Path

from ..docio import read_document
from ..errors import ValidationFailure
from .types import BackendKind, ProviderConfig, RemoteEndpoints

ENV_PREFIX = "TALEWEAVE_"

_ENV_BACKENDS = {
    "text_backend": "TEXT_BACKEND",
    "image_backend": "IMAGE_BACKEND",
    "tts_backend": "TTS_BACKEND",
    "asr_backend": "ASR_BACKEND",
}


def load_provider_config(
    path: Path | str | None = None, env: dict[str, str] | None = None
) -> ProviderConfig:
    """Build a ProviderConfig from an optional document plus TALEWEAVE_* overrides."""
    env = os.environ if env is None else env
    doc: dict = {}
    if path is not None:
        doc = read_document(path, expected_kind="provider_config")

    def backend(field: str) -> BackendKind:
        raw = env.get(ENV_PREFIX + _ENV_BACKENDS[field], doc.get(field, "mock"))
        try:
            return BackendKind(raw)
        except ValueError:
            raise ValidationFailure(f"unknown backend {raw!r} for {field}") from None

    def integer(name: str, default: int) -> int:
        raw = env.get(ENV_PREFIX + name.upper(), doc.get(name, default))
        try:
            return int(raw)
        except (TypeError, ValueError):
            raise ValidationFailure(f"{name} must be an integer (got {raw!r})") from None

    remote_doc = doc.get("remote", {})
    cfg = ProviderConfig(
        text_backend=backend("text_backend"),
        image_backend=backend("image_backend"),
        tts_backend=backend("tts_backend"),
        asr_backend=backend("asr_backend"),
        seed=integer("seed", 0),
        timeout_ms=integer("timeout_ms", 30_000),
        max_retries=integer("max_retries", 2),
        cassette_path=env.get(ENV_PREFIX + "CASSETTE", doc.get("cassette_path")),
        remote=RemoteEndpoints(
            text_url=remote_doc.get("text_url", ""),
            image_url=remote_doc.get("image_url", ""),
            tts_url=remote_doc.get("tts_url", ""),
            asr_url=remote_doc.get("asr_url", ""),
            credential_ref=remote_doc.get("credential_ref", ""),
        ),
        voice_profile=doc.get("voice_profile", "storyteller"),
    )
    if BackendKind.REPLAY in cfg.backends().values():
        if not cfg.cassette_path or not Path(cfg.cassette_path).is_file():
            raise ValidationFailure(
                f"replay mode requires an existing cassette (got {cfg.cassette_path!r})"
            )
    return cfg
