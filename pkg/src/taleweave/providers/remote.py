"""Generic HTTP JSON backend.

All remote capabilities speak one contract: POST a JSON body to the
configured URL, receive a JSON body back. Binary payloads travel as base64.

    text : {role_tag, prompt, context: [[label, text], ...]} -> {text}
    image: {prompt, layout, references: [b64, ...]}          -> {image_b64, layout}
    tts  : {text, voice}                                     -> {audio_b64}
    asr  : {audio_b64}                                       -> {text}

Failed attempts retry with exponential backoff starting at 250 ms, doubling,
capped at the configured timeout; the total budget never exceeds
timeout_ms * (max_retries + 1) plus backoff sleep.
"""
from __future__ import annotations

import os
import time
from typing import Any

import httpx

from ..errors import ProviderError, ProviderTimeoutError
from .types import ProviderConfig

_BACKOFF_START_S = 0.25


class RemoteBackend:
    def __init__(self, cfg: ProviderConfig, transport: httpx.BaseTransport | None = None):
        self.cfg = cfg
        headers = {}
        cred_ref = cfg.remote.credential_ref
        if cred_ref and os.environ.get(cred_ref):
            headers["Authorization"] = f"Bearer {os.environ[cred_ref]}"
        self._client = httpx.Client(
            timeout=cfg.timeout_ms / 1000.0,
            headers=headers,
            transport=transport,
        )

    def call(self, url: str, body: dict[str, Any]) -> dict[str, Any]:
        if not url:
            raise ProviderError("remote backend selected but no endpoint URL configured")
        backoff = _BACKOFF_START_S
        attempts = self.cfg.max_retries + 1
        last_error: Exception | None = None
        for attempt in range(attempts):
            try:
                response = self._client.post(url, json=body)
                if response.status_code >= 500:
                    raise ProviderError(f"remote backend returned HTTP {response.status_code}")
                if response.status_code >= 400:
                    # client errors will not improve with retries
                    raise ProviderError(
                        f"remote backend rejected request: HTTP {response.status_code}"
                    ) from None
                return response.json()
            except httpx.TimeoutException as exc:
                last_error = exc
            except (httpx.TransportError, ProviderError) as exc:
                if isinstance(exc, ProviderError) and "rejected" in str(exc):
                    raise
                last_error = exc
            if attempt < attempts - 1:
                time.sleep(min(backoff, self.cfg.timeout_ms / 1000.0))
                backoff *= 2
        if isinstance(last_error, httpx.TimeoutException):
            raise ProviderTimeoutError(
                f"remote backend did not answer within {self.cfg.timeout_ms} ms "
                f"after {attempts} attempts"
            ) from last_error
        raise ProviderError(f"remote backend failed: {last_error}") from last_error

    def close(self) -> None:
        self._client.close()
