"""Request/result types shared by all provider backends."""
from __future__ import annotations

import base64
import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from ..docio import compact_json
from ..errors import ValidationFailure


class AgentRole(str, Enum):
    """Pipeline roles a text request can carry.

    Seven story agents plus two constrained classifier calls (branch valence,
    coping subscale suggestion).
    """

    OUTLINE = "outline"
    CHARACTER = "character"
    QUESTION = "question"
    WRITING = "writing"
    DRAWING = "drawing"
    REFLECTION = "reflection"
    ANALYSIS = "analysis"
    BRANCH_CLASSIFIER = "branch_classifier"
    COPING_CLASSIFIER = "coping_classifier"


class ImageLayout(str, Enum):
    SINGLE = "single"
    FOUR_PANEL = "four_panel"


@dataclass(frozen=True)
class TextRequest:
    role_tag: AgentRole
    prompt: str
    context: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if not self.prompt.strip():
            raise ValidationFailure("text request prompt must be non-empty")

    def context_value(self, label: str) -> Optional[str]:
        for key, value in self.context:
            if key == label:
                return value
        return None

    def digest(self) -> str:
        body = {
            "kind": "text",
            "role_tag": self.role_tag.value,
            "prompt": self.prompt,
            "context": sorted(list(pair) for pair in self.context),
        }
        return hashlib.sha256(compact_json(body).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class TextResult:
    text: str
    latency_ms: int = 0


@dataclass(frozen=True)
class ImageRequest:
    prompt: str
    reference_images: tuple[str, ...] = ()  # asset refs
    layout_hint: ImageLayout = ImageLayout.SINGLE

    def digest_with(self, reference_digests: list[str]) -> str:
        body = {
            "kind": "image",
            "prompt": self.prompt,
            "layout": self.layout_hint.value,
            "refs": reference_digests,
        }
        return hashlib.sha256(compact_json(body).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ImageResult:
    image: str  # asset ref
    layout: ImageLayout
    latency_ms: int = 0


class BackendKind(str, Enum):
    MOCK = "mock"
    REPLAY = "replay"
    REMOTE = "remote"


@dataclass(frozen=True)
class RemoteEndpoints:
    text_url: str = ""
    image_url: str = ""
    tts_url: str = ""
    asr_url: str = ""
    credential_ref: str = ""  # name of an env var holding the bearer token


@dataclass(frozen=True)
class ProviderConfig:
    text_backend: BackendKind = BackendKind.MOCK
    image_backend: BackendKind = BackendKind.MOCK
    tts_backend: BackendKind = BackendKind.MOCK
    asr_backend: BackendKind = BackendKind.MOCK
    seed: int = 0
    timeout_ms: int = 30_000
    max_retries: int = 2
    cassette_path: Optional[str] = None
    remote: RemoteEndpoints = field(default_factory=RemoteEndpoints)
    voice_profile: str = "storyteller"

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValidationFailure("timeout_ms must be > 0")
        if self.max_retries < 0:
            raise ValidationFailure("max_retries must be >= 0")

    def backends(self) -> dict[str, BackendKind]:
        return {
            "text": self.text_backend,
            "image": self.image_backend,
            "tts": self.tts_backend,
            "asr": self.asr_backend,
        }


def text_digest(text: str, voice: str) -> str:
    body = {"kind": "tts", "text": text, "voice": voice}
    return hashlib.sha256(compact_json(body).encode("utf-8")).hexdigest()


def audio_digest(audio_bytes: bytes) -> str:
    body = {"kind": "asr", "audio": hashlib.sha256(audio_bytes).hexdigest()}
    return hashlib.sha256(compact_json(body).encode("utf-8")).hexdigest()


def b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def unb64(text: str) -> bytes:
    return base64.b64decode(text.encode("ascii"))
