"""Deterministic mock backends.

Every mock operation is a pure function of (seed, request): identical inputs
give identical outputs, byte for byte. Text responses are role-specific
templates filled from the request context plus a seed-derived suffix token;
images and audio are placeholder media from :mod:`taleweave.providers.media`.
"""
from __future__ import annotations

import hashlib
import json
import re

from .. import lexicon
from ..docio import compact_json
from . import media
from .types import (
    AgentRole,
    ImageLayout,
    ImageRequest,
    ImageResult,
    TextRequest,
    TextResult,
)

_FOUR_PANEL_SIZE = (512, 384)
_SINGLE_SIZE = (256, 256)


def seed_token(seed: int, digest: str) -> str:
    return hashlib.sha256(f"{seed}:{digest}".encode("utf-8")).hexdigest()[:8]


def _latency(digest: str) -> int:
    return 5 + int(digest[:2], 16) % 20


def _ctx(req: TextRequest, label: str, default: str = "") -> str:
    value = req.context_value(label)
    return value if value is not None else default


def _outline_text(req: TextRequest, token: str) -> str:
    brief = _ctx(req, "brief", "an everyday adversity")
    theme = brief.split(";")[0].split(".")[0].strip() or "a challenge"
    arcs = [
        ("Preparation", "The challenge takes shape"),
        ("Challenge", "The difficulty is faced head-on"),
        ("Turning point", "A choice changes the course of events"),
        ("Resolution", "The experience settles into something learned"),
    ]
    chapters = []
    for arc_name, arc_plot in arcs:
        chapters.append(
            {
                "setting": f"{arc_name} — {brief}",
                "plot": f"{arc_plot}: {brief} ({token})",
            }
        )
    return json.dumps(
        {"title": f"A story about {theme}", "chapters": chapters},
        sort_keys=True,
        ensure_ascii=False,
    )


def _character_text(req: TextRequest, token: str) -> str:
    name = _ctx(req, "protagonist", "the hero")
    return (
        f"Meet {name}! Drawn by a child's own hand, {name} is a warm-hearted little "
        f"hero who never gives up for long. (profile {token})"
    )


def _question_text(req: TextRequest, token: str) -> str:
    name = _ctx(req, "protagonist", "the hero")
    plot = _ctx(req, "plot", f"{name} is in the middle of the story.")
    situation = plot if plot.rstrip().endswith((".", "!", "?")) else plot + "."
    return f"{situation} What do you think {name} will do next?"


def response_keyword(response: str) -> str:
    """The word the mock writer weaves into the story.

    The child's exact words stay out of the child-facing narrative (they are
    parent-only annotation content); the story reflects the idea through its
    most salient word instead.
    """
    words = re.findall(r"[^\W\d_]+", response, re.UNICODE)
    if not words:
        return "idea"
    return max(words, key=len).lower()


def _writing_text(req: TextRequest, token: str) -> str:
    name = _ctx(req, "protagonist", "the hero")
    setting = _ctx(req, "setting", "the story's world")
    plot = _ctx(req, "plot", "the story continues")
    response = _ctx(req, "response", "…")
    branch_plot = _ctx(req, "branch_plot")
    keyword = response_keyword(response)
    p1 = f"{setting}. {plot}"
    p2 = (
        f"An idea came to {name} then, quiet and sure — something about "
        f"“{keyword}” — the child's very own idea, and {name} followed it."
    )
    p3 = branch_plot if branch_plot else f"Step by step, {name} kept going, one small choice at a time."
    p4 = f"By the end of this part of the story, {name} felt a little braver than before. ({token})"
    return "\n\n".join([p1, p2, p3, p4])


def _reflection_text(req: TextRequest, token: str) -> str:
    name = _ctx(req, "protagonist", "the hero")
    title = _ctx(req, "title", "this story")
    return (
        f"And so {title} comes to a close. Across four chapters, {name} met a real "
        f"difficulty, tried out ideas, and found a way through. Every choice in this "
        f"story came from you. What a wonderful storyteller you are — {name} is proud "
        f"of you! ({token})"
    )


def _analysis_text(req: TextRequest, token: str) -> str:
    comments = []
    for k in range(1, 5):
        response = _ctx(req, f"response_{k}", "…")
        comments.append(
            f'At milestone {k} the child answered "{response}". This response shows how '
            f"the child approaches the situation when given room to decide."
        )
    overall = (
        "Across the four milestones the child engaged with the story's difficulty and "
        f"offered their own ways of coping. ({token})"
    )
    advice = (
        "Read the storybook together, ask what the protagonist felt at each moment, and "
        "acknowledge the child's own ideas before suggesting alternatives."
    )
    return json.dumps(
        {"comments": comments, "overall": overall, "advice": advice},
        sort_keys=True,
        ensure_ascii=False,
    )


def _classifier_text(req: TextRequest, token: str) -> str:
    response = _ctx(req, "response", "")
    if req.role_tag is AgentRole.BRANCH_CLASSIFIER:
        return lexicon.classify_valence(response)
    return lexicon.suggest_subscale(response)


_TEXT_RENDERERS = {
    AgentRole.OUTLINE: _outline_text,
    AgentRole.CHARACTER: _character_text,
    AgentRole.QUESTION: _question_text,
    AgentRole.WRITING: _writing_text,
    AgentRole.DRAWING: _writing_text,  # drawing prompts are never text-rendered; placeholder
    AgentRole.REFLECTION: _reflection_text,
    AgentRole.ANALYSIS: _analysis_text,
    AgentRole.BRANCH_CLASSIFIER: _classifier_text,
    AgentRole.COPING_CLASSIFIER: _classifier_text,
}


class MockTextBackend:
    def __init__(self, seed: int):
        self.seed = seed

    def generate(self, req: TextRequest) -> TextResult:
        digest = req.digest()
        token = seed_token(self.seed, digest)
        text = _TEXT_RENDERERS[req.role_tag](req, token)
        return TextResult(text=text, latency_ms=_latency(digest))


class MockImageBackend:
    def __init__(self, seed: int, asset_store):
        self.seed = seed
        self.assets = asset_store

    def generate(self, req: ImageRequest, reference_digests: list[str]) -> ImageResult:
        digest = req.digest_with(reference_digests)
        token = seed_token(self.seed, digest)
        palette_seed = hashlib.sha256(f"{self.seed}|{digest}".encode()).digest()
        n_colors = 4 if req.layout_hint is ImageLayout.FOUR_PANEL else 1
        colors = [
            (palette_seed[3 * i], palette_seed[3 * i + 1], palette_seed[3 * i + 2])
            for i in range(n_colors)
        ]
        width, height = (
            _FOUR_PANEL_SIZE if req.layout_hint is ImageLayout.FOUR_PANEL else _SINGLE_SIZE
        )
        data = media.encode_png(
            width,
            height,
            colors,
            {
                "tw:layout": req.layout_hint.value,
                "tw:prompt_digest": digest,
                "tw:token": token,
            },
        )
        ref = self.assets.put(data, ".png")
        return ImageResult(image=ref, layout=req.layout_hint, latency_ms=_latency(digest))


class MockSpeechBackend:
    def __init__(self, seed: int, asset_store):
        self.seed = seed
        self.assets = asset_store

    def synthesize(self, text: str, voice_profile: str) -> str:
        sha = hashlib.sha256(text.encode("utf-8")).hexdigest()
        data = media.encode_marker_wav({"text": text, "sha": sha, "voice": voice_profile})
        return self.assets.put(data, ".wav")

    def transcribe(self, audio_bytes: bytes) -> str:
        payload = media.decode_marker_wav(audio_bytes)
        if payload is None:
            return ""
        return payload.get("text", "")


def stable_response_payload(kind: str, value) -> str:
    """Canonical form used when comparing recorded vs live responses."""
    return compact_json({"kind": kind, "value": value})
