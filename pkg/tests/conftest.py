from __future__ import annotations

import pytest

from taleweave.assets import MemoryAssetStore
from taleweave.corpus import story as corpus_story
from taleweave.domain import SessionTask
from taleweave.engine import SessionEngine
from taleweave.ids import IdGenerator, SteppingClock
from taleweave.pipeline import AgentPipeline
from taleweave.providers import ProviderConfig, ProviderGateway
from taleweave.providers.types import AgentRole


class ScriptedGateway:
    """Wraps a gateway; scripted text outputs pop per role, then fall through."""

    def __init__(self, inner, script: dict[AgentRole, list[str]] | None = None):
        self.inner = inner
        self.script = {role: list(outputs) for role, outputs in (script or {}).items()}
        self.text_requests = []

    @property
    def assets(self):
        return self.inner.assets

    @property
    def cfg(self):
        return self.inner.cfg

    def generate_text(self, req):
        self.text_requests.append(req)
        queued = self.script.get(req.role_tag)
        if queued:
            from taleweave.providers.types import TextResult

            return TextResult(text=queued.pop(0), latency_ms=0)
        return self.inner.generate_text(req)

    def generate_image(self, req):
        return self.inner.generate_image(req)

    def synthesize_speech(self, text, voice_profile=None):
        return self.inner.synthesize_speech(text, voice_profile)

    def transcribe(self, audio_ref):
        return self.inner.transcribe(audio_ref)


@pytest.fixture
def assets():
    return MemoryAssetStore()


@pytest.fixture
def gateway(assets):
    return ProviderGateway(ProviderConfig(seed=7), assets)


@pytest.fixture
def clock():
    return SteppingClock()


@pytest.fixture
def ids(clock):
    import random

    return IdGenerator(clock=clock, rng=random.Random(7))


@pytest.fixture
def pipeline(gateway, ids):
    return AgentPipeline(gateway, ids=ids)


def make_rig(seed: int = 7, script: dict[AgentRole, list[str]] | None = None, child_id="C1"):
    """(engine, task, gateway, assets) wired against the corpus outline."""
    import random

    assets = MemoryAssetStore()
    inner = ProviderGateway(ProviderConfig(seed=seed), assets)
    gateway = ScriptedGateway(inner, script) if script is not None else inner
    clock = SteppingClock()
    ids = IdGenerator(clock=clock, rng=random.Random(seed))
    pipeline = AgentPipeline(gateway, ids=ids)
    outline = corpus_story(child_id).outline()
    task = SessionTask(task_id=f"tsk_{child_id.lower()}", outline=outline, child_label=child_id)
    engine = SessionEngine(pipeline, tasks={task.task_id: task}, clock=clock, ids=ids)
    return engine, task, gateway, assets


def run_full_session(engine, task, assets, responses=None, seed=7, protagonist=None):
    """Drive a session through the whole protocol with typed responses."""
    if protagonist is None:
        try:
            protagonist = corpus_story(task.child_label).protagonist
        except KeyError:
            protagonist = "Hero"
    responses = responses or corpus_story("C1").responses
    drawing = assets.put(b"drawing-bytes", ".png")
    session = engine.start_session(task, seed=seed)
    engine.submit_drawing(session, drawing, protagonist)
    engine.accept_character(session)
    for k, response in enumerate(responses, start=1):
        engine.submit_response(session, k, text=response)
        engine.advance_generation(session)
    while session.state.phase == "reflecting":
        engine.advance_generation(session)
    return session


@pytest.fixture
def rig():
    return make_rig()
