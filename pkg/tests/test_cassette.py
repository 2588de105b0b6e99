from __future__ import annotations

import pytest

from taleweave.assets import MemoryAssetStore
from taleweave.docio import read_document, write_document
from taleweave.errors import ReplayMissError, SchemaVersionError
from taleweave.providers import (
    AgentRole,
    ImageLayout,
    ImageRequest,
    ProviderConfig,
    ProviderGateway,
    TextRequest,
)
from taleweave.providers.types import BackendKind


def _requests():
    return [
        TextRequest(AgentRole.QUESTION, "q", (("protagonist", "Bunny"), ("plot", "exam day"))),
        TextRequest(AgentRole.WRITING, "w", (("response", "breathe"), ("protagonist", "Bunny"))),
        TextRequest(AgentRole.REFLECTION, "r", (("protagonist", "Bunny"), ("title", "T"))),
    ]


def test_record_then_replay_reproduces_results(tmp_path):
    assets = MemoryAssetStore()
    cassette_path = tmp_path / "cassette.json"

    # record against the mock backend (stands in for a live remote)
    recorder = ProviderGateway(ProviderConfig(seed=3), assets, recording=True)
    recorded_texts = [recorder.generate_text(r).text for r in _requests()]
    image = recorder.generate_image(ImageRequest(prompt="p", layout_hint=ImageLayout.FOUR_PANEL))
    audio = recorder.synthesize_speech("hello child")
    transcript = recorder.transcribe(audio)
    recorder.save_cassette(str(cassette_path))

    replay_cfg = ProviderConfig(
        seed=999,  # seed must not matter in replay
        text_backend=BackendKind.REPLAY,
        image_backend=BackendKind.REPLAY,
        tts_backend=BackendKind.REPLAY,
        asr_backend=BackendKind.REPLAY,
        cassette_path=str(cassette_path),
    )
    replayer = ProviderGateway(replay_cfg, assets)
    for req, expected in zip(_requests(), recorded_texts):
        assert replayer.generate_text(req).text == expected
    replay_image = replayer.generate_image(
        ImageRequest(prompt="p", layout_hint=ImageLayout.FOUR_PANEL)
    )
    assert assets.get(replay_image.image) == assets.get(image.image)
    assert replayer.transcribe(replayer.synthesize_speech("hello child")) == transcript


def test_replay_miss_names_the_digest(tmp_path):
    assets = MemoryAssetStore()
    cassette_path = tmp_path / "cassette.json"
    recorder = ProviderGateway(ProviderConfig(seed=3), assets, recording=True)
    recorder.generate_text(_requests()[0])
    recorder.save_cassette(str(cassette_path))

    replayer = ProviderGateway(
        ProviderConfig(
            text_backend=BackendKind.REPLAY, cassette_path=str(cassette_path)
        ),
        assets,
    )
    unseen = TextRequest(AgentRole.ANALYSIS, "never recorded")
    with pytest.raises(ReplayMissError) as exc_info:
        replayer.generate_text(unseen)
    assert unseen.digest() in str(exc_info.value)


def test_schema_version_mismatch_rejected(tmp_path):
    cassette_path = tmp_path / "cassette.json"
    write_document(
        cassette_path, {"schema_version": 1, "doc_kind": "cassette", "entries": {}}
    )
    doc = read_document(cassette_path)
    doc["schema_version"] = 99
    import json

    cassette_path.write_text(json.dumps(doc), encoding="utf-8")
    with pytest.raises(SchemaVersionError):
        ProviderGateway(
            ProviderConfig(text_backend=BackendKind.REPLAY, cassette_path=str(cassette_path)),
            MemoryAssetStore(),
        )
