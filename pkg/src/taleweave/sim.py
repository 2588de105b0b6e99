"""Headless session runner: scripted responses through the full pipeline.

Everything is seeded — mock providers, id generation, timestamps (a stepping
clock) — so two runs with the same inputs and seed produce byte-identical
output directories.
"""
from __future__ import annotations

import random
from pathlib import Path
from typing import Any

from .assets import AssetStore
from .docio import SCHEMA_VERSION, read_document, write_document
from .domain import CHAPTER_COUNT, Session, SessionTask, StoryOutline
from .engine import SessionEngine, write_event_log
from .errors import TaleWeaveError, ValidationFailure
from .ids import IdGenerator, SteppingClock
from .pipeline import AgentPipeline
from .providers import ProviderConfig, ProviderGateway
from .providers.media import encode_png
from .storybook import EXPORT_FORMATS, compile_annotated, compile_print, write_export


def load_scripted_responses(path: Path | str) -> dict[str, Any]:
    doc = read_document(path, expected_kind="scripted_responses")
    name = doc.get("protagonist_name", "")
    if not isinstance(name, str) or not name.strip():
        raise ValidationFailure("scripted responses need a non-empty protagonist_name")
    if "drawing" not in doc or not str(doc["drawing"]).strip():
        raise ValidationFailure("scripted responses need a drawing asset path (or 'auto')")
    responses = doc.get("responses")
    if (
        not isinstance(responses, list)
        or len(responses) != CHAPTER_COUNT
        or any(not isinstance(r, str) or not r.strip() for r in responses)
    ):
        raise ValidationFailure(
            f"scripted responses need exactly {CHAPTER_COUNT} non-empty response strings"
        )
    return doc


def auto_drawing(assets: AssetStore, protagonist: str) -> str:
    """Deterministic placeholder drawing for fixtures that ship no image."""
    data = encode_png(
        96,
        96,
        [(240, 200, 120)],
        {"tw:kind": "auto_drawing", "tw:protagonist": protagonist.encode("ascii", "replace").decode("ascii")},
    )
    return assets.put(data, ".png")


def run_sim(
    outline_path: Path | str,
    responses_path: Path | str,
    seed: int,
    out_dir: Path | str,
    locale: str = "en",
) -> dict[str, Any]:
    """Run one scripted session; returns the run summary document."""
    out_dir = Path(out_dir)
    outline = StoryOutline.from_doc(read_document(outline_path, "story_outline"))
    script = load_scripted_responses(responses_path)

    assets = AssetStore(out_dir)
    clock = SteppingClock()
    ids = IdGenerator(clock=clock, rng=random.Random(seed))
    gateway = ProviderGateway(ProviderConfig(seed=seed), assets)
    pipeline = AgentPipeline(gateway, ids=ids, locale=locale)

    task = SessionTask(task_id=ids.new_id("tsk"), outline=outline, child_label=script["protagonist_name"])
    engine = SessionEngine(pipeline, tasks={task.task_id: task}, clock=clock, ids=ids)

    drawing = script["drawing"]
    if drawing == "auto":
        drawing_ref = auto_drawing(assets, script["protagonist_name"])
    else:
        drawing_path = Path(drawing)
        if not drawing_path.is_absolute():
            drawing_path = Path(responses_path).parent / drawing_path
        drawing_ref = assets.import_file(drawing_path)

    session = engine.start_session(task, seed=seed)
    engine.submit_drawing(session, drawing_ref, script["protagonist_name"])
    engine.accept_character(session)
    for k, response in enumerate(script["responses"], start=1):
        outcome = engine.submit_response(session, k, text=response)
        if outcome["status"] != "recorded":
            raise TaleWeaveError(f"scripted response {k} was not recorded: {outcome['status']}")
        engine.advance_generation(session)
    while not session.state.terminal and session.state.phase == "reflecting":
        engine.advance_generation(session)

    session_dir = out_dir / "session"
    write_event_log(session_dir / "events.log", session)
    write_document(session_dir / "session.json", session.to_doc())

    export_paths: list[str] = []
    if session.state.phase == "complete":
        print_book = compile_print(session)
        annotated = compile_annotated(session)
        for book in (print_book, annotated):
            for fmt in EXPORT_FORMATS:
                path = write_export(book, out_dir, session.session_id, fmt)
                export_paths.append(str(path.relative_to(out_dir)))

    summary = {
        "schema_version": SCHEMA_VERSION,
        "doc_kind": "run_summary",
        "session_id": session.session_id,
        "state": session.state.encode(),
        "event_count": len(session.event_log),
        "seed": seed,
        "exports": export_paths,
    }
    write_document(out_dir / "summary.json", summary)
    return summary


def rerun_exports(session: Session, out_dir: Path | str, variant: str, fmt: str) -> Path:
    if variant == "print":
        book = compile_print(session)
    elif variant == "annotated":
        book = compile_annotated(session)
    else:
        raise ValidationFailure(f"unknown variant {variant!r} (expected print or annotated)")
    return write_export(book, out_dir, session.session_id, fmt)
