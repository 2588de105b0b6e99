"""On-disk data store for outlines, tasks, and sessions.

Layout under one data directory:

    outlines/{outline_id}.json        current outline document
    tasks/{task_id}.json              deployed snapshot + claim status
    sessions/{session_id}/events.log  append-only event log (authoritative)
    sessions/{session_id}/session.json derived snapshot cache
    shares/{session_id}.json          parent-viewer grants
    assets/                           content-addressed media
    exports/{session_id}/...          compiled storybooks

Live Session/Task objects are kept in memory; files are the durable form.
Event appends happen inside the engine's per-session lock, so the log file
sees a single writer per session.
"""
from __future__ import annotations

import threading
from pathlib import Path

from .assets import AssetStore
from .docio import SCHEMA_VERSION, compact_json, encode_document, read_document, write_document
from .domain import (
    OutlineStatus,
    Session,
    SessionEvent,
    SessionTask,
    StoryOutline,
    validate_outline,
)
from .engine import load_event_log, replay
from .errors import ValidationFailure
from .ids import IdGenerator

_LOG_HEADER = {"schema_version": SCHEMA_VERSION, "kind": "session_event_log"}


class DataStore:
    def __init__(self, root: Path | str, ids: IdGenerator | None = None):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.ids = ids or IdGenerator()
        self.assets = AssetStore(self.root)
        self._outlines: dict[str, StoryOutline] = {}
        self._tasks: dict[str, SessionTask] = {}
        self._sessions: dict[str, Session] = {}
        self._shares: dict[str, set[str]] = {}
        self._io_lock = threading.Lock()
        self._load_existing()

    # -- loading ---------------------------------------------------------------

    def _load_existing(self) -> None:
        outline_dir = self.root / "outlines"
        if outline_dir.is_dir():
            for path in sorted(outline_dir.glob("*.json")):
                outline = StoryOutline.from_doc(read_document(path, "story_outline"))
                self._outlines[outline.outline_id] = outline
        task_dir = self.root / "tasks"
        if task_dir.is_dir():
            for path in sorted(task_dir.glob("*.json")):
                task = SessionTask.from_doc(read_document(path, "session_task"))
                self._tasks[task.task_id] = task
        session_dir = self.root / "sessions"
        if session_dir.is_dir():
            for log_path in sorted(session_dir.glob("*/events.log")):
                session = replay(load_event_log(log_path))
                self._sessions[session.session_id] = session
        share_dir = self.root / "shares"
        if share_dir.is_dir():
            for path in sorted(share_dir.glob("*.json")):
                doc = read_document(path, "export_share")
                self._shares[doc["session_id"]] = set(doc["principals"])

    # -- outlines ---------------------------------------------------------------

    def save_outline(self, outline: StoryOutline) -> StoryOutline:
        prior = self._outlines.get(outline.outline_id)
        result = validate_outline(outline, prior)
        if not result.ok:
            raise ValidationFailure(
                "outline rejected: " + "; ".join(v.message for v in result.violations)
            )
        self._outlines[outline.outline_id] = outline
        write_document(self.root / "outlines" / f"{outline.outline_id}.json", outline.to_doc())
        return outline

    def get_outline(self, outline_id: str) -> StoryOutline | None:
        return self._outlines.get(outline_id)

    def list_outlines(self) -> list[StoryOutline]:
        return [self._outlines[k] for k in sorted(self._outlines)]

    # -- tasks -------------------------------------------------------------------

    def deploy_outline(self, outline_id: str, child_label: str, now=None) -> SessionTask:
        """Freeze the outline into a task snapshot; first deploy flips it to deployed.

        Deploying an already-deployed outline reuses the frozen content, so every
        task for one outline carries byte-identical snapshot text.
        """
        outline = self._outlines.get(outline_id)
        if outline is None:
            raise ValidationFailure(f"unknown outline {outline_id!r}")
        result = validate_outline(outline)
        if not result.ok:
            raise ValidationFailure(
                "cannot deploy invalid outline: "
                + "; ".join(v.message for v in result.violations)
            )
        if outline.status is not OutlineStatus.DEPLOYED:
            from dataclasses import replace as dc_replace

            outline = dc_replace(outline, status=OutlineStatus.DEPLOYED)
            self._outlines[outline_id] = outline
            write_document(self.root / "outlines" / f"{outline_id}.json", outline.to_doc())
        snapshot_text = encode_document(outline.to_doc())
        task = SessionTask(
            task_id=self.ids.new_id("tsk"),
            outline=outline,
            child_label=child_label,
            snapshot_text=snapshot_text,
        )
        self._tasks[task.task_id] = task
        self.save_task(task)
        return task

    def save_task(self, task: SessionTask) -> None:
        self._tasks[task.task_id] = task
        write_document(self.root / "tasks" / f"{task.task_id}.json", task.to_doc())

    def get_task(self, task_id: str) -> SessionTask | None:
        return self._tasks.get(task_id)

    def list_pending_tasks(self) -> list[SessionTask]:
        from .domain import TaskStatus

        return [
            self._tasks[k]
            for k in sorted(self._tasks)
            if self._tasks[k].status is TaskStatus.PENDING
        ]

    # -- sessions ----------------------------------------------------------------

    def register_engine(self, engine) -> None:
        """Subscribe to the engine so every event lands on disk immediately."""
        engine.subscribe(self._on_event)

    def _on_event(self, session: Session, event: SessionEvent) -> None:
        self._sessions[session.session_id] = session
        session_dir = self.root / "sessions" / session.session_id
        log_path = session_dir / "events.log"
        with self._io_lock:
            session_dir.mkdir(parents=True, exist_ok=True)
            if not log_path.exists():
                log_path.write_text(compact_json(_LOG_HEADER) + "\n", encoding="utf-8")
            with log_path.open("a", encoding="utf-8") as handle:
                handle.write(compact_json(event.to_doc()) + "\n")
            write_document(session_dir / "session.json", session.to_doc())
        # persist task claim-state changes driven by the engine
        task = self._tasks.get(session.task_id)
        if task is not None and event.kind in ("created", "completed", "aborted"):
            self.save_task(task)

    def get_session(self, session_id: str) -> Session | None:
        return self._sessions.get(session_id)

    def list_sessions(self) -> list[Session]:
        return [self._sessions[k] for k in sorted(self._sessions)]

    # -- parent shares -------------------------------------------------------------

    def share_annotated(self, session_id: str, principal_id: str) -> None:
        grants = self._shares.setdefault(session_id, set())
        grants.add(principal_id)
        write_document(
            self.root / "shares" / f"{session_id}.json",
            {
                "schema_version": SCHEMA_VERSION,
                "doc_kind": "export_share",
                "session_id": session_id,
                "principals": sorted(grants),
            },
        )

    def is_shared_with(self, session_id: str, principal_id: str) -> bool:
        return principal_id in self._shares.get(session_id, set())
