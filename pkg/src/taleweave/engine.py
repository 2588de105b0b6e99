"""Event-sourced session engine.

One session runs the full protocol: character customization, four milestone
cycles (question -> response -> chapter), then reflection, analysis, and
completion. Every mutation is an event; the in-memory session is maintained
exclusively by :func:`apply_event`, so replaying the log reproduces the live
state field for field. Generation outputs ride inside event payloads —
replay never re-runs providers.

Concurrency: one lock per session serializes all mutations (single writer);
distinct sessions proceed fully in parallel.
"""
from __future__ import annotations

import threading
from dataclasses import replace
from pathlib import Path
from typing import Callable, Iterable, Optional

from .docio import SCHEMA_VERSION, compact_json, decode_document, format_ts
from .domain import (
    ABORTED,
    AnalysisReport,
    CHAPTER_COUNT,
    CHARACTER_CUSTOMIZATION,
    COMPLETE,
    CharacterProfile,
    GeneratedChapter,
    Milestone,
    REFLECTING,
    ResponseSource,
    Session,
    SessionEvent,
    SessionState,
    SessionTask,
    TaskStatus,
    awaiting_response,
    generating_chapter,
)
from .errors import (
    CorruptLogError,
    MalformedOutputError,
    ProviderError,
    TaskAlreadyClaimedError,
    TooLateError,
    ValidationFailure,
    WrongMilestoneError,
    WrongStateError,
)
from .ids import IdGenerator, SystemClock

MAX_REASKS = 2
PLACEHOLDER_RESPONSE = "…"
ABORT_FAILURE_THRESHOLD = 3

EVENT_KINDS = (
    "created",
    "drawing_submitted",
    "character_generated",
    "character_accepted",
    "question_asked",
    "response_reask",
    "response_recorded",
    "branch_selected",
    "branch_overridden",
    "chapter_generated",
    "generation_failed",
    "reflection_generated",
    "analysis_generated",
    "teacher_comment_added",
    "completed",
    "aborted",
)


# --------------------------------------------------------------------------
# Event legality and application (shared by live engine and replay)
# --------------------------------------------------------------------------


def event_legal(session: Session, kind: str, payload: dict) -> Optional[str]:
    """None when the event is protocol-legal, else a human-readable reason."""
    state = session.state
    k = payload.get("k")

    if kind == "created":
        return None if not session.event_log else "created must be the first event"
    if not session.event_log:
        return "first event must be created"
    if state.terminal:
        return f"session is {state.phase}"

    if kind == "drawing_submitted" or kind == "character_generated":
        if state != CHARACTER_CUSTOMIZATION:
            return f"requires character_customization, session is {state.encode()}"
        return None
    if kind == "character_accepted":
        if state != CHARACTER_CUSTOMIZATION:
            return f"requires character_customization, session is {state.encode()}"
        if session.character_generated_count() < 1:
            return "no character has been generated"
        return None
    if kind == "question_asked":
        if k == 1:
            if state != CHARACTER_CUSTOMIZATION or not session.events_of("character_accepted"):
                return "question 1 requires an accepted character"
            if any(m.index == 1 for m in session.milestones):
                return "question 1 was already asked"
            return None
        if state != generating_chapter(k - 1) or not session.has_chapter(k - 1):
            return f"question {k} requires chapter {k - 1} generated"
        return None
    if kind == "response_reask":
        if state != awaiting_response(k):
            return f"requires awaiting_response({k}), session is {state.encode()}"
        if session.reask_count(k) >= MAX_REASKS:
            return "re-ask budget exhausted"
        return None
    if kind == "response_recorded":
        if state.phase != "awaiting_response":
            return f"requires awaiting_response, session is {state.encode()}"
        if state.k != k:
            return f"awaiting milestone {state.k}, got response for {k}"
        return None
    if kind == "branch_selected":
        if state != generating_chapter(k):
            return f"requires generating_chapter({k}), session is {state.encode()}"
        if any(
            e.kind == "branch_selected" and e.payload["k"] == k for e in session.event_log
        ):
            return f"branch already selected for chapter {k}"
        return None
    if kind == "branch_overridden":
        if session.has_chapter(k):
            return f"chapter {k} is already generated"
        if not any(
            e.kind == "branch_selected" and e.payload["k"] == k for e in session.event_log
        ):
            return f"no branch selection to override for chapter {k}"
        return None
    if kind == "chapter_generated":
        if state != generating_chapter(k):
            return f"requires generating_chapter({k}), session is {state.encode()}"
        return None
    if kind == "generation_failed":
        if state.phase not in ("generating_chapter", "reflecting"):
            return f"requires a generating state, session is {state.encode()}"
        return None
    if kind == "reflection_generated":
        if state != REFLECTING or session.reflection is not None:
            return "requires reflecting state without a reflection"
        return None
    if kind == "analysis_generated":
        if state != REFLECTING or session.reflection is None or session.analysis is not None:
            return "requires reflecting state with a reflection and no analysis"
        return None
    if kind == "completed":
        if state != REFLECTING or session.reflection is None or session.analysis is None:
            return "completion requires reflection and analysis"
        return None
    if kind == "teacher_comment_added":
        milestone = next((m for m in session.milestones if m.index == k), None)
        if milestone is None or not milestone.answered:
            return f"milestone {k} has no recorded response to comment on"
        return None
    if kind == "aborted":
        return None
    return f"unknown event kind {kind!r}"


def apply_event(session: Session, event: SessionEvent) -> None:
    """Fold one event into the session. The only place session state mutates."""
    kind, payload = event.kind, event.payload
    if kind == "created":
        session.state = CHARACTER_CUSTOMIZATION
        session.outline_title = payload.get("outline_title", "")
    elif kind == "character_generated":
        session.character = CharacterProfile.from_doc(payload["profile"])
    elif kind == "question_asked":
        session.milestones.append(
            Milestone(
                index=payload["k"],
                question_text=payload["question_text"],
                question_audio=payload.get("question_audio"),
                asked_at=event.at,
            )
        )
        session.state = awaiting_response(payload["k"])
    elif kind == "response_recorded":
        k = payload["k"]
        milestone = session.milestone(k)
        session.milestones[session.milestones.index(milestone)] = replace(
            milestone,
            response_text=payload["response_text"],
            response_audio=payload.get("response_audio"),
            response_source=ResponseSource(payload["response_source"]),
            answered_at=event.at,
            placeholder=payload.get("placeholder", False),
        )
        session.state = generating_chapter(k)
    elif kind in ("branch_selected", "branch_overridden"):
        k = payload["k"]
        milestone = session.milestone(k)
        session.milestones[session.milestones.index(milestone)] = replace(
            milestone, selected_branch=payload["branch_id"]
        )
    elif kind == "chapter_generated":
        session.chapters.append(
            GeneratedChapter(
                index=payload["k"],
                paragraphs=tuple(payload["paragraphs"]),
                panel_image=payload["panel_image"],
                provider_trace=payload.get("provider_trace", {}),
            )
        )
        if payload["k"] == CHAPTER_COUNT:
            session.state = REFLECTING
    elif kind == "reflection_generated":
        session.reflection = payload["text"]
    elif kind == "analysis_generated":
        session.analysis = AnalysisReport.from_doc(payload["report"])
    elif kind == "teacher_comment_added":
        session.teacher_comments.append((payload["k"], payload["text"]))
    elif kind == "completed":
        session.state = COMPLETE
    elif kind == "aborted":
        session.state = ABORTED
    # drawing_submitted, character_accepted, response_reask, generation_failed
    # carry bookkeeping only; their presence in the log is their effect.
    session.event_log.append(event)


def replay(events: Iterable[SessionEvent]) -> Session:
    """Reconstruct a session from its event log alone. Pure; never calls providers."""
    events = list(events)
    if not events:
        raise CorruptLogError("empty event log", bad_seq=0)
    first = events[0]
    if first.kind != "created" or first.seq != 1:
        raise CorruptLogError("log must start with created at seq 1", bad_seq=first.seq)
    payload = first.payload
    session = Session(
        session_id=payload["session_id"],
        task_id=payload["task_id"],
        rng_seed=payload["rng_seed"],
    )
    expected = 1
    for event in events:
        if event.seq != expected:
            raise CorruptLogError(
                f"sequence gap: expected {expected}, found {event.seq}", bad_seq=event.seq
            )
        if event.kind not in EVENT_KINDS:
            raise CorruptLogError(f"unknown event kind {event.kind!r}", bad_seq=event.seq)
        reason = event_legal(session, event.kind, event.payload)
        if reason is not None:
            raise CorruptLogError(
                f"illegal event {event.kind} at seq {event.seq}: {reason}", bad_seq=event.seq
            )
        apply_event(session, event)
        expected += 1
    return session


# --------------------------------------------------------------------------
# Event-log files (append-only, one JSON event per line, header line first)
# --------------------------------------------------------------------------

_LOG_HEADER = {"schema_version": SCHEMA_VERSION, "kind": "session_event_log"}


def write_event_log(path: Path | str, session: Session) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [compact_json(_LOG_HEADER)]
    lines += [compact_json(e.to_doc()) for e in session.event_log]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_event_log(path: Path | str) -> list[SessionEvent]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise CorruptLogError("event log file is empty", bad_seq=0)
    header = decode_document(lines[0])
    if header.get("kind") != "session_event_log":
        raise CorruptLogError("missing event log header line", bad_seq=0)
    return [SessionEvent.from_doc(decode_document(line)) for line in lines[1:] if line.strip()]


# --------------------------------------------------------------------------
# The engine
# --------------------------------------------------------------------------


class SessionEngine:
    def __init__(
        self,
        pipeline,
        tasks: Callable[[str], SessionTask] | dict[str, SessionTask] | None = None,
        clock=None,
        ids: IdGenerator | None = None,
    ):
        self.pipeline = pipeline
        self.clock = clock or SystemClock()
        self.ids = ids or IdGenerator(clock=self.clock)
        self._tasks = tasks if callable(tasks) else (tasks or {}).get
        self._locks: dict[str, threading.RLock] = {}
        self._locks_guard = threading.Lock()
        self._claim_guard = threading.Lock()
        self._observers: list[Callable[[Session, SessionEvent], None]] = []
        self._change = threading.Condition()

    # -- infrastructure -------------------------------------------------------

    def subscribe(self, observer: Callable[[Session, SessionEvent], None]) -> None:
        self._observers.append(observer)

    def lock_for(self, session_id: str) -> threading.RLock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.RLock())

    def _task(self, session: Session) -> SessionTask:
        task = self._tasks(session.task_id)
        if task is None:
            raise ValidationFailure(f"unknown task {session.task_id!r}")
        return task

    def _emit(self, session: Session, kind: str, payload: dict) -> SessionEvent:
        reason = event_legal(session, kind, payload)
        if reason is not None:
            raise WrongStateError(f"cannot {kind}: {reason}")
        event = SessionEvent(
            seq=session.last_seq + 1, kind=kind, payload=payload, at=self.clock.now()
        )
        apply_event(session, event)
        for observer in self._observers:
            observer(session, event)
        with self._change:
            self._change.notify_all()
        return event

    def wait_for_change(self, session: Session, after_seq: int, timeout_s: float) -> None:
        """Block until the session log grows past after_seq or the timeout passes."""
        deadline = timeout_s
        with self._change:
            self._change.wait_for(lambda: session.last_seq > after_seq, timeout=deadline)

    # -- protocol operations --------------------------------------------------

    def start_session(self, task: SessionTask, seed: int) -> Session:
        with self._claim_guard:
            if task.status != TaskStatus.PENDING:
                raise TaskAlreadyClaimedError(f"task {task.task_id} is {task.status.value}")
            task.status = TaskStatus.CLAIMED
        session = Session(
            session_id=self.ids.new_id("ses"), task_id=task.task_id, rng_seed=seed
        )
        self._emit(
            session,
            "created",
            {
                "session_id": session.session_id,
                "task_id": task.task_id,
                "rng_seed": seed,
                "outline_title": task.outline.title,
            },
        )
        return session

    def submit_drawing(self, session: Session, drawing_ref: str, name: str) -> CharacterProfile:
        with self.lock_for(session.session_id):
            reason = event_legal(session, "drawing_submitted", {})
            if reason is not None:
                raise WrongStateError(f"cannot submit drawing: {reason}")
            attempt = session.character_generated_count() + 1
            profile = self.pipeline.character_agent(drawing_ref, name, attempt=attempt)
            self._emit(session, "drawing_submitted", {"drawing": drawing_ref, "name": name})
            self._emit(session, "character_generated", {"profile": profile.to_doc()})
            return profile

    def accept_character(self, session: Session) -> Session:
        with self.lock_for(session.session_id):
            if session.character_generated_count() < 1:
                raise WrongStateError("cannot accept: no character has been generated")
            reason = event_legal(session, "character_accepted", {})
            if reason is not None:
                raise WrongStateError(f"cannot accept character: {reason}")
            self._emit(session, "character_accepted", {})
            self._ask_question(session, 1)
            return session

    def _ask_question(self, session: Session, k: int) -> None:
        task = self._task(session)
        question = self.pipeline.question_agent(
            task.outline, session.character, session.chapters, k
        )
        audio = self.pipeline.gateway.synthesize_speech(question)
        self._emit(
            session,
            "question_asked",
            {"k": k, "question_text": question, "question_audio": audio},
        )

    def submit_response(
        self,
        session: Session,
        k: int,
        text: str | None = None,
        audio_ref: str | None = None,
        idempotency_key: str | None = None,
    ) -> dict:
        """Record a milestone response (or re-ask on a blank transcript).

        Returns {"status": "recorded" | "reask" | "duplicate", "session": session}.
        """
        with self.lock_for(session.session_id):
            if idempotency_key and idempotency_key in session.seen_idempotency_keys():
                return {"status": "duplicate", "session": session}
            if session.state.phase != "awaiting_response":
                raise WrongStateError(
                    f"cannot submit response: session is {session.state.encode()}"
                )
            if session.state.k != k:
                raise WrongMilestoneError(
                    f"awaiting milestone {session.state.k}, got response for {k}"
                )
            if (text is None) == (audio_ref is None):
                raise ValidationFailure("provide exactly one of text or audio")

            if audio_ref is not None:
                transcript = self.pipeline.gateway.transcribe(audio_ref)
                source = ResponseSource.TRANSCRIBED
            else:
                if not text.strip():
                    raise ValidationFailure("typed response must be non-empty")
                transcript = text
                source = ResponseSource.TYPED

            placeholder = False
            if not transcript.strip():
                if session.reask_count(k) < MAX_REASKS:
                    self._emit(
                        session,
                        "response_reask",
                        {
                            "k": k,
                            "attempt": session.reask_count(k) + 1,
                            "idempotency_key": idempotency_key,
                        },
                    )
                    return {"status": "reask", "session": session}
                transcript = PLACEHOLDER_RESPONSE
                placeholder = True

            self._emit(
                session,
                "response_recorded",
                {
                    "k": k,
                    "response_text": transcript,
                    "response_audio": audio_ref,
                    "response_source": source.value,
                    "placeholder": placeholder,
                    "idempotency_key": idempotency_key,
                },
            )
            chapter = self._task(session).outline.chapter(k)
            if chapter.branches:
                branch_id = self.pipeline.select_branch(chapter, transcript)
                self._emit(session, "branch_selected", {"k": k, "branch_id": branch_id})
            return {"status": "recorded", "session": session}

    def override_branch(self, session: Session, k: int, branch_id: str) -> Session:
        with self.lock_for(session.session_id):
            if session.has_chapter(k):
                raise TooLateError(f"chapter {k} is already generated")
            reason = event_legal(session, "branch_overridden", {"k": k, "branch_id": branch_id})
            if reason is not None:
                raise WrongStateError(f"cannot override branch: {reason}")
            chapter = self._task(session).outline.chapter(k)
            chapter.branch(branch_id)  # raises ValidationFailure on unknown id
            self._emit(
                session,
                "branch_overridden",
                {"k": k, "branch_id": branch_id, "by": "teacher"},
            )
            return session

    def advance_generation(self, session: Session) -> Session:
        """Run the generation work pending for the current state.

        generating_chapter(k): write + draw chapter k, then ask question k+1
        (or move to reflection after chapter 4). reflecting: produce
        reflection, analysis, and completion. Agent failures are recorded and
        retryable; three consecutive failures abort the session.
        """
        with self.lock_for(session.session_id):
            state = session.state
            if state.phase not in ("generating_chapter", "reflecting"):
                raise WrongStateError(f"nothing to generate: session is {state.encode()}")
            task = self._task(session)
            try:
                if state.phase == "generating_chapter":
                    k = state.k
                    milestone = session.milestone(k)
                    chapter_spec = task.outline.chapter(k)
                    branch = None
                    branch_id = session.branch_for(k)
                    if branch_id is not None:
                        branch = chapter_spec.branch(branch_id)
                    paragraphs, wtrace = self.pipeline.writing_agent(
                        task.outline, session.character, session.chapters, milestone, branch
                    )
                    image_ref, dtrace = self.pipeline.drawing_agent(
                        paragraphs, session.character.illustration, session.character.name
                    )
                    self._emit(
                        session,
                        "chapter_generated",
                        {
                            "k": k,
                            "paragraphs": paragraphs,
                            "panel_image": image_ref,
                            "provider_trace": {
                                "writing": wtrace.to_doc(),
                                "drawing": dtrace.to_doc(),
                            },
                        },
                    )
                    if k < CHAPTER_COUNT:
                        self._ask_question(session, k + 1)
                        return session
                # reflection + analysis + completion (reached after chapter 4
                # in this same call, or via retry from the reflecting state)
                if session.reflection is None:
                    reflection = self.pipeline.reflection_agent(session, session.character)
                    self._emit(session, "reflection_generated", {"text": reflection})
                if session.analysis is None:
                    report = self.pipeline.analysis_agent(
                        session, child_note=task.outline.child_profile_note
                    )
                    self._emit(session, "analysis_generated", {"report": report.to_doc()})
                self._emit(session, "completed", {})
                task.status = TaskStatus.DONE
                return session
            except (ProviderError, MalformedOutputError) as exc:
                self._emit(
                    session,
                    "generation_failed",
                    {"k": session.state.k, "error": str(exc)},
                )
                if session.consecutive_failures() >= ABORT_FAILURE_THRESHOLD:
                    self._emit(
                        session,
                        "aborted",
                        {
                            "reason": (
                                f"{ABORT_FAILURE_THRESHOLD} consecutive generation "
                                f"failures; last: {exc}"
                            )
                        },
                    )
                return session

    def add_teacher_comment(self, session: Session, k: int, text: str) -> Session:
        with self.lock_for(session.session_id):
            if not text.strip():
                raise ValidationFailure("teacher comment must be non-empty")
            reason = event_legal(session, "teacher_comment_added", {"k": k})
            if reason is not None:
                raise WrongStateError(f"cannot add comment: {reason}")
            self._emit(session, "teacher_comment_added", {"k": k, "text": text})
            return session

    def abort(self, session: Session, reason: str) -> Session:
        with self.lock_for(session.session_id):
            legal = event_legal(session, "aborted", {})
            if legal is not None:
                raise WrongStateError(f"cannot abort: {legal}")
            self._emit(session, "aborted", {"reason": reason})
            return session
