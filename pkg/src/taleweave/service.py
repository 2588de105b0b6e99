"""Expert- and device-facing HTTP service.

Bearer-token auth against a static token table; an explicit, total role
matrix (every endpoint names the roles it allows); all session mutations
funnel through the engine's single-writer-per-session locks. Generation runs
on background threads so GET state can show the generating phase; a
`manual_advance` config turns that off for deterministic driving (the device
then posts /sessions/{id}/advance itself).

Error mapping: ValidationFailure -> 400, unknown ids -> 404, role denial ->
403, wrong-state/conflict -> 409, provider failure -> 502.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field as dc_field, replace as dc_replace
from pathlib import Path
from typing import Any, Optional

from fastapi import Depends, FastAPI, File, Form, Header, Query, Request, UploadFile
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from pydantic import BaseModel

from .docio import read_document
from .domain import (
    BranchSpec,
    BranchValence,
    OutlineStatus,
    Session,
    StoryOutline,
    validate_outline,
)
from .engine import SessionEngine
from .errors import (
    IncompleteSessionError,
    ProviderError,
    TaleWeaveError,
    ValidationFailure,
    WrongStateError,
)
from .ids import IdGenerator
from .pipeline import AgentPipeline
from .providers import ProviderConfig, ProviderGateway
from .storybook import EXPORT_FORMATS, compile_annotated, compile_print, export
from .store import DataStore

MAX_UPLOAD_BYTES = 10 * 1024 * 1024
IMAGE_MIME_ALLOW = {"image/png", "image/jpeg"}
AUDIO_MIME_ALLOW = {"audio/wav", "audio/x-wav", "audio/wave"}
LONG_POLL_CAP_MS = 25_000

ROLES = ("expert", "device", "parent_viewer")

# The total role matrix: every endpoint name maps to the set of roles allowed.
ROLE_MATRIX: dict[str, frozenset[str]] = {
    "create_outline": frozenset({"expert"}),
    "list_outlines": frozenset({"expert"}),
    "get_outline": frozenset({"expert"}),
    "patch_chapter": frozenset({"expert"}),
    "add_branch": frozenset({"expert"}),
    "create_task": frozenset({"expert"}),
    "pending_tasks": frozenset({"expert", "device"}),
    "create_session": frozenset({"device"}),
    "upload_drawing": frozenset({"device"}),
    "accept_character": frozenset({"device"}),
    "submit_response": frozenset({"device"}),
    "advance": frozenset({"device"}),
    "get_state": frozenset({"expert", "device"}),
    "get_session": frozenset({"expert"}),
    "override_branch": frozenset({"expert"}),
    "add_comment": frozenset({"expert"}),
    "share_export": frozenset({"expert"}),
    "get_export": frozenset({"expert", "parent_viewer"}),
}


@dataclass(frozen=True)
class ApiPrincipal:
    principal_id: str
    role: str


@dataclass
class ServiceConfig:
    data_dir: Path | str
    tokens: dict[str, ApiPrincipal] = dc_field(default_factory=dict)
    provider_config: ProviderConfig = dc_field(default_factory=ProviderConfig)
    manual_advance: bool = False  # True: devices drive generation via /advance
    locale: str = "en"


def load_tokens(path: Path | str) -> dict[str, ApiPrincipal]:
    doc = read_document(path, expected_kind="api_tokens")
    tokens = {}
    for entry in doc["tokens"]:
        role = entry["role"]
        if role not in ROLES:
            raise ValidationFailure(f"unknown role {role!r} in token file")
        tokens[entry["token"]] = ApiPrincipal(entry["principal_id"], role)
    return tokens


class ApiError(TaleWeaveError):
    def __init__(self, status_code: int, code: str, message: str, detail: Any = None):
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.detail = detail


def _error_response(status_code: int, code: str, message: str, detail: Any = None) -> JSONResponse:
    return JSONResponse(
        status_code=status_code,
        content={"code": code, "message": message, "detail": detail},
    )


# -- request bodies ---------------------------------------------------------


class OutlineIn(BaseModel):
    brief: str
    child_note: str = ""


class ChapterPatch(BaseModel):
    setting: Optional[str] = None
    plot: Optional[str] = None
    ai_instruction: Optional[str] = None


class BranchIn(BaseModel):
    valence: str
    setting: str
    plot: str
    branch_id: Optional[str] = None


class TaskIn(BaseModel):
    outline_id: str
    child_label: str = ""


class SessionIn(BaseModel):
    task_id: str
    seed: int = 0


class ResponseIn(BaseModel):
    k: int
    text: Optional[str] = None
    audio_b64: Optional[str] = None
    idempotency_key: Optional[str] = None


class OverrideIn(BaseModel):
    k: int
    branch_id: str


class CommentIn(BaseModel):
    k: int
    text: str


class ShareIn(BaseModel):
    principal_id: str


# -- app factory --------------------------------------------------------------


def create_app(config: ServiceConfig) -> FastAPI:
    store = DataStore(config.data_dir)
    gateway = ProviderGateway(config.provider_config, store.assets)
    ids = IdGenerator()
    pipeline = AgentPipeline(gateway, ids=ids, locale=config.locale)
    engine = SessionEngine(pipeline, tasks=store.get_task, ids=ids)
    store.register_engine(engine)
    session_owners: dict[str, str] = {}
    owners_lock = threading.Lock()

    app = FastAPI(title="taleweave-backstage", version="0.1.0")
    app.state.store = store
    app.state.engine = engine
    app.state.config = config

    # -- auth / role enforcement ------------------------------------------------

    def principal_for(request: Request) -> ApiPrincipal:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise ApiError(401, "unauthenticated", "missing bearer token")
        principal = config.tokens.get(header[7:].strip())
        if principal is None:
            raise ApiError(401, "unauthenticated", "unknown token")
        return principal

    def require(endpoint: str):
        allowed = ROLE_MATRIX[endpoint]

        def dependency(request: Request) -> ApiPrincipal:
            principal = principal_for(request)
            if principal.role not in allowed:
                raise ApiError(
                    403,
                    "forbidden",
                    f"role {principal.role} may not call {endpoint}",
                )
            return principal

        return Depends(dependency)

    @app.exception_handler(ApiError)
    async def handle_api_error(_req, exc: ApiError):
        return _error_response(exc.status_code, exc.code, str(exc), exc.detail)

    @app.exception_handler(TaleWeaveError)
    async def handle_domain_error(_req, exc: TaleWeaveError):
        if isinstance(exc, (WrongStateError, IncompleteSessionError)):
            return _error_response(409, "wrong_state", str(exc))
        if isinstance(exc, ProviderError):
            return _error_response(502, "provider_failure", str(exc))
        if isinstance(exc, ValidationFailure):
            return _error_response(400, "invalid", str(exc))
        return _error_response(500, "internal", str(exc))

    # -- helpers -----------------------------------------------------------------

    def outline_or_404(outline_id: str) -> StoryOutline:
        outline = store.get_outline(outline_id)
        if outline is None:
            raise ApiError(404, "not_found", f"no outline {outline_id}")
        return outline

    def session_or_404(session_id: str) -> Session:
        session = store.get_session(session_id)
        if session is None:
            raise ApiError(404, "not_found", f"no session {session_id}")
        return session

    def check_device_owns(principal: ApiPrincipal, session_id: str) -> None:
        with owners_lock:
            owner = session_owners.get(session_id)
        if owner is not None and owner != principal.principal_id:
            raise ApiError(403, "forbidden", "session belongs to another device")

    def background_advance(session: Session) -> None:
        if config.manual_advance:
            return

        def work():
            try:
                engine.advance_generation(session)
            except WrongStateError:
                pass  # another driver advanced first

        threading.Thread(target=work, daemon=True).start()

    # -- outline authoring --------------------------------------------------------

    @app.post("/outlines", status_code=201)
    def create_outline(body: OutlineIn, principal: ApiPrincipal = require("create_outline")):
        if not body.brief.strip():
            raise ApiError(400, "invalid", "brief must be non-empty")
        outline = pipeline.outline_agent(body.brief, body.child_note)
        store.save_outline(outline)
        return outline.to_doc()

    @app.get("/outlines")
    def list_outlines(principal: ApiPrincipal = require("list_outlines")):
        return {"outlines": [o.to_doc() for o in store.list_outlines()]}

    @app.get("/outlines/{outline_id}")
    def get_outline(outline_id: str, principal: ApiPrincipal = require("get_outline")):
        return outline_or_404(outline_id).to_doc()

    def _edit_outline(
        outline: StoryOutline, if_match: Optional[str]
    ) -> StoryOutline:
        if outline.status is OutlineStatus.DEPLOYED:
            raise ApiError(409, "edit_after_deploy", "deployed outline is immutable")
        if if_match is not None and if_match.strip() != str(outline.version):
            raise ApiError(
                412, "version_conflict", f"outline is at version {outline.version}"
            )
        return outline

    @app.patch("/outlines/{outline_id}/chapters/{k}")
    def patch_chapter(
        outline_id: str,
        k: int,
        body: ChapterPatch,
        if_match: Optional[str] = Header(default=None),
        principal: ApiPrincipal = require("patch_chapter"),
    ):
        outline = _edit_outline(outline_or_404(outline_id), if_match)
        chapter = outline.chapter(k)
        if body.ai_instruction is not None:
            chapter = pipeline.rewrite_chapter(outline, k, body.ai_instruction)
        if body.setting is not None:
            chapter = dc_replace(chapter, setting=body.setting)
        if body.plot is not None:
            chapter = dc_replace(chapter, plot=body.plot)
        chapters = list(outline.chapters)
        chapters[k - 1] = chapter
        updated = dc_replace(
            outline,
            chapters=tuple(chapters),
            version=outline.version + 1,
            updated_at=engine.clock.now(),
        )
        store.save_outline(updated)
        return updated.to_doc()

    @app.post("/outlines/{outline_id}/chapters/{k}/branches")
    def add_branch(
        outline_id: str,
        k: int,
        body: BranchIn,
        if_match: Optional[str] = Header(default=None),
        principal: ApiPrincipal = require("add_branch"),
    ):
        outline = _edit_outline(outline_or_404(outline_id), if_match)
        chapter = outline.chapter(k)
        try:
            valence = BranchValence(body.valence)
        except ValueError:
            raise ApiError(400, "invalid", f"unknown valence {body.valence!r}") from None
        branch = BranchSpec(
            branch_id=body.branch_id or ids.new_id("brn"),
            valence=valence,
            setting=body.setting,
            plot=body.plot,
        )
        if any(b.branch_id == branch.branch_id for b in chapter.branches):
            raise ApiError(400, "invalid", f"duplicate branch_id {branch.branch_id}")
        chapters = list(outline.chapters)
        chapters[k - 1] = dc_replace(chapter, branches=chapter.branches + (branch,))
        updated = dc_replace(
            outline,
            chapters=tuple(chapters),
            version=outline.version + 1,
            updated_at=engine.clock.now(),
        )
        store.save_outline(updated)  # raises ValidationFailure -> 400 on bad branch
        return updated.to_doc()

    # -- deployment ---------------------------------------------------------------

    @app.post("/tasks", status_code=201)
    def create_task(body: TaskIn, principal: ApiPrincipal = require("create_task")):
        outline = outline_or_404(body.outline_id)
        result = validate_outline(outline)
        if not result.ok:
            raise ApiError(
                400,
                "invalid_outline",
                "outline fails validation",
                detail=[v.message for v in result.violations],
            )
        task = store.deploy_outline(body.outline_id, body.child_label)
        return task.to_doc()

    @app.get("/tasks/pending")
    def pending_tasks(principal: ApiPrincipal = require("pending_tasks")):
        return {"tasks": [t.to_doc() for t in store.list_pending_tasks()]}

    # -- session lifecycle ----------------------------------------------------------

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionIn, principal: ApiPrincipal = require("create_session")):
        task = store.get_task(body.task_id)
        if task is None:
            raise ApiError(404, "not_found", f"no task {body.task_id}")
        session = engine.start_session(task, seed=body.seed)
        store.save_task(task)
        with owners_lock:
            session_owners[session.session_id] = principal.principal_id
        return {"session_id": session.session_id, "state": session.state.encode()}

    @app.post("/sessions/{session_id}/drawing")
    def upload_drawing(
        session_id: str,
        name: str = Form(...),
        image: UploadFile = File(...),
        principal: ApiPrincipal = require("upload_drawing"),
    ):
        session = session_or_404(session_id)
        check_device_owns(principal, session_id)
        if image.content_type not in IMAGE_MIME_ALLOW:
            raise ApiError(400, "unsupported_media", f"image type {image.content_type!r}")
        data = image.file.read(MAX_UPLOAD_BYTES + 1)
        if len(data) > MAX_UPLOAD_BYTES:
            raise ApiError(400, "too_large", "image exceeds the 10 MB upload cap")
        ref = store.assets.put(data, ".png" if image.content_type == "image/png" else ".jpg")
        profile = engine.submit_drawing(session, ref, name)
        return {"profile": profile.to_doc(), "state": session.state.encode()}

    @app.post("/sessions/{session_id}/character/accept")
    def accept_character(
        session_id: str, principal: ApiPrincipal = require("accept_character")
    ):
        session = session_or_404(session_id)
        check_device_owns(principal, session_id)
        engine.accept_character(session)
        return {"state": session.state.encode(), "last_seq": session.last_seq}

    @app.post("/sessions/{session_id}/responses")
    def submit_response(
        session_id: str,
        body: ResponseIn,
        idempotency_key: Optional[str] = Header(default=None),
        principal: ApiPrincipal = require("submit_response"),
    ):
        session = session_or_404(session_id)
        check_device_owns(principal, session_id)
        key = body.idempotency_key or idempotency_key
        audio_ref = None
        if body.audio_b64 is not None:
            from .providers.types import unb64

            audio = unb64(body.audio_b64)
            if len(audio) > MAX_UPLOAD_BYTES:
                raise ApiError(400, "too_large", "audio exceeds the 10 MB upload cap")
            audio_ref = store.assets.put(audio, ".wav")
        outcome = engine.submit_response(
            session, body.k, text=body.text, audio_ref=audio_ref, idempotency_key=key
        )
        if outcome["status"] == "recorded":
            background_advance(session)
        return {
            "status": outcome["status"],
            "state": session.state.encode(),
            "last_seq": session.last_seq,
        }

    @app.post("/sessions/{session_id}/advance")
    def advance(session_id: str, principal: ApiPrincipal = require("advance")):
        session = session_or_404(session_id)
        check_device_owns(principal, session_id)
        engine.advance_generation(session)
        return {"state": session.state.encode(), "last_seq": session.last_seq}

    @app.get("/sessions/{session_id}/state")
    def get_state(
        session_id: str,
        after_seq: int = Query(default=-1),
        wait_ms: int = Query(default=0),
        principal: ApiPrincipal = require("get_state"),
    ):
        session = session_or_404(session_id)
        if wait_ms > 0 and session.last_seq <= after_seq:
            engine.wait_for_change(
                session, after_seq, min(wait_ms, LONG_POLL_CAP_MS) / 1000.0
            )
        return {"state": session.state.encode(), "last_seq": session.last_seq}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str, principal: ApiPrincipal = require("get_session")):
        return session_or_404(session_id).to_doc()

    @app.post("/sessions/{session_id}/branch-override")
    def override_branch(
        session_id: str,
        body: OverrideIn,
        principal: ApiPrincipal = require("override_branch"),
    ):
        session = session_or_404(session_id)
        engine.override_branch(session, body.k, body.branch_id)
        return {"state": session.state.encode(), "last_seq": session.last_seq}

    @app.post("/sessions/{session_id}/comments")
    def add_comment(
        session_id: str, body: CommentIn, principal: ApiPrincipal = require("add_comment")
    ):
        session = session_or_404(session_id)
        engine.add_teacher_comment(session, body.k, body.text)
        return {"state": session.state.encode(), "last_seq": session.last_seq}

    @app.post("/sessions/{session_id}/share")
    def share_export(
        session_id: str, body: ShareIn, principal: ApiPrincipal = require("share_export")
    ):
        session_or_404(session_id)
        store.share_annotated(session_id, body.principal_id)
        return {"shared_with": body.principal_id}

    @app.get("/sessions/{session_id}/export")
    def get_export(
        session_id: str,
        variant: str = Query(...),
        format: str = Query(default="interchange"),
        principal: ApiPrincipal = require("get_export"),
    ):
        session = session_or_404(session_id)
        if variant not in ("print", "annotated"):
            raise ApiError(400, "invalid", f"unknown variant {variant!r}")
        if format not in EXPORT_FORMATS:
            raise ApiError(400, "invalid", f"unknown format {format!r}")
        if principal.role == "parent_viewer":
            if variant != "annotated":
                raise ApiError(403, "forbidden", "parents may read the annotated variant only")
            if not store.is_shared_with(session_id, principal.principal_id):
                raise ApiError(403, "forbidden", "export has not been shared with you")
        book = compile_print(session) if variant == "print" else compile_annotated(session)
        payload = export(book, format)
        if format == "paginated_html":
            return Response(content=payload, media_type="text/html; charset=utf-8")
        if format == "plain_text":
            return PlainTextResponse(payload)
        return Response(content=payload, media_type="application/json; charset=utf-8")

    return app


def run_server(
    config: ServiceConfig, host: str = "127.0.0.1", port: int = 8571
) -> None:  # pragma: no cover - exercised via the CLI
    import uvicorn

    uvicorn.run(create_app(config), host=host, port=port, log_level="warning")
