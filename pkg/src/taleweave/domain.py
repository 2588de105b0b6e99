"""Shared domain types, validation, and canonical serialized forms.

All types here are plain frozen-ish dataclasses with explicit ``to_doc`` /
``from_doc`` converters so the on-disk representation stays under our control
(see :mod:`taleweave.docio`). Values are immutable after construction and safe
to share across threads; mutation happens by building new values.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from typing import Any, Optional

from .docio import SCHEMA_VERSION, format_ts, parse_ts
from .errors import MalformedCodeError, ValidationFailure

# --------------------------------------------------------------------------
# Story outlines
# --------------------------------------------------------------------------

CHAPTER_COUNT = 4
PARAGRAPHS_PER_CHAPTER = 4


class OutlineStatus(str, Enum):
    DRAFT = "draft"
    DEPLOYED = "deployed"


class BranchValence(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class BranchSpec:
    branch_id: str
    valence: BranchValence
    setting: str
    plot: str

    def to_doc(self) -> dict[str, Any]:
        return {
            "branch_id": self.branch_id,
            "valence": self.valence.value,
            "setting": self.setting,
            "plot": self.plot,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "BranchSpec":
        return cls(
            branch_id=doc["branch_id"],
            valence=BranchValence(doc["valence"]),
            setting=doc["setting"],
            plot=doc["plot"],
        )


@dataclass(frozen=True)
class ChapterSpec:
    index: int
    setting: str
    plot: str
    branches: tuple[BranchSpec, ...] = ()

    def branch(self, branch_id: str) -> BranchSpec:
        for b in self.branches:
            if b.branch_id == branch_id:
                return b
        raise ValidationFailure(f"chapter {self.index} has no branch {branch_id!r}")

    def to_doc(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "setting": self.setting,
            "plot": self.plot,
            "branches": [b.to_doc() for b in self.branches],
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "ChapterSpec":
        return cls(
            index=doc["index"],
            setting=doc["setting"],
            plot=doc["plot"],
            branches=tuple(BranchSpec.from_doc(b) for b in doc.get("branches", [])),
        )


@dataclass(frozen=True)
class StoryOutline:
    outline_id: str
    title: str
    brief: str
    child_profile_note: str
    chapters: tuple[ChapterSpec, ...]
    status: OutlineStatus = OutlineStatus.DRAFT
    version: int = 1
    created_at: datetime | None = None
    updated_at: datetime | None = None

    def chapter(self, k: int) -> ChapterSpec:
        if not 1 <= k <= len(self.chapters):
            raise ValidationFailure(f"chapter index {k} out of range")
        return self.chapters[k - 1]

    def next_draft(self, now: datetime | None = None) -> "StoryOutline":
        """A mutable successor: version bumped, status back to draft."""
        return replace(
            self,
            status=OutlineStatus.DRAFT,
            version=self.version + 1,
            updated_at=now or self.updated_at,
        )

    def content_fields(self) -> tuple:
        """The fields frozen by deployment (identity/status/version excluded)."""
        return (self.title, self.brief, self.child_profile_note, self.chapters)

    def to_doc(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "doc_kind": "story_outline",
            "outline_id": self.outline_id,
            "title": self.title,
            "brief": self.brief,
            "child_profile_note": self.child_profile_note,
            "status": self.status.value,
            "version": self.version,
            "created_at": format_ts(self.created_at) if self.created_at else None,
            "updated_at": format_ts(self.updated_at) if self.updated_at else None,
            "chapters": [c.to_doc() for c in self.chapters],
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "StoryOutline":
        violations = validate_outline_doc(doc)
        if violations:
            raise ValidationFailure(
                "invalid outline document: " + "; ".join(v.message for v in violations)
            )
        return cls(
            outline_id=doc["outline_id"],
            title=doc["title"],
            brief=doc["brief"],
            child_profile_note=doc.get("child_profile_note", ""),
            status=OutlineStatus(doc["status"]),
            version=doc["version"],
            created_at=parse_ts(doc["created_at"]) if doc.get("created_at") else None,
            updated_at=parse_ts(doc["updated_at"]) if doc.get("updated_at") else None,
            chapters=tuple(ChapterSpec.from_doc(c) for c in doc["chapters"]),
        )


# --------------------------------------------------------------------------
# Outline validation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    where: str = ""


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def _nonempty(value: Any) -> bool:
    return isinstance(value, str) and bool(value.strip())


def validate_outline_doc(
    doc: dict[str, Any], prior_doc: dict[str, Any] | None = None
) -> list[Violation]:
    """Structural rules for an outline document. Violations are data, not errors."""
    out: list[Violation] = []

    def bad(code: str, message: str, where: str = "") -> None:
        out.append(Violation(code, message, where))

    chapters = doc.get("chapters")
    if not isinstance(chapters, list):
        bad("chapter_count", "chapters must be a list of 4 chapter specs")
        return out
    if len(chapters) != CHAPTER_COUNT:
        bad("chapter_count", f"chapter count != {CHAPTER_COUNT} (got {len(chapters)})")

    if not isinstance(doc.get("version"), int) or doc["version"] < 1:
        bad("bad_version", f"version must be an integer >= 1 (got {doc.get('version')!r})")
    if doc.get("status") not in (s.value for s in OutlineStatus):
        bad("bad_status", f"status must be draft or deployed (got {doc.get('status')!r})")
    if not _nonempty(doc.get("title")):
        bad("empty_title", "title must be non-empty")

    for pos, chapter in enumerate(chapters, start=1):
        where = f"chapter {pos}"
        if not isinstance(chapter, dict):
            bad("bad_chapter", "chapter spec must be a map", where)
            continue
        if chapter.get("index") != pos:
            bad(
                "chapter_index",
                f"chapter index {chapter.get('index')!r} does not match position {pos}",
                where,
            )
        if not _nonempty(chapter.get("setting")):
            bad("empty_setting", f"{where} has an empty setting", where)
        if not _nonempty(chapter.get("plot")):
            bad("empty_plot", f"{where} has an empty plot", where)

        seen_ids: set[str] = set()
        for branch in chapter.get("branches", []):
            if not isinstance(branch, dict):
                bad("bad_branch", "branch spec must be a map", where)
                continue
            bid = branch.get("branch_id", "")
            bwhere = f"{where} branch {bid or '?'}"
            if not _nonempty(bid):
                bad("missing_branch_id", f"{where} has a branch without branch_id", where)
            elif bid in seen_ids:
                bad("duplicate_branch_id", f"duplicate branch_id {bid!r} in {where}", bwhere)
            else:
                seen_ids.add(bid)
            if branch.get("valence") not in (v.value for v in BranchValence):
                bad("bad_valence", f"{bwhere} has invalid valence {branch.get('valence')!r}", bwhere)
            if not _nonempty(branch.get("setting")):
                bad("branch_empty_setting", f"{bwhere} has an empty setting", bwhere)
            if not _nonempty(branch.get("plot")):
                bad("branch_empty_plot", f"{bwhere} has an empty plot", bwhere)

    if prior_doc is not None and prior_doc.get("status") == OutlineStatus.DEPLOYED.value:
        content_keys = ("title", "brief", "child_profile_note", "chapters")
        changed = any(doc.get(k) != prior_doc.get(k) for k in content_keys)
        is_new_draft = (
            doc.get("status") == OutlineStatus.DRAFT.value
            and isinstance(doc.get("version"), int)
            and doc["version"] > prior_doc.get("version", 0)
        )
        if changed and not is_new_draft:
            bad(
                "edit_after_deploy",
                "deployed outline is immutable; edits must create a new draft version",
            )
    return out


def validate_outline(
    outline: StoryOutline, prior: StoryOutline | None = None
) -> ValidationResult:
    violations = validate_outline_doc(
        outline.to_doc(), prior.to_doc() if prior is not None else None
    )
    return ValidationResult(tuple(violations))


# --------------------------------------------------------------------------
# Characters, milestones, chapters, sessions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CharacterProfile:
    name: str
    description: str
    source_drawing: str  # asset reference (relative path)
    illustration: str  # asset reference
    generation_attempt: int = 1

    def to_doc(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "description": self.description,
            "source_drawing": self.source_drawing,
            "illustration": self.illustration,
            "generation_attempt": self.generation_attempt,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "CharacterProfile":
        return cls(
            name=doc["name"],
            description=doc["description"],
            source_drawing=doc["source_drawing"],
            illustration=doc["illustration"],
            generation_attempt=doc["generation_attempt"],
        )


class ResponseSource(str, Enum):
    TYPED = "typed"
    TRANSCRIBED = "transcribed"


@dataclass(frozen=True)
class Milestone:
    index: int
    question_text: str
    question_audio: Optional[str] = None
    response_text: Optional[str] = None
    response_audio: Optional[str] = None
    response_source: Optional[ResponseSource] = None
    asked_at: Optional[datetime] = None
    answered_at: Optional[datetime] = None
    selected_branch: Optional[str] = None
    placeholder: bool = False

    @property
    def answered(self) -> bool:
        return self.response_text is not None

    def to_doc(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "question_text": self.question_text,
            "question_audio": self.question_audio,
            "response_text": self.response_text,
            "response_audio": self.response_audio,
            "response_source": self.response_source.value if self.response_source else None,
            "asked_at": format_ts(self.asked_at) if self.asked_at else None,
            "answered_at": format_ts(self.answered_at) if self.answered_at else None,
            "selected_branch": self.selected_branch,
            "placeholder": self.placeholder,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "Milestone":
        return cls(
            index=doc["index"],
            question_text=doc["question_text"],
            question_audio=doc.get("question_audio"),
            response_text=doc.get("response_text"),
            response_audio=doc.get("response_audio"),
            response_source=(
                ResponseSource(doc["response_source"]) if doc.get("response_source") else None
            ),
            asked_at=parse_ts(doc["asked_at"]) if doc.get("asked_at") else None,
            answered_at=parse_ts(doc["answered_at"]) if doc.get("answered_at") else None,
            selected_branch=doc.get("selected_branch"),
            placeholder=doc.get("placeholder", False),
        )


@dataclass(frozen=True)
class GeneratedChapter:
    index: int
    paragraphs: tuple[str, ...]
    panel_image: str  # asset reference
    provider_trace: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.paragraphs) != PARAGRAPHS_PER_CHAPTER:
            raise ValidationFailure(
                f"chapter {self.index} must have exactly {PARAGRAPHS_PER_CHAPTER} paragraphs"
            )
        if any(not p.strip() for p in self.paragraphs):
            raise ValidationFailure(f"chapter {self.index} has an empty paragraph")

    def to_doc(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "paragraphs": list(self.paragraphs),
            "panel_image": self.panel_image,
            "provider_trace": self.provider_trace,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "GeneratedChapter":
        return cls(
            index=doc["index"],
            paragraphs=tuple(doc["paragraphs"]),
            panel_image=doc["panel_image"],
            provider_trace=doc.get("provider_trace", {}),
        )


@dataclass(frozen=True)
class AnalysisReport:
    per_response_comments: tuple[str, ...]
    overall_analysis: str
    parent_advice: str

    def to_doc(self) -> dict[str, Any]:
        return {
            "per_response_comments": list(self.per_response_comments),
            "overall_analysis": self.overall_analysis,
            "parent_advice": self.parent_advice,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "AnalysisReport":
        return cls(
            per_response_comments=tuple(doc["per_response_comments"]),
            overall_analysis=doc["overall_analysis"],
            parent_advice=doc["parent_advice"],
        )


_STATE_RE = re.compile(r"^(awaiting_response|generating_chapter)\((\d)\)$")

_PLAIN_PHASES = {"created", "character_customization", "reflecting", "complete", "aborted"}
_INDEXED_PHASES = {"awaiting_response", "generating_chapter"}
TERMINAL_PHASES = {"complete", "aborted"}


@dataclass(frozen=True)
class SessionState:
    phase: str
    k: Optional[int] = None

    def __post_init__(self):
        if self.phase in _PLAIN_PHASES:
            if self.k is not None:
                raise ValidationFailure(f"state {self.phase} takes no milestone index")
        elif self.phase in _INDEXED_PHASES:
            if self.k is None or not 1 <= self.k <= CHAPTER_COUNT:
                raise ValidationFailure(f"state {self.phase} needs k in 1..{CHAPTER_COUNT}")
        else:
            raise ValidationFailure(f"unknown session phase {self.phase!r}")

    @property
    def terminal(self) -> bool:
        return self.phase in TERMINAL_PHASES

    def encode(self) -> str:
        return f"{self.phase}({self.k})" if self.k is not None else self.phase

    @classmethod
    def decode(cls, text: str) -> "SessionState":
        if text in _PLAIN_PHASES:
            return cls(text)
        match = _STATE_RE.match(text)
        if not match:
            raise ValidationFailure(f"bad session state {text!r}")
        return cls(match.group(1), int(match.group(2)))


CREATED = SessionState("created")
CHARACTER_CUSTOMIZATION = SessionState("character_customization")
REFLECTING = SessionState("reflecting")
COMPLETE = SessionState("complete")
ABORTED = SessionState("aborted")


def awaiting_response(k: int) -> SessionState:
    return SessionState("awaiting_response", k)


def generating_chapter(k: int) -> SessionState:
    return SessionState("generating_chapter", k)


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    kind: str
    payload: dict[str, Any]
    at: datetime

    def to_doc(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "kind": self.kind,
            "payload": self.payload,
            "at": format_ts(self.at),
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "SessionEvent":
        return cls(
            seq=doc["seq"],
            kind=doc["kind"],
            payload=doc["payload"],
            at=parse_ts(doc["at"]),
        )


@dataclass
class Session:
    """Event-sourced record of one child's co-creation run.

    The ``event_log`` is authoritative: every other field is reconstructable
    by replaying it (see :func:`taleweave.engine.replay`).
    """

    session_id: str
    task_id: str
    rng_seed: int
    state: SessionState = CREATED
    outline_title: str = ""
    character: Optional[CharacterProfile] = None
    milestones: list[Milestone] = field(default_factory=list)
    chapters: list[GeneratedChapter] = field(default_factory=list)
    reflection: Optional[str] = None
    analysis: Optional[AnalysisReport] = None
    teacher_comments: list[tuple[int, str]] = field(default_factory=list)
    event_log: list[SessionEvent] = field(default_factory=list)

    @property
    def last_seq(self) -> int:
        return self.event_log[-1].seq if self.event_log else 0

    def milestone(self, k: int) -> Milestone:
        for m in self.milestones:
            if m.index == k:
                return m
        raise ValidationFailure(f"session has no milestone {k}")

    def has_chapter(self, k: int) -> bool:
        return any(c.index == k for c in self.chapters)

    def events_of(self, kind: str) -> list[SessionEvent]:
        return [e for e in self.event_log if e.kind == kind]

    def character_generated_count(self) -> int:
        return len(self.events_of("character_generated"))

    def reask_count(self, k: int) -> int:
        return sum(
            1 for e in self.event_log if e.kind == "response_reask" and e.payload["k"] == k
        )

    def consecutive_failures(self) -> int:
        count = 0
        for event in reversed(self.event_log):
            if event.kind == "generation_failed":
                count += 1
            else:
                break
        return count

    def branch_for(self, k: int) -> Optional[str]:
        """The effective branch for chapter k (override wins over selection)."""
        chosen = None
        for event in self.event_log:
            if event.kind in ("branch_selected", "branch_overridden") and event.payload["k"] == k:
                chosen = event.payload["branch_id"]
        return chosen

    def seen_idempotency_keys(self) -> set[str]:
        keys = set()
        for event in self.event_log:
            key = event.payload.get("idempotency_key")
            if key:
                keys.add(key)
        return keys

    def to_doc(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "doc_kind": "session",
            "session_id": self.session_id,
            "task_id": self.task_id,
            "rng_seed": self.rng_seed,
            "state": self.state.encode(),
            "outline_title": self.outline_title,
            "character": self.character.to_doc() if self.character else None,
            "milestones": [m.to_doc() for m in self.milestones],
            "chapters": [c.to_doc() for c in self.chapters],
            "reflection": self.reflection,
            "analysis": self.analysis.to_doc() if self.analysis else None,
            "teacher_comments": [[k, text] for k, text in self.teacher_comments],
            "event_log": [e.to_doc() for e in self.event_log],
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "Session":
        return cls(
            session_id=doc["session_id"],
            task_id=doc["task_id"],
            rng_seed=doc["rng_seed"],
            state=SessionState.decode(doc["state"]),
            outline_title=doc.get("outline_title", ""),
            character=CharacterProfile.from_doc(doc["character"]) if doc.get("character") else None,
            milestones=[Milestone.from_doc(m) for m in doc["milestones"]],
            chapters=[GeneratedChapter.from_doc(c) for c in doc["chapters"]],
            reflection=doc.get("reflection"),
            analysis=AnalysisReport.from_doc(doc["analysis"]) if doc.get("analysis") else None,
            teacher_comments=[(k, text) for k, text in doc.get("teacher_comments", [])],
            event_log=[SessionEvent.from_doc(e) for e in doc["event_log"]],
        )


class TaskStatus(str, Enum):
    PENDING = "pending"
    CLAIMED = "claimed"
    DONE = "done"


@dataclass
class SessionTask:
    """A deployed outline snapshot assigned to one child."""

    task_id: str
    outline: StoryOutline  # frozen copy at deploy time
    child_label: str
    status: TaskStatus = TaskStatus.PENDING
    snapshot_text: str = ""  # canonical bytes of the outline at deploy time

    def to_doc(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "doc_kind": "session_task",
            "task_id": self.task_id,
            "outline": self.outline.to_doc(),
            "child_label": self.child_label,
            "status": self.status.value,
            "snapshot_text": self.snapshot_text,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "SessionTask":
        return cls(
            task_id=doc["task_id"],
            outline=StoryOutline.from_doc(doc["outline"]),
            child_label=doc["child_label"],
            status=TaskStatus(doc["status"]),
            snapshot_text=doc.get("snapshot_text", ""),
        )


# --------------------------------------------------------------------------
# Analysis instruments: coping tags and SUS questionnaires
# --------------------------------------------------------------------------


class CopingDimension(str, Enum):
    PROBLEM_FOCUSED = "ProblemFocused"
    POSITIVE_COGNITIVE_REFRAMING = "PositiveCognitiveReframing"
    DISTRACTION = "Distraction"
    AVOIDANCE = "Avoidance"
    SUPPORT_SEEKING = "SupportSeeking"


class CopingSubscale(str, Enum):
    COGNITIVE_DECISION_MAKING = "CognitiveDecisionMaking"
    DIRECT_PROBLEM_SOLVING = "DirectProblemSolving"
    SEEKING_UNDERSTANDING = "SeekingUnderstanding"
    POSITIVE_THINKING = "PositiveThinking"
    OPTIMISTIC_THINKING = "OptimisticThinking"
    CONTROL = "Control"
    PHYSICAL_RELEASE_OF_EMOTION = "PhysicalReleaseOfEmotion"
    DISTRACTING_ACTIONS = "DistractingActions"
    AVOIDANT_ACTIONS = "AvoidantActions"
    REPRESSION = "Repression"
    WISHFUL_THINKING = "WishfulThinking"
    SUPPORT_FOR_FEELINGS = "SupportForFeelings"
    SUPPORT_FOR_ACTIONS = "SupportForActions"


class TagOrigin(str, Enum):
    MANUAL = "manual"
    SUGGESTED = "suggested"


_CODE_RE = re.compile(r"^C([0-9]+)-([0-9]+)$")


@dataclass(frozen=True, order=True)
class ResponseCode:
    child_index: int
    milestone: int

    def __post_init__(self):
        if self.child_index < 1:
            raise MalformedCodeError(f"child index must be >= 1 (got {self.child_index})")
        if not 1 <= self.milestone <= CHAPTER_COUNT:
            raise MalformedCodeError(
                f"milestone must be in 1..{CHAPTER_COUNT} (got {self.milestone})"
            )

    def encode(self) -> str:
        return f"C{self.child_index}-{self.milestone}"


def parse_response_code(text: str) -> ResponseCode:
    """Parse a ``C{n}-{m}`` response code; round-trips with ``encode``."""
    match = _CODE_RE.match(text.strip())
    if not match:
        raise MalformedCodeError(f"malformed response code {text!r} (expected C<n>-<m>)")
    n, m = int(match.group(1)), int(match.group(2))
    if n < 1 or not 1 <= m <= CHAPTER_COUNT:
        raise MalformedCodeError(
            f"malformed response code {text!r}: child >= 1 and milestone in 1..{CHAPTER_COUNT}"
        )
    return ResponseCode(n, m)


@dataclass(frozen=True)
class CopingTag:
    code: ResponseCode
    dimension: CopingDimension
    subscale: CopingSubscale
    origin: TagOrigin

    def to_doc(self) -> dict[str, Any]:
        return {
            "code": self.code.encode(),
            "dimension": self.dimension.value,
            "subscale": self.subscale.value,
            "origin": self.origin.value,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "CopingTag":
        return cls(
            code=parse_response_code(doc["code"]),
            dimension=CopingDimension(doc["dimension"]),
            subscale=CopingSubscale(doc["subscale"]),
            origin=TagOrigin(doc["origin"]),
        )


SUS_ITEM_COUNT = 13


@dataclass(frozen=True)
class SUSResponse:
    respondent_id: str
    items: tuple[int, ...]

    def __post_init__(self):
        if len(self.items) != SUS_ITEM_COUNT:
            raise ValidationFailure(
                f"SUS response needs exactly {SUS_ITEM_COUNT} items (got {len(self.items)})"
            )
        for i, item in enumerate(self.items, start=1):
            if not isinstance(item, int) or not 1 <= item <= 5:
                raise ValidationFailure(f"SUS item {i} must be an integer in 1..5 (got {item!r})")

    def to_doc(self) -> dict[str, Any]:
        return {"respondent_id": self.respondent_id, "items": list(self.items)}

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "SUSResponse":
        return cls(respondent_id=doc["respondent_id"], items=tuple(doc["items"]))


class UsabilityBenchmark(str, Enum):
    POOR = "poor"
    OK = "ok"
    GOOD = "good"
    EXCELLENT = "excellent"
    BEST_IMAGINABLE = "best_imaginable"


@dataclass(frozen=True)
class SUSAnalysis:
    scores: tuple[float, ...]
    mean: float
    sd: float
    benchmark: UsabilityBenchmark
    shapiro_w: Optional[float] = None
    shapiro_p: Optional[float] = None
    degenerate: bool = False

    def to_doc(self) -> dict[str, Any]:
        return {
            "scores": list(self.scores),
            "mean": self.mean,
            "sd": self.sd,
            "benchmark": self.benchmark.value,
            "shapiro_w": self.shapiro_w,
            "shapiro_p": self.shapiro_p,
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "SUSAnalysis":
        return cls(
            scores=tuple(doc["scores"]),
            mean=doc["mean"],
            sd=doc["sd"],
            benchmark=UsabilityBenchmark(doc["benchmark"]),
            shapiro_w=doc.get("shapiro_w"),
            shapiro_p=doc.get("shapiro_p"),
            degenerate=doc.get("degenerate", False),
        )
