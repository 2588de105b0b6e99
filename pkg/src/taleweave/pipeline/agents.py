"""The seven story agents plus branch selection.

Each agent is a prompt-assembly + provider-call + output-validation unit.
Validation is structural only (counts, non-emptiness, name presence); a
failed validation retries the call once and then raises
:class:`MalformedOutputError` carrying the raw provider text.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from ..domain import (
    AnalysisReport,
    BranchSpec,
    ChapterSpec,
    CharacterProfile,
    GeneratedChapter,
    Milestone,
    OutlineStatus,
    Session,
    StoryOutline,
    CHAPTER_COUNT,
    PARAGRAPHS_PER_CHAPTER,
)
from ..errors import AssetMissingError, MalformedOutputError, ValidationFailure
from ..ids import IdGenerator
from ..providers.types import AgentRole, ImageLayout, ImageRequest, TextRequest
from .templates import PromptTemplate, load_templates


@dataclass
class AgentTrace:
    agent: str
    rendered_prompt: str
    raw_output: str
    validated_output: Any
    attempts: int = 1
    warnings: list[str] = field(default_factory=list)

    def to_doc(self) -> dict[str, Any]:
        return {
            "agent": self.agent,
            "rendered_prompt": self.rendered_prompt,
            "raw_output": self.raw_output,
            "validated_output": self.validated_output,
            "attempts": self.attempts,
            "warnings": self.warnings,
        }


def _split_paragraphs(raw: str) -> list[str]:
    return [p.strip() for p in re.split(r"\n\s*\n", raw) if p.strip()]


def _split_sentences(paragraph: str) -> list[str]:
    parts = re.split(r"(?<=[.!?])\s+", paragraph)
    return [p for p in (s.strip() for s in parts) if p]


def repair_paragraphs(paragraphs: list[str]) -> list[str]:
    """Force a paragraph list to length 4 by merging extras or splitting the longest."""
    fixed = list(paragraphs)
    if len(fixed) > PARAGRAPHS_PER_CHAPTER:
        head = fixed[: PARAGRAPHS_PER_CHAPTER - 1]
        tail = " ".join(fixed[PARAGRAPHS_PER_CHAPTER - 1 :])
        return head + [tail]
    while len(fixed) < PARAGRAPHS_PER_CHAPTER:
        longest = max(range(len(fixed)), key=lambda i: len(fixed[i]))
        sentences = _split_sentences(fixed[longest])
        if len(sentences) < 2:
            raise MalformedOutputError(
                "cannot repair paragraph structure: not enough sentences to split",
                raw_output="\n\n".join(paragraphs),
            )
        half = len(sentences) // 2
        fixed[longest : longest + 1] = [
            " ".join(sentences[:half]),
            " ".join(sentences[half:]),
        ]
    return fixed


class AgentPipeline:
    """Stateless agent front-end over a provider gateway.

    Within one session the engine calls agents strictly sequentially; across
    sessions the pipeline is safe for concurrent use.
    """

    def __init__(
        self,
        gateway,
        ids: IdGenerator | None = None,
        templates: dict[AgentRole, PromptTemplate] | None = None,
        locale: str = "en",
    ):
        self.gateway = gateway
        self.ids = ids or IdGenerator()
        self.templates = templates or load_templates(locale)

    # -- plumbing -------------------------------------------------------------

    def _call_validated(
        self,
        role: AgentRole,
        prompt: str,
        context: tuple[tuple[str, str], ...],
        validate: Callable[[str], Any],
    ) -> tuple[Any, AgentTrace]:
        """Call the text provider; on validation failure retry once, then raise."""
        attempts = 0
        raw = ""
        last_error: Exception | None = None
        while attempts < 2:
            attempts += 1
            result = self.gateway.generate_text(
                TextRequest(role_tag=role, prompt=prompt, context=context)
            )
            raw = result.text
            try:
                value = validate(raw)
            except MalformedOutputError as exc:
                last_error = exc
                continue
            return value, AgentTrace(
                agent=role.value,
                rendered_prompt=prompt,
                raw_output=raw,
                validated_output=value,
                attempts=attempts,
            )
        raise MalformedOutputError(
            f"{role.value} agent produced malformed output after {attempts} attempts: {last_error}",
            raw_output=raw,
        )

    def _story_so_far(self, chapters: list[GeneratedChapter]) -> str:
        if not chapters:
            return "The story is just beginning."
        return " ".join(c.paragraphs[-1] for c in chapters)

    # -- agents ---------------------------------------------------------------

    def outline_agent(
        self, brief: str, child_note: str = "", now=None, title_hint: str | None = None
    ) -> StoryOutline:
        if not brief.strip():
            raise ValidationFailure("outline brief must be non-empty")
        prompt = self.templates[AgentRole.OUTLINE].render(brief=brief, child_note=child_note)
        context = (("brief", brief), ("child_note", child_note))

        def validate(raw: str) -> dict[str, Any]:
            try:
                payload = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise MalformedOutputError(f"outline output is not JSON: {exc}", raw) from exc
            chapters = payload.get("chapters")
            if not isinstance(chapters, list) or len(chapters) != CHAPTER_COUNT:
                raise MalformedOutputError(
                    f"outline output must contain exactly {CHAPTER_COUNT} chapters", raw
                )
            for i, chapter in enumerate(chapters, start=1):
                if not str(chapter.get("setting", "")).strip():
                    raise MalformedOutputError(f"outline chapter {i} has empty setting", raw)
                if not str(chapter.get("plot", "")).strip():
                    raise MalformedOutputError(f"outline chapter {i} has empty plot", raw)
            if not str(payload.get("title", "")).strip():
                raise MalformedOutputError("outline output has no title", raw)
            return payload

        payload, _trace = self._call_validated(AgentRole.OUTLINE, prompt, context, validate)
        now = now or self.ids.clock.now()
        return StoryOutline(
            outline_id=self.ids.new_id("out"),
            title=title_hint or payload["title"],
            brief=brief,
            child_profile_note=child_note,
            status=OutlineStatus.DRAFT,
            version=1,
            created_at=now,
            updated_at=now,
            chapters=tuple(
                ChapterSpec(index=i, setting=c["setting"], plot=c["plot"])
                for i, c in enumerate(payload["chapters"], start=1)
            ),
        )

    def rewrite_chapter(self, outline: StoryOutline, k: int, instruction: str) -> ChapterSpec:
        """AI-assisted rewrite of one chapter, leaving the others untouched."""
        chapter = outline.chapter(k)
        prompt = self.templates[AgentRole.OUTLINE].render(
            brief=f"Rewrite chapter {k} of '{outline.title}' per instruction: {instruction}",
            child_note=outline.child_profile_note,
        )
        context = (
            ("brief", f"{chapter.setting} | {chapter.plot} | instruction: {instruction}"),
            ("chapter_index", str(k)),
            ("instruction", instruction),
        )

        def validate(raw: str) -> str:
            if not raw.strip():
                raise MalformedOutputError("rewrite output is empty", raw)
            return raw.strip()

        raw, _trace = self._call_validated(AgentRole.OUTLINE, prompt, context, validate)
        # Provider output may be the whole-outline JSON shape; reduce to one chapter.
        try:
            payload = json.loads(raw)
            first = payload["chapters"][0]
            setting, plot = first["setting"], first["plot"]
        except (json.JSONDecodeError, KeyError, IndexError, TypeError):
            setting, plot = chapter.setting, raw
        return ChapterSpec(index=k, setting=setting, plot=plot, branches=chapter.branches)

    def character_agent(self, drawing_ref: str, name: str, attempt: int = 1) -> CharacterProfile:
        if not name.strip():
            raise ValidationFailure("protagonist name must be non-empty")
        if not self.gateway.assets.exists(drawing_ref):
            raise AssetMissingError(f"drawing {drawing_ref!r} does not resolve")
        drawing_note = f"child drawing asset {drawing_ref}"
        prompt = self.templates[AgentRole.CHARACTER].render(
            protagonist=name, drawing_note=drawing_note
        )
        context = (("protagonist", name), ("drawing_note", drawing_note))

        def validate(raw: str) -> str:
            if not raw.strip():
                raise MalformedOutputError("character profile is empty", raw)
            if name not in raw:
                raise MalformedOutputError("character profile does not mention the name", raw)
            return raw.strip()

        description, _trace = self._call_validated(AgentRole.CHARACTER, prompt, context, validate)
        image = self.gateway.generate_image(
            ImageRequest(
                prompt=f"Storybook illustration of {name}: {description}",
                reference_images=(drawing_ref,),
                layout_hint=ImageLayout.SINGLE,
            )
        )
        return CharacterProfile(
            name=name,
            description=description,
            source_drawing=drawing_ref,
            illustration=image.image,
            generation_attempt=attempt,
        )

    def question_agent(
        self,
        outline: StoryOutline,
        profile: CharacterProfile,
        chapters_so_far: list[GeneratedChapter],
        k: int,
    ) -> str:
        if len(chapters_so_far) != k - 1:
            raise ValidationFailure(
                f"question for milestone {k} needs {k - 1} prior chapters "
                f"(got {len(chapters_so_far)})"
            )
        chapter = outline.chapter(k)
        story_so_far = self._story_so_far(chapters_so_far)
        prompt = self.templates[AgentRole.QUESTION].render(
            protagonist=profile.name,
            character_profile=profile.description,
            chapter_index=str(k),
            setting=chapter.setting,
            plot=chapter.plot,
            story_so_far=story_so_far,
        )
        context = (
            ("protagonist", profile.name),
            ("character_profile", profile.description),
            ("chapter_index", str(k)),
            ("setting", chapter.setting),
            ("plot", chapter.plot),
        )

        def validate(raw: str) -> str:
            text = raw.strip()
            if not text:
                raise MalformedOutputError("question is empty", raw)
            if profile.name not in text:
                raise MalformedOutputError("question does not name the protagonist", raw)
            if "?" not in text:
                raise MalformedOutputError("question contains no interrogative", raw)
            return text

        question, _trace = self._call_validated(AgentRole.QUESTION, prompt, context, validate)
        return question

    def select_branch(self, chapter: ChapterSpec, response_text: str) -> str:
        """Pick a branch_id from the chapter spec; always total.

        The classification call returns a valence; the first branch with that
        valence wins. Unknown or unmatched valences fall back to the
        first-listed branch.
        """
        if not chapter.branches:
            raise ValidationFailure(f"chapter {chapter.index} has no branches")
        if not response_text.strip():
            raise ValidationFailure("branch selection needs a response text")
        if len(chapter.branches) == 1:
            return chapter.branches[0].branch_id
        options = ", ".join(b.valence.value for b in chapter.branches)
        result = self.gateway.generate_text(
            TextRequest(
                role_tag=AgentRole.BRANCH_CLASSIFIER,
                prompt=(
                    f"Classify the valence of the child's answer as one of: {options}. "
                    "Answer with the single word only."
                ),
                context=(("response", response_text),),
            )
        )
        valence = result.text.strip().lower()
        for branch in chapter.branches:
            if branch.valence.value == valence:
                return branch.branch_id
        return chapter.branches[0].branch_id

    def writing_agent(
        self,
        outline: StoryOutline,
        profile: CharacterProfile,
        chapters_so_far: list[GeneratedChapter],
        milestone: Milestone,
        branch: Optional[BranchSpec] = None,
    ) -> tuple[list[str], AgentTrace]:
        if not milestone.answered:
            raise ValidationFailure(f"milestone {milestone.index} has no recorded response")
        chapter = outline.chapter(milestone.index)
        setting = branch.setting if branch else chapter.setting
        branch_plot = branch.plot if branch else ""
        story_so_far = self._story_so_far(chapters_so_far)
        prompt = self.templates[AgentRole.WRITING].render(
            protagonist=profile.name,
            character_profile=profile.description,
            chapter_index=str(milestone.index),
            setting=setting,
            plot=chapter.plot,
            response=milestone.response_text,
            branch_plot=branch_plot,
            story_so_far=story_so_far,
        )
        context = (
            ("protagonist", profile.name),
            ("character_profile", profile.description),
            ("chapter_index", str(milestone.index)),
            ("setting", setting),
            ("plot", chapter.plot),
            ("response", milestone.response_text),
            ("branch_plot", branch_plot),
        )

        def validate(raw: str) -> list[str]:
            paragraphs = _split_paragraphs(raw)
            if not paragraphs:
                raise MalformedOutputError("writing output is empty", raw)
            if len(paragraphs) != PARAGRAPHS_PER_CHAPTER:
                raise MalformedOutputError(
                    f"writing output has {len(paragraphs)} paragraphs, "
                    f"expected {PARAGRAPHS_PER_CHAPTER}",
                    raw,
                )
            return paragraphs

        warnings: list[str] = []
        try:
            paragraphs, trace = self._call_validated(
                AgentRole.WRITING, prompt, context, validate
            )
        except MalformedOutputError as exc:
            # Structural repair path: wrong paragraph count survives the retry.
            raw = exc.raw_output
            loose = _split_paragraphs(raw)
            if not loose:
                raise
            paragraphs = repair_paragraphs(loose)
            warnings.append(
                f"paragraph count repaired from {len(loose)} to {PARAGRAPHS_PER_CHAPTER}"
            )
            trace = AgentTrace(
                agent=AgentRole.WRITING.value,
                rendered_prompt=prompt,
                raw_output=raw,
                validated_output=paragraphs,
                attempts=2,
                warnings=warnings,
            )
        trace.warnings = warnings
        return paragraphs, trace

    def drawing_agent(
        self, paragraphs: list[str], illustration_ref: str, protagonist: str
    ) -> tuple[str, AgentTrace]:
        if len(paragraphs) != PARAGRAPHS_PER_CHAPTER or any(not p.strip() for p in paragraphs):
            raise ValidationFailure("drawing agent needs 4 non-empty paragraphs")
        if not self.gateway.assets.exists(illustration_ref):
            raise AssetMissingError(f"illustration {illustration_ref!r} does not resolve")
        prompt = self.templates[AgentRole.DRAWING].render(
            protagonist=protagonist,
            paragraph_1=paragraphs[0],
            paragraph_2=paragraphs[1],
            paragraph_3=paragraphs[2],
            paragraph_4=paragraphs[3],
        )
        result = self.gateway.generate_image(
            ImageRequest(
                prompt=prompt,
                reference_images=(illustration_ref,),
                layout_hint=ImageLayout.FOUR_PANEL,
            )
        )
        trace = AgentTrace(
            agent=AgentRole.DRAWING.value,
            rendered_prompt=prompt,
            raw_output=result.image,
            validated_output={"image": result.image, "layout": result.layout.value},
        )
        return result.image, trace

    def reflection_agent(self, session: Session, profile: CharacterProfile) -> str:
        if len(session.chapters) != CHAPTER_COUNT:
            raise ValidationFailure(
                f"reflection needs {CHAPTER_COUNT} chapters (got {len(session.chapters)})"
            )
        summaries = "\n".join(
            f"{c.index}. {c.paragraphs[-1]}" for c in session.chapters
        )
        prompt = self.templates[AgentRole.REFLECTION].render(
            protagonist=profile.name,
            character_profile=profile.description,
            title=session.outline_title,
            chapter_summaries=summaries,
        )
        context = (
            ("protagonist", profile.name),
            ("character_profile", profile.description),
            ("title", session.outline_title),
            ("chapter_summaries", summaries),
        )

        def validate(raw: str) -> str:
            text = raw.strip()
            if not text:
                raise MalformedOutputError("reflection is empty", raw)
            if profile.name not in text:
                raise MalformedOutputError("reflection does not name the protagonist", raw)
            return text

        reflection, _trace = self._call_validated(AgentRole.REFLECTION, prompt, context, validate)
        return reflection

    def analysis_agent(self, session: Session, child_note: str = "") -> AnalysisReport:
        answered = [m for m in session.milestones if m.answered]
        if len(answered) != CHAPTER_COUNT:
            raise ValidationFailure(
                f"analysis needs {CHAPTER_COUNT} recorded responses (got {len(answered)})"
            )
        profile = session.character
        slots = {
            "protagonist": profile.name if profile else "the protagonist",
            "child_note": child_note,
        }
        context_pairs = [("protagonist", slots["protagonist"])]
        for m in sorted(answered, key=lambda m: m.index):
            slots[f"question_{m.index}"] = m.question_text
            slots[f"response_{m.index}"] = m.response_text
            context_pairs.append((f"question_{m.index}", m.question_text))
            context_pairs.append((f"response_{m.index}", m.response_text))
        prompt = self.templates[AgentRole.ANALYSIS].render(**slots)

        def validate(raw: str) -> dict[str, Any]:
            try:
                payload = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise MalformedOutputError(f"analysis output is not JSON: {exc}", raw) from exc
            comments = payload.get("comments")
            if not isinstance(comments, list) or len(comments) != CHAPTER_COUNT:
                raise MalformedOutputError(
                    f"analysis needs exactly {CHAPTER_COUNT} per-response comments", raw
                )
            if any(not str(c).strip() for c in comments):
                raise MalformedOutputError("analysis has an empty comment", raw)
            if not str(payload.get("overall", "")).strip():
                raise MalformedOutputError("analysis overall section is empty", raw)
            if not str(payload.get("advice", "")).strip():
                raise MalformedOutputError("analysis advice section is empty", raw)
            return payload

        payload, _trace = self._call_validated(
            AgentRole.ANALYSIS, prompt, tuple(context_pairs), validate
        )
        return AnalysisReport(
            per_response_comments=tuple(str(c) for c in payload["comments"]),
            overall_analysis=str(payload["overall"]),
            parent_advice=str(payload["advice"]),
        )
