"""Compile completed sessions into the two deliverables.

The print variant is the child's storybook: title, character page, four
chapter pages, closing reflection — and nothing else. The annotated variant
adds, for the parents, per-milestone blocks with the child's verbatim
response, optional teacher commentary, and the AI commentary, plus the
overall analysis and advice.

Compilation and export are pure functions of the session; identical sessions
produce identical bytes.
"""
from __future__ import annotations

import html as html_module
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .docio import SCHEMA_VERSION, encode_document
from .domain import CHAPTER_COUNT, Session
from .errors import IncompleteSessionError, UnsupportedFormatError

EXPORT_FORMATS = ("interchange", "paginated_html", "plain_text")
_EXTENSIONS = {"interchange": "json", "paginated_html": "html", "plain_text": "txt"}


@dataclass(frozen=True)
class LayoutMeta:
    page_size: str = "A5"
    font_class: str = "font-large"  # child-friendly default: large type

    def to_doc(self) -> dict[str, Any]:
        return {"page_size": self.page_size, "font_class": self.font_class}

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "LayoutMeta":
        return cls(page_size=doc["page_size"], font_class=doc["font_class"])


@dataclass(frozen=True)
class CharacterPage:
    name: str
    illustration: str
    description: str


@dataclass(frozen=True)
class ChapterPage:
    index: int
    panel_image: str
    paragraphs: tuple[str, ...]


@dataclass(frozen=True)
class MilestoneBlock:
    index: int
    question: str
    response: str
    ai_comment: str
    teacher_comment: Optional[str] = None


@dataclass(frozen=True)
class Storybook:
    title: str
    character_page: CharacterPage
    chapter_pages: tuple[ChapterPage, ...]
    closing_page: str
    variant: str = "print"
    layout_meta: LayoutMeta = field(default_factory=LayoutMeta)

    def to_doc(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "doc_kind": "storybook",
            "variant": self.variant,
            "title": self.title,
            "character_page": {
                "name": self.character_page.name,
                "illustration": self.character_page.illustration,
                "description": self.character_page.description,
            },
            "chapter_pages": [
                {
                    "index": p.index,
                    "panel_image": p.panel_image,
                    "paragraphs": list(p.paragraphs),
                }
                for p in self.chapter_pages
            ],
            "closing_page": self.closing_page,
            "layout_meta": self.layout_meta.to_doc(),
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "Storybook":
        return cls(
            title=doc["title"],
            character_page=CharacterPage(**doc["character_page"]),
            chapter_pages=tuple(
                ChapterPage(
                    index=p["index"],
                    panel_image=p["panel_image"],
                    paragraphs=tuple(p["paragraphs"]),
                )
                for p in doc["chapter_pages"]
            ),
            closing_page=doc["closing_page"],
            variant=doc["variant"],
            layout_meta=LayoutMeta.from_doc(doc["layout_meta"]),
        )


@dataclass(frozen=True)
class AnnotatedStorybook(Storybook):
    milestone_blocks: tuple[MilestoneBlock, ...] = ()
    ai_analysis: str = ""
    parent_advice: str = ""

    def to_doc(self) -> dict[str, Any]:
        doc = super().to_doc()
        doc["doc_kind"] = "annotated_storybook"
        doc["milestone_blocks"] = [
            {
                "index": b.index,
                "question": b.question,
                "response": b.response,
                "teacher_comment": b.teacher_comment,
                "ai_comment": b.ai_comment,
            }
            for b in self.milestone_blocks
        ]
        doc["ai_analysis"] = self.ai_analysis
        doc["parent_advice"] = self.parent_advice
        return doc

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "AnnotatedStorybook":
        base = Storybook.from_doc({**doc, "doc_kind": "storybook"})
        return cls(
            title=base.title,
            character_page=base.character_page,
            chapter_pages=base.chapter_pages,
            closing_page=base.closing_page,
            variant=doc["variant"],
            layout_meta=base.layout_meta,
            milestone_blocks=tuple(
                MilestoneBlock(
                    index=b["index"],
                    question=b["question"],
                    response=b["response"],
                    teacher_comment=b.get("teacher_comment"),
                    ai_comment=b["ai_comment"],
                )
                for b in doc["milestone_blocks"]
            ),
            ai_analysis=doc["ai_analysis"],
            parent_advice=doc["parent_advice"],
        )


def _require_complete(session: Session) -> None:
    if session.state.phase != "complete":
        raise IncompleteSessionError(
            f"session is {session.state.encode()}, storybooks need a complete session"
        )
    if len(session.chapters) != CHAPTER_COUNT:
        raise IncompleteSessionError("session is missing generated chapters")


def _pages(session: Session) -> tuple[CharacterPage, tuple[ChapterPage, ...]]:
    profile = session.character
    character = CharacterPage(
        name=profile.name,
        illustration=profile.illustration,
        description=profile.description,
    )
    chapters = tuple(
        ChapterPage(index=c.index, panel_image=c.panel_image, paragraphs=c.paragraphs)
        for c in sorted(session.chapters, key=lambda c: c.index)
    )
    return character, chapters


def compile_print(session: Session, layout: LayoutMeta | None = None) -> Storybook:
    _require_complete(session)
    character, chapters = _pages(session)
    return Storybook(
        title=session.outline_title,
        character_page=character,
        chapter_pages=chapters,
        closing_page=session.reflection or "",
        variant="print",
        layout_meta=layout or LayoutMeta(),
    )


def compile_annotated(session: Session, layout: LayoutMeta | None = None) -> AnnotatedStorybook:
    _require_complete(session)
    if session.analysis is None:
        raise IncompleteSessionError("session has no analysis report")
    character, chapters = _pages(session)
    comments_by_k: dict[int, list[str]] = {}
    for k, text in session.teacher_comments:
        comments_by_k.setdefault(k, []).append(text)
    blocks = []
    for milestone in sorted(session.milestones, key=lambda m: m.index):
        teacher = comments_by_k.get(milestone.index)
        blocks.append(
            MilestoneBlock(
                index=milestone.index,
                question=milestone.question_text,
                response=milestone.response_text or "",
                teacher_comment="\n".join(teacher) if teacher else None,
                ai_comment=session.analysis.per_response_comments[milestone.index - 1],
            )
        )
    return AnnotatedStorybook(
        title=session.outline_title,
        character_page=character,
        chapter_pages=chapters,
        closing_page=session.reflection or "",
        variant="annotated",
        layout_meta=layout or LayoutMeta(),
        milestone_blocks=tuple(blocks),
        ai_analysis=session.analysis.overall_analysis,
        parent_advice=session.analysis.parent_advice,
    )


# --------------------------------------------------------------------------
# Export formats
# --------------------------------------------------------------------------

_RULE = "=" * 64


def _plain_text(book: Storybook) -> str:
    annotated = isinstance(book, AnnotatedStorybook)
    blocks_by_index = (
        {b.index: b for b in book.milestone_blocks} if annotated else {}
    )
    lines: list[str] = [_RULE, book.title, _RULE, ""]
    lines += [
        "[Character]",
        f"Name: {book.character_page.name}",
        f"Illustration: {book.character_page.illustration}",
        book.character_page.description,
        "",
    ]
    for page in book.chapter_pages:
        if annotated and page.index in blocks_by_index:
            block = blocks_by_index[page.index]
            lines += [f"[Milestone {block.index}]", f"Question: {block.question}"]
            lines += [f"Response: {block.response}"]
            if block.teacher_comment is not None:
                lines += [f"Teacher: {block.teacher_comment}"]
            lines += [f"AI: {block.ai_comment}", ""]
        lines += [f"[Chapter {page.index}]", f"Panel image: {page.panel_image}", ""]
        for paragraph in page.paragraphs:
            lines += [paragraph, ""]
    lines += ["[Closing]", book.closing_page, ""]
    if annotated:
        lines += ["[Overall analysis]", book.ai_analysis, ""]
        lines += ["[Advice to parents]", book.parent_advice, ""]
    return "\n".join(lines)


def _esc(text: str) -> str:
    return html_module.escape(text, quote=True)


def _paginated_html(book: Storybook) -> str:
    annotated = isinstance(book, AnnotatedStorybook)
    blocks_by_index = (
        {b.index: b for b in book.milestone_blocks} if annotated else {}
    )
    meta = book.layout_meta
    parts = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        f"<title>{_esc(book.title)}</title>",
        "<style>",
        f"@page {{ size: {meta.page_size}; margin: 12mm; }}",
        ".page { page-break-after: always; padding: 1em; }",
        ".font-large { font-size: 1.4em; line-height: 1.6; }",
        ".font-regular { font-size: 1em; }",
        "img { max-width: 100%; }",
        ".milestone { background: #f6f2ea; padding: 0.8em; margin: 0.8em 0; }",
        "</style>",
        "</head>",
        f'<body class="{_esc(meta.font_class)}">',
        f'<section class="page title-page"><h1>{_esc(book.title)}</h1></section>',
        '<section class="page character-page">',
        f'<img src="{_esc(book.character_page.illustration)}" alt="{_esc(book.character_page.name)}">',
        f"<h2>{_esc(book.character_page.name)}</h2>",
        f"<p>{_esc(book.character_page.description)}</p>",
        "</section>",
    ]
    for page in book.chapter_pages:
        parts.append(f'<section class="page chapter-page" data-chapter="{page.index}">')
        if annotated and page.index in blocks_by_index:
            block = blocks_by_index[page.index]
            parts.append('<aside class="milestone">')
            parts.append(f"<p><strong>Question:</strong> {_esc(block.question)}</p>")
            parts.append(f"<p><strong>Response:</strong> {_esc(block.response)}</p>")
            if block.teacher_comment is not None:
                parts.append(f"<p><strong>Teacher:</strong> {_esc(block.teacher_comment)}</p>")
            parts.append(f"<p><strong>AI:</strong> {_esc(block.ai_comment)}</p>")
            parts.append("</aside>")
        parts.append(f"<h2>Chapter {page.index}</h2>")
        parts.append(f'<img src="{_esc(page.panel_image)}" alt="Chapter {page.index} panels">')
        for paragraph in page.paragraphs:
            parts.append(f"<p>{_esc(paragraph)}</p>")
        parts.append("</section>")
    parts.append('<section class="page closing-page">')
    parts.append(f"<p>{_esc(book.closing_page)}</p>")
    parts.append("</section>")
    if annotated:
        parts.append('<section class="page analysis-page">')
        parts.append(f"<h2>Overall analysis</h2><p>{_esc(book.ai_analysis)}</p>")
        parts.append(f"<h2>Advice to parents</h2><p>{_esc(book.parent_advice)}</p>")
        parts.append("</section>")
    parts.append("</body>")
    parts.append("</html>")
    return "\n".join(parts)


def export(book: Storybook, export_format: str) -> str:
    if export_format == "interchange":
        return encode_document(book.to_doc())
    if export_format == "plain_text":
        return _plain_text(book)
    if export_format == "paginated_html":
        return _paginated_html(book)
    raise UnsupportedFormatError(
        f"unknown export format {export_format!r} (expected one of {EXPORT_FORMATS})"
    )


def export_path(out_root: Path | str, session_id: str, variant: str, export_format: str) -> Path:
    return Path(out_root) / "exports" / session_id / f"{variant}.{_EXTENSIONS[export_format]}"


def write_export(
    book: Storybook, out_root: Path | str, session_id: str, export_format: str
) -> Path:
    path = export_path(out_root, session_id, book.variant, export_format)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(export(book, export_format), encoding="utf-8")
    return path
