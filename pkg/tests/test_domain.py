from __future__ import annotations

from dataclasses import replace
from datetime import datetime, timezone

import pytest
from hypothesis import given, strategies as st

from taleweave.docio import decode_document, encode_document, format_ts, parse_ts
from taleweave.domain import (
    BranchSpec,
    BranchValence,
    ChapterSpec,
    CharacterProfile,
    CopingTag,
    GeneratedChapter,
    Milestone,
    OutlineStatus,
    ResponseCode,
    SessionState,
    StoryOutline,
    SUSResponse,
    parse_response_code,
    validate_outline,
)
from taleweave.errors import MalformedCodeError, ValidationFailure
from taleweave.ids import IdGenerator, SteppingClock

NOW = datetime(2025, 1, 1, tzinfo=timezone.utc)


def make_outline(n_chapters=4, **overrides) -> StoryOutline:
    chapters = tuple(
        ChapterSpec(index=i, setting=f"setting {i}", plot=f"plot {i}")
        for i in range(1, n_chapters + 1)
    )
    base = dict(
        outline_id="out_1",
        title="A Test Story",
        brief="a brief",
        child_profile_note="a note",
        chapters=chapters,
        created_at=NOW,
        updated_at=NOW,
    )
    base.update(overrides)
    return StoryOutline(**base)


class TestValidateOutline:
    def test_minimal_valid_outline(self):
        assert validate_outline(make_outline()).ok

    def test_three_chapters_flagged(self):
        result = validate_outline(make_outline(n_chapters=3))
        assert not result.ok
        assert any(v.code == "chapter_count" for v in result.violations)

    def test_branch_missing_plot_names_branch_id(self):
        branches = (
            BranchSpec("b-up", BranchValence.POSITIVE, "up setting", "up plot"),
            BranchSpec("b-down", BranchValence.NEGATIVE, "down setting", ""),
        )
        outline = make_outline()
        chapters = list(outline.chapters)
        chapters[2] = replace(chapters[2], branches=branches)
        result = validate_outline(replace(outline, chapters=tuple(chapters)))
        assert not result.ok
        offending = [v for v in result.violations if v.code == "branch_empty_plot"]
        assert offending and "b-down" in offending[0].message

    def test_duplicate_branch_ids(self):
        branches = (
            BranchSpec("same", BranchValence.POSITIVE, "s", "p"),
            BranchSpec("same", BranchValence.NEGATIVE, "s", "p"),
        )
        outline = make_outline()
        chapters = list(outline.chapters)
        chapters[0] = replace(chapters[0], branches=branches)
        result = validate_outline(replace(outline, chapters=tuple(chapters)))
        assert any(v.code == "duplicate_branch_id" for v in result.violations)

    def test_chapter_index_mismatch(self):
        outline = make_outline()
        chapters = list(outline.chapters)
        chapters[1] = replace(chapters[1], index=3)
        result = validate_outline(replace(outline, chapters=tuple(chapters)))
        assert any(v.code == "chapter_index" for v in result.violations)

    def test_edit_after_deploy(self):
        deployed = make_outline(status=OutlineStatus.DEPLOYED)
        edited = replace(deployed, title="Changed title")
        result = validate_outline(edited, prior=deployed)
        assert any(v.code == "edit_after_deploy" for v in result.violations)

    def test_new_draft_version_is_legal_successor(self):
        deployed = make_outline(status=OutlineStatus.DEPLOYED)
        successor = replace(deployed.next_draft(), title="Changed title")
        assert validate_outline(successor, prior=deployed).ok

    def test_version_must_be_positive(self):
        result = validate_outline(make_outline(version=0))
        assert any(v.code == "bad_version" for v in result.violations)


class TestResponseCodes:
    @pytest.mark.parametrize("text,expected", [("C6-3", (6, 3)), ("C1-1", (1, 1)), ("C12-4", (12, 4))])
    def test_parse(self, text, expected):
        code = parse_response_code(text)
        assert (code.child_index, code.milestone) == expected

    @pytest.mark.parametrize("bad", ["C1-5", "C0-1", "C1-0", "1-1", "C1_1", "", "Cx-1", "C1-"])
    def test_malformed(self, bad):
        with pytest.raises(MalformedCodeError) as exc_info:
            parse_response_code(bad)
        assert repr(bad)[1:-1] in str(exc_info.value) or bad in str(exc_info.value)

    @given(st.integers(min_value=1, max_value=500), st.integers(min_value=1, max_value=4))
    def test_round_trip(self, n, m):
        code = ResponseCode(n, m)
        assert parse_response_code(code.encode()) == code


class TestSessionState:
    @pytest.mark.parametrize(
        "encoded",
        ["created", "character_customization", "awaiting_response(1)",
         "generating_chapter(4)", "reflecting", "complete", "aborted"],
    )
    def test_round_trip(self, encoded):
        assert SessionState.decode(encoded).encode() == encoded

    @pytest.mark.parametrize("bad", ["awaiting_response(0)", "awaiting_response(5)", "nonsense", "complete(1)"])
    def test_rejects_bad_states(self, bad):
        with pytest.raises(ValidationFailure):
            SessionState.decode(bad)

    def test_terminal_states(self):
        assert SessionState.decode("complete").terminal
        assert SessionState.decode("aborted").terminal
        assert not SessionState.decode("reflecting").terminal


# -- serialization round-trips -------------------------------------------------

texts = st.text(
    alphabet=st.characters(blacklist_categories=("Cs", "Cc")), min_size=1, max_size=40
).filter(lambda s: s.strip())


@st.composite
def outlines(draw):
    branches = draw(
        st.lists(
            st.builds(
                BranchSpec,
                branch_id=st.uuids().map(lambda u: f"brn_{u.hex[:8]}"),
                valence=st.sampled_from(list(BranchValence)),
                setting=texts,
                plot=texts,
            ),
            max_size=3,
            unique_by=lambda b: b.branch_id,
        )
    )
    chapters = tuple(
        ChapterSpec(
            index=i,
            setting=draw(texts),
            plot=draw(texts),
            branches=tuple(branches) if i == 3 else (),
        )
        for i in range(1, 5)
    )
    return StoryOutline(
        outline_id=draw(st.uuids().map(lambda u: f"out_{u.hex[:10]}")),
        title=draw(texts),
        brief=draw(texts),
        child_profile_note=draw(texts),
        chapters=chapters,
        status=draw(st.sampled_from(list(OutlineStatus))),
        version=draw(st.integers(min_value=1, max_value=99)),
        created_at=NOW,
        updated_at=NOW,
    )


@given(outlines())
def test_outline_round_trip(outline):
    assert StoryOutline.from_doc(decode_document(encode_document(outline.to_doc()))) == outline


@given(
    st.builds(
        CharacterProfile,
        name=texts,
        description=texts,
        source_drawing=texts,
        illustration=texts,
        generation_attempt=st.integers(min_value=1, max_value=9),
    )
)
def test_character_round_trip(profile):
    assert CharacterProfile.from_doc(profile.to_doc()) == profile


@given(
    st.builds(
        SUSResponse,
        respondent_id=texts,
        items=st.tuples(*[st.integers(min_value=1, max_value=5)] * 13),
    )
)
def test_sus_response_round_trip(response):
    assert SUSResponse.from_doc(response.to_doc()) == response


def test_milestone_and_chapter_round_trip():
    milestone = Milestone(
        index=2,
        question_text="What next?",
        question_audio="assets/a.wav",
        response_text="Try again",
        response_audio=None,
        response_source=None,
        asked_at=NOW,
        answered_at=None,
        selected_branch="b-1",
    )
    assert Milestone.from_doc(milestone.to_doc()) == milestone
    chapter = GeneratedChapter(
        index=1,
        paragraphs=("a", "b", "c", "d"),
        panel_image="assets/p.png",
        provider_trace={"writing": {"attempts": 1}},
    )
    assert GeneratedChapter.from_doc(chapter.to_doc()) == chapter


def test_generated_chapter_enforces_paragraph_contract():
    with pytest.raises(ValidationFailure):
        GeneratedChapter(index=1, paragraphs=("a", "b", "c"), panel_image="x")
    with pytest.raises(ValidationFailure):
        GeneratedChapter(index=1, paragraphs=("a", "b", "c", " "), panel_image="x")


def test_coping_tag_round_trip():
    from taleweave.analysis import make_tag
    from taleweave.domain import CopingSubscale, TagOrigin

    tag = make_tag(ResponseCode(6, 3), CopingSubscale.DIRECT_PROBLEM_SOLVING, TagOrigin.MANUAL)
    assert CopingTag.from_doc(tag.to_doc()) == tag


# -- identifiers and timestamps ---------------------------------------------------


def test_ids_sort_chronologically():
    gen = IdGenerator(clock=SteppingClock(step_ms=250))
    made = [gen.new_id("out") for _ in range(50)]
    assert made == sorted(made)
    assert len(set(made)) == 50


def test_ids_unique_when_clock_stalls():
    gen = IdGenerator(clock=SteppingClock(step_ms=0))
    made = [gen.new_id("ses") for _ in range(100)]
    assert len(set(made)) == 100
    assert made == sorted(made)


def test_timestamp_round_trip_millisecond_precision():
    ts = datetime(2025, 6, 1, 12, 30, 45, 123000, tzinfo=timezone.utc)
    assert parse_ts(format_ts(ts)) == ts
    assert format_ts(ts).endswith("Z")


def test_encode_document_is_key_sorted_and_stable():
    doc = {"schema_version": 1, "b": 2, "a": {"z": 1, "y": 2}}
    text = encode_document(doc)
    assert text.index('"a"') < text.index('"b"')
    assert encode_document(doc) == text
