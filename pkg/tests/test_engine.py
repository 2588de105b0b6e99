from __future__ import annotations

import threading

import pytest

from taleweave.corpus import story as corpus_story
from taleweave.domain import CHAPTER_COUNT, SessionEvent, TaskStatus
from taleweave.engine import (
    load_event_log,
    replay,
    write_event_log,
    MAX_REASKS,
    PLACEHOLDER_RESPONSE,
)
from taleweave.errors import (
    CorruptLogError,
    TaskAlreadyClaimedError,
    TooLateError,
    ValidationFailure,
    WrongMilestoneError,
    WrongStateError,
)
from taleweave.providers import AgentRole
from taleweave.providers.media import silence_wav

from conftest import make_rig, run_full_session


class TestStartAndCharacter:
    def test_start_claims_task(self):
        engine, task, _, _ = make_rig()
        session = engine.start_session(task, seed=7)
        assert session.state.encode() == "character_customization"
        assert task.status is TaskStatus.CLAIMED

    def test_claimed_task_rejected(self):
        engine, task, _, _ = make_rig()
        engine.start_session(task, seed=7)
        with pytest.raises(TaskAlreadyClaimedError):
            engine.start_session(task, seed=7)

    def test_racing_starts_claim_exactly_once(self):
        engine, task, _, _ = make_rig()
        results, errors = [], []

        def runner():
            try:
                results.append(engine.start_session(task, seed=7))
            except TaskAlreadyClaimedError:
                errors.append(1)

        threads = [threading.Thread(target=runner) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(results) == 1
        assert len(errors) == 7

    def test_drawing_repeatable_until_accept(self):
        engine, task, _, assets = make_rig()
        session = engine.start_session(task, seed=7)
        d1 = assets.put(b"drawing one", ".png")
        d2 = assets.put(b"drawing two", ".png")
        p1 = engine.submit_drawing(session, d1, "Bunny")
        p2 = engine.submit_drawing(session, d2, "Bunny")
        assert (p1.generation_attempt, p2.generation_attempt) == (1, 2)
        assert session.state.encode() == "character_customization"
        # both generations retained in the log
        assert session.character_generated_count() == 2
        assert session.character.source_drawing == d2

    def test_accept_without_character_rejected(self):
        engine, task, _, _ = make_rig()
        session = engine.start_session(task, seed=7)
        with pytest.raises(WrongStateError):
            engine.accept_character(session)

    def test_accept_asks_question_one_with_audio(self):
        engine, task, _, assets = make_rig()
        session = engine.start_session(task, seed=7)
        engine.submit_drawing(session, assets.put(b"d", ".png"), "Bunny")
        engine.accept_character(session)
        assert session.state.encode() == "awaiting_response(1)"
        milestone = session.milestone(1)
        assert "Bunny" in milestone.question_text
        assert milestone.question_audio and assets.exists(milestone.question_audio)

    def test_drawing_in_wrong_state_rejected(self):
        engine, task, _, assets = make_rig()
        session = engine.start_session(task, seed=7)
        engine.submit_drawing(session, assets.put(b"d", ".png"), "Bunny")
        engine.accept_character(session)
        with pytest.raises(WrongStateError):
            engine.submit_drawing(session, assets.put(b"d2", ".png"), "Bunny")


def start_to_awaiting(engine, task, assets, name="Bunny"):
    session = engine.start_session(task, seed=7)
    engine.submit_drawing(session, assets.put(b"d", ".png"), name)
    engine.accept_character(session)
    return session


class TestResponses:
    def test_typed_response_moves_to_generating(self):
        engine, task, _, assets = make_rig()
        session = start_to_awaiting(engine, task, assets)
        outcome = engine.submit_response(session, 1, text="Take deep breaths")
        assert outcome["status"] == "recorded"
        assert session.state.encode() == "generating_chapter(1)"
        assert session.milestone(1).response_text == "Take deep breaths"

    def test_wrong_milestone_index(self):
        engine, task, _, assets = make_rig()
        session = start_to_awaiting(engine, task, assets)
        with pytest.raises(WrongMilestoneError):
            engine.submit_response(session, 2, text="too early")

    def test_audio_response_is_transcribed(self):
        engine, task, gateway, assets = make_rig()
        session = start_to_awaiting(engine, task, assets)
        audio = gateway.synthesize_speech("I would practice")
        engine.submit_response(session, 1, audio_ref=audio)
        milestone = session.milestone(1)
        assert milestone.response_text == "I would practice"
        assert milestone.response_source.value == "transcribed"

    def test_silent_audio_reasks_twice_then_placeholder(self):
        engine, task, _, assets = make_rig()
        session = start_to_awaiting(engine, task, assets)
        silent = assets.put(silence_wav(), ".wav")
        for attempt in range(MAX_REASKS):
            outcome = engine.submit_response(session, 1, audio_ref=silent)
            assert outcome["status"] == "reask"
            assert session.state.encode() == "awaiting_response(1)"
        outcome = engine.submit_response(session, 1, audio_ref=silent)
        assert outcome["status"] == "recorded"
        milestone = session.milestone(1)
        assert milestone.response_text == PLACEHOLDER_RESPONSE
        assert milestone.placeholder

    def test_blank_typed_text_rejected(self):
        engine, task, _, assets = make_rig()
        session = start_to_awaiting(engine, task, assets)
        with pytest.raises(ValidationFailure):
            engine.submit_response(session, 1, text="   ")

    def test_exactly_one_input_required(self):
        engine, task, _, assets = make_rig()
        session = start_to_awaiting(engine, task, assets)
        with pytest.raises(ValidationFailure):
            engine.submit_response(session, 1)

    def test_idempotency_key_dedupes(self):
        engine, task, _, assets = make_rig()
        session = start_to_awaiting(engine, task, assets)
        first = engine.submit_response(session, 1, text="breathe", idempotency_key="key-1")
        before = len(session.event_log)
        dup = engine.submit_response(session, 1, text="breathe", idempotency_key="key-1")
        assert (first["status"], dup["status"]) == ("recorded", "duplicate")
        assert len(session.event_log) == before
        # a duplicate arriving after the state moved on is still a duplicate
        engine.advance_generation(session)
        late = engine.submit_response(session, 1, text="breathe", idempotency_key="key-1")
        assert late["status"] == "duplicate"


class TestBranches:
    def test_branch_selected_only_on_branch_chapters(self):
        engine, task, _, assets = make_rig()
        session = run_full_session(engine, task, assets)
        selected = [e.payload["k"] for e in session.events_of("branch_selected")]
        assert selected == [3]  # the corpus C1 outline branches only chapter 3

    def test_negative_response_selects_negative_branch(self):
        engine, task, _, assets = make_rig()
        session = run_full_session(engine, task, assets)
        assert session.branch_for(3) == "c1-ch3-worry"
        # and the branch text shaped the chapter
        chapter3 = next(c for c in session.chapters if c.index == 3)
        assert "worry grows" in " ".join(chapter3.paragraphs)

    def test_positive_response_selects_positive_branch(self):
        engine, task, _, assets = make_rig()
        responses = list(corpus_story("C1").responses)
        responses[2] = "Apologize to the teacher and submit the homework."
        session = run_full_session(engine, task, assets, responses=responses)
        assert session.branch_for(3) == "c1-ch3-steady"

    def test_override_before_generation_wins(self):
        engine, task, _, assets = make_rig()
        session = start_to_awaiting(engine, task, assets)
        for k, resp in enumerate(corpus_story("C1").responses[:2], start=1):
            engine.submit_response(session, k, text=resp)
            engine.advance_generation(session)
        engine.submit_response(session, 3, text="Just forget about it")
        assert session.branch_for(3) == "c1-ch3-worry"
        engine.override_branch(session, 3, "c1-ch3-steady")
        assert session.branch_for(3) == "c1-ch3-steady"
        engine.advance_generation(session)
        chapter3 = next(c for c in session.chapters if c.index == 3)
        assert "calmer heart" in " ".join(chapter3.paragraphs)
        override_events = session.events_of("branch_overridden")
        assert override_events and override_events[0].payload["by"] == "teacher"

    def test_override_after_generation_too_late(self):
        engine, task, _, assets = make_rig()
        session = run_full_session(engine, task, assets)
        with pytest.raises(TooLateError):
            engine.override_branch(session, 3, "c1-ch3-steady")

    def test_override_unknown_branch_rejected(self):
        engine, task, _, assets = make_rig()
        session = start_to_awaiting(engine, task, assets)
        for k, resp in enumerate(corpus_story("C1").responses[:2], start=1):
            engine.submit_response(session, k, text=resp)
            engine.advance_generation(session)
        engine.submit_response(session, 3, text="Just forget about it")
        with pytest.raises(ValidationFailure):
            engine.override_branch(session, 3, "no-such-branch")

    def test_override_without_selection_rejected(self):
        engine, task, _, assets = make_rig()
        session = start_to_awaiting(engine, task, assets)
        engine.submit_response(session, 1, text="breathe")
        with pytest.raises(WrongStateError):
            engine.override_branch(session, 1, "c1-ch3-steady")


class TestAdvanceAndCompletion:
    def test_full_protocol_counts(self):
        engine, task, _, assets = make_rig()
        session = run_full_session(engine, task, assets)
        assert session.state.encode() == "complete"
        assert len(session.events_of("question_asked")) == 4
        assert len(session.events_of("response_recorded")) == 4
        assert len(session.events_of("chapter_generated")) == 4
        assert len(session.events_of("reflection_generated")) == 1
        assert len(session.events_of("analysis_generated")) == 1
        assert task.status is TaskStatus.DONE
        for chapter in session.chapters:
            assert len(chapter.paragraphs) == CHAPTER_COUNT
            assert assets.exists(chapter.panel_image)

    def test_advance_in_wrong_state(self):
        engine, task, _, assets = make_rig()
        session = start_to_awaiting(engine, task, assets)
        with pytest.raises(WrongStateError):
            engine.advance_generation(session)

    def test_three_consecutive_failures_abort(self):
        bad = ["   "] * 6  # writing agent: empty output, malformed after retries
        engine, task, gateway, assets = make_rig(script={AgentRole.WRITING: bad})
        session = start_to_awaiting(engine, task, assets)
        engine.submit_response(session, 1, text="breathe")
        for _ in range(3):
            engine.advance_generation(session)
        assert session.state.encode() == "aborted"
        failures = session.events_of("generation_failed")
        assert len(failures) == 3
        aborted = session.events_of("aborted")
        assert "consecutive" in aborted[0].payload["reason"]

    def test_failure_then_recovery_resets_counter(self):
        bad = ["   "] * 2  # exactly one failed advance, then the mock recovers
        engine, task, gateway, assets = make_rig(script={AgentRole.WRITING: bad})
        session = start_to_awaiting(engine, task, assets)
        engine.submit_response(session, 1, text="breathe")
        engine.advance_generation(session)
        assert session.state.encode() == "generating_chapter(1)"
        engine.advance_generation(session)
        assert session.state.encode() == "awaiting_response(2)"

    def test_teacher_comment_requires_answered_milestone(self):
        engine, task, _, assets = make_rig()
        session = start_to_awaiting(engine, task, assets)
        with pytest.raises(WrongStateError):
            engine.add_teacher_comment(session, 1, "nice")
        engine.submit_response(session, 1, text="breathe")
        engine.add_teacher_comment(session, 1, "lovely idea")
        assert session.teacher_comments == [(1, "lovely idea")]

    def test_comments_allowed_after_completion(self):
        engine, task, _, assets = make_rig()
        session = run_full_session(engine, task, assets)
        engine.add_teacher_comment(session, 2, "brave choice")
        assert (2, "brave choice") in session.teacher_comments

    def test_abort_requires_non_terminal(self):
        engine, task, _, assets = make_rig()
        session = run_full_session(engine, task, assets)
        with pytest.raises(WrongStateError):
            engine.abort(session, "no reason")


class TestReplay:
    def test_replay_equals_live_session(self):
        engine, task, _, assets = make_rig()
        session = run_full_session(engine, task, assets)
        assert replay(session.event_log) == session

    def test_replay_every_prefix_matches_transition_table(self):
        engine, task, _, assets = make_rig()
        session = run_full_session(engine, task, assets)
        # growing prefixes never raise and end in documented states
        for cut in range(1, len(session.event_log) + 1):
            partial = replay(session.event_log[:cut])
            assert partial.last_seq == cut

    def test_truncation_mid_chapter_lands_in_generating(self):
        engine, task, _, assets = make_rig()
        session = run_full_session(engine, task, assets)
        # cut right after response_recorded(2)
        cut = next(
            i
            for i, e in enumerate(session.event_log, start=1)
            if e.kind == "response_recorded" and e.payload["k"] == 2
        )
        partial = replay(session.event_log[:cut])
        assert partial.state.encode() == "generating_chapter(2)"

    def test_sequence_gap_detected(self):
        engine, task, _, assets = make_rig()
        session = run_full_session(engine, task, assets)
        tampered = session.event_log[:3] + session.event_log[4:]
        with pytest.raises(CorruptLogError) as exc_info:
            replay(tampered)
        assert exc_info.value.bad_seq == 5

    def test_empty_and_headless_logs_rejected(self):
        with pytest.raises(CorruptLogError):
            replay([])
        engine, task, _, assets = make_rig()
        session = run_full_session(engine, task, assets)
        with pytest.raises(CorruptLogError):
            replay(session.event_log[1:])  # does not start with created

    def test_event_log_file_round_trip(self, tmp_path):
        engine, task, _, assets = make_rig()
        session = run_full_session(engine, task, assets)
        path = tmp_path / "events.log"
        write_event_log(path, session)
        events = load_event_log(path)
        assert events == session.event_log
        assert replay(events) == session

    def test_replay_is_pure(self):
        engine, task, _, assets = make_rig()
        session = run_full_session(engine, task, assets)
        assert replay(session.event_log) == replay(session.event_log)


class TestStatusChannel:
    def test_wait_for_change_returns_on_event(self):
        engine, task, _, assets = make_rig()
        session = engine.start_session(task, seed=7)
        drawing = assets.put(b"d", ".png")
        seen = []

        def waiter():
            engine.wait_for_change(session, after_seq=1, timeout_s=5.0)
            seen.append(session.last_seq)

        thread = threading.Thread(target=waiter)
        thread.start()
        engine.submit_drawing(session, drawing, "Bunny")
        thread.join(timeout=5.0)
        assert seen and seen[0] >= 2

    def test_wait_times_out_quietly(self):
        engine, task, _, _ = make_rig()
        session = engine.start_session(task, seed=7)
        engine.wait_for_change(session, after_seq=99, timeout_s=0.05)
        assert session.last_seq == 1
