"""The twelve-story fixture corpus and its coded coping responses.

Each fixture carries an expert-authored four-chapter outline, the child's
four milestone responses, and the coping code assigned to every response.
The corpus backs the headless simulator, the analysis-instrument tests, and
the statistics CLI examples.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone

from .docio import SCHEMA_VERSION
from .domain import (
    BranchSpec,
    BranchValence,
    ChapterSpec,
    CopingTag,
    StoryOutline,
    TagOrigin,
    parse_response_code,
)
from .analysis.coping import make_tag
from .domain import CopingSubscale

_FIXTURE_TIME = datetime(2025, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class CorpusStory:
    child_id: str
    title: str
    note: str  # the expert's analysis of the child's situation
    character_kind: str
    protagonist: str
    responses: tuple[str, str, str, str]
    chapters: tuple[ChapterSpec, ...]

    def outline(self) -> StoryOutline:
        return StoryOutline(
            outline_id=f"out_corpus_{self.child_id.lower()}",
            title=self.title,
            brief=self.chapters[0].setting,
            child_profile_note=self.note,
            chapters=self.chapters,
            created_at=_FIXTURE_TIME,
            updated_at=_FIXTURE_TIME,
        )

    def scripted_responses_doc(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "doc_kind": "scripted_responses",
            "protagonist_name": self.protagonist,
            "drawing": "auto",
            "responses": list(self.responses),
        }


def _chapters(*specs: tuple[str, str] | tuple[str, str, tuple[BranchSpec, ...]]):
    chapters = []
    for index, spec in enumerate(specs, start=1):
        setting, plot = spec[0], spec[1]
        branches = spec[2] if len(spec) > 2 else ()
        chapters.append(ChapterSpec(index=index, setting=setting, plot=plot, branches=branches))
    return tuple(chapters)


_STORIES: dict[str, CorpusStory] = {}


def _add(story: CorpusStory) -> None:
    _STORIES[story.child_id] = story


_add(
    CorpusStory(
        child_id="C1",
        title="Exam Heartbeat Battle",
        note="Anxiety-prone with high academic pressure from parents",
        character_kind="Rabbit",
        protagonist="Bunny",
        responses=(
            "Take deep breaths",
            "Skip to the next one",
            "Just forget about it",
            "Accept the result, whatever it is",
        ),
        chapters=_chapters(
            (
                "A cozy burrow desk piled with review books",
                "Bunny is working hard to review for final exams, but as the exam date "
                "approaches, it begins to feel nervous and anxious.",
            ),
            (
                "The examination room on the big day",
                "After the teacher hands out the test papers, Bunny finds several "
                "questions it cannot answer at all. Its little paws begin to tremble.",
            ),
            (
                "Halfway through the exam",
                "Bunny remembers what his mom said and decides to do the problems he "
                "knows first. However, he is still a little worried about the problems "
                "he doesn't know.",
                (
                    BranchSpec(
                        branch_id="c1-ch3-steady",
                        valence=BranchValence.POSITIVE,
                        setting="A quiet, steady stretch of the exam",
                        plot="Bunny settles down, finishes the questions it knows, and "
                        "returns to the hard ones with a calmer heart.",
                    ),
                    BranchSpec(
                        branch_id="c1-ch3-worry",
                        valence=BranchValence.NEGATIVE,
                        setting="The clock ticking louder and louder",
                        plot="Bunny keeps staring at the difficult questions, and the "
                        "worry grows until the easy ones start to blur too.",
                    ),
                ),
            ),
            (
                "Outside the classroom after the exam",
                "The exam is over and the papers are collected. Bunny waits for the "
                "results, not yet knowing how they will turn out.",
            ),
        ),
    )
)

_add(
    CorpusStory(
        child_id="C2",
        title="Classroom Secret",
        note="Emotional dysregulation, tends to shout when upset",
        character_kind="Girl",
        protagonist="Alice",
        responses=(
            "Alice will focus on her learning goals",
            "From now on, Alice will never feel that class is boring.",
            "Why is the teacher so strict about one little thing?",
            "Listen in class and save the chatting for the playground",
        ),
        chapters=_chapters(
            (
                "A buzzing classroom in the morning",
                "Alice whispers a secret to her deskmate during the lesson, and the "
                "teacher stops mid-sentence to look at her.",
            ),
            (
                "The lesson continues",
                "After being reminded by the teacher to listen carefully, Alice feels "
                "the lesson has become long and dull.",
            ),
            (
                "Recess, by the classroom window",
                "Alice keeps thinking the teacher overreacted to one small whisper, and "
                "the thought buzzes in her head like a fly.",
            ),
            (
                "The next morning's class",
                "A new lesson begins, and Alice wants this day at school to go "
                "differently than yesterday.",
            ),
        ),
    )
)

_add(
    CorpusStory(
        child_id="C3",
        title="I Want to Play Hopscotch Too",
        note="Mood swings, easily irritated, withdrawn behavior",
        character_kind="Boy",
        protagonist="Yeer",
        responses=(
            "Walk over and ask to play hopscotch too",
            "Yeer says why didn't everyone notice me, why didn't they see me.",
            "Decide to ask them nicely next break",
            "Apologize for pushing in and take turns properly",
        ),
        chapters=_chapters(
            (
                "The playground at lunch break",
                "Yeer stands at the edge of the playground while his classmates play "
                "hopscotch, laughing together without him.",
            ),
            (
                "Beside the hopscotch squares",
                "Yeer sees his classmates having so much fun, but no one notices him "
                "standing there.",
            ),
            (
                "A bench at the playground's edge",
                "Yeer sits down and turns the afternoon over in his mind, wondering how "
                "to join the game tomorrow.",
            ),
            (
                "The next day's break",
                "The hopscotch squares are drawn again, and this time Yeer walks toward "
                "them with a plan.",
            ),
        ),
    )
)

_add(
    CorpusStory(
        child_id="C4",
        title="The Little Stone in My Heart",
        note="Diagnosed tic disorder",
        character_kind="Boy",
        protagonist="Xiaoyu",
        responses=(
            "Explain to the class that he didn't do it on purpose",
            "Stay quiet and keep away from everyone for a while",
            "Go and see the mental health teacher",
            "Talk with the teacher about what happened",
        ),
        chapters=_chapters(
            (
                "A quiet reading class",
                "A sound escapes Xiaoyu in the middle of the silent classroom, and "
                "heads turn toward him. He didn't mean for it to happen.",
            ),
            (
                "The hallway after class",
                "Some classmates giggle about the noise, and Xiaoyu feels a small stone "
                "settle in his heart.",
            ),
            (
                "By the window at lunch",
                "Xiaoyu is standing by the window, the small stone in his heart getting "
                "heavier and heavier.",
            ),
            (
                "The classroom at the end of the day",
                "The stone feels lighter now, and Xiaoyu thinks about how to make "
                "tomorrow easier than today.",
            ),
        ),
    )
)

_add(
    CorpusStory(
        child_id="C5",
        title="Rainbow Tears in Pencil Case",
        note="School adaptation issues, emotional sensitivity",
        character_kind="Boy",
        protagonist="Noting",
        responses=(
            "Keep focusing on the lesson",
            "Apologize to the teacher right away",
            "Look at the blue sky outside and calm down.",
            "The teacher will forgive him, and Noting will be happy again.",
        ),
        chapters=_chapters(
            (
                "Math class, third period",
                "Noting's pencil case slips off the desk with a clatter, and the whole "
                "class turns around while the teacher frowns.",
            ),
            (
                "The same lesson, a minute later",
                "The teacher says the interruption wasted class time, and Noting feels "
                "the words were not fair — it was an accident.",
            ),
            (
                "His seat by the window",
                "Noting feels very sad right now, and the lesson hums on around him.",
            ),
            (
                "After class, by the teacher's desk",
                "The lesson is over, and Noting wonders how things stand between him "
                "and the teacher now.",
            ),
        ),
    )
)

_add(
    CorpusStory(
        child_id="C6",
        title="Homework Monster's Honest Adventure",
        note="Diagnosed ADHD, emotional control difficulties",
        character_kind="Girl",
        protagonist="Pink",
        responses=(
            "Admit the mistake about the homework",
            "Accept what the teacher explains and nod",
            "Apologize to the teacher and submit the homework.",
            "Finish every page of homework tonight",
        ),
        chapters=_chapters(
            (
                "Morning homework collection",
                "The homework monsters are collected one by one, but Pink's notebook "
                "stayed home, unfinished, and the teacher notices the gap.",
            ),
            (
                "The teacher's office",
                "The teacher explains why the homework matters, and Pink listens with "
                "her hands folded tight.",
            ),
            (
                "Back at her desk",
                "Pink's little fists are clenched tightly, and her little monster is "
                "jumping around inside her chest.",
            ),
            (
                "Home, at the evening desk",
                "The evening is quiet, the notebook is open, and the homework monster "
                "waits to be tamed.",
            ),
        ),
    )
)

_add(
    CorpusStory(
        child_id="C7",
        title="Warm Light in Little Fists",
        note="High parental expectations across multiple areas",
        character_kind="Boy",
        protagonist="Xiaoming",
        responses=(
            "Practice handwriting a little every day",
            "Keep trying hard at sports practice",
            "Wonder why dad expects so much of him",
            "Remember the races he won before and smile",
        ),
        chapters=_chapters(
            (
                "The kitchen table at homework time",
                "Dad looks at Xiaoming's handwriting and sighs that it should be "
                "neater, and Xiaoming's fists curl around his pencil.",
            ),
            (
                "The sports field after school",
                "At practice Xiaoming finishes the run behind the others, and he hears "
                "that he should be faster by now.",
            ),
            (
                "His bed, before sleep",
                "Xiaoming lies awake, the day's words replaying, heavier in the dark.",
            ),
            (
                "Saturday morning at home",
                "A new day starts slow and soft, and Xiaoming thinks about everything "
                "he can already do.",
            ),
        ),
    )
)

_add(
    CorpusStory(
        child_id="C8",
        title="Soccer or Homework?",
        note="Severe behavioral issues, physical aggression",
        character_kind="Boy",
        protagonist="Ming",
        responses=(
            "Tell the truth about playing soccer",
            "Do the homework before going out to play",
            "Accept the punishment and finish the work",
            "Decide that homework comes first from now on",
        ),
        chapters=_chapters(
            (
                "The field behind the school",
                "The soccer ball flies and Ming flies after it, while his homework "
                "waits untouched in his bag.",
            ),
            (
                "The classroom next morning",
                "The teacher asks where Ming's homework is, and the room goes quiet.",
            ),
            (
                "The teacher's office",
                "The teacher sets out what happens next, and Ming stands at the desk "
                "with the choice in front of him.",
            ),
            (
                "The field, a week later",
                "The ball is waiting again — but so is tomorrow's homework, and Ming "
                "remembers last week.",
            ),
        ),
    )
)

_add(
    CorpusStory(
        child_id="C9",
        title="Happy Invitation Hidden in Heart",
        note="Emotionally fragile, easily upset by minor issues",
        character_kind="Girl",
        protagonist="Xiaomei",
        responses=(
            "Xiaomei stopped playing with these children and went to play with her "
            "other good friend instead.",
            "Say yes when a classmate invites her",
            "Share her new picture book with her friend",
            "Invite the girls to jump rope together",
        ),
        chapters=_chapters(
            (
                "The playground at recess",
                "Xiaomei sees the other children playing happily and really wants to "
                "join in, but she's a bit scared.",
            ),
            (
                "The classroom doorway",
                "A classmate waves at Xiaomei and calls her over to play, and "
                "Xiaomei's heart gives a hopeful little jump.",
            ),
            (
                "Two desks pushed together",
                "Xiaomei and her friend sit side by side, and Xiaomei has something "
                "new in her schoolbag today.",
            ),
            (
                "The playground, Friday afternoon",
                "The jump rope lies coiled by the wall, and Xiaomei has an invitation "
                "hidden in her heart.",
            ),
        ),
    )
)

_add(
    CorpusStory(
        child_id="C10",
        title="My Star Practice Book",
        note="Twin sister, good cooperation and expression",
        character_kind="Kangaroo",
        protagonist="Xiao Ai",
        responses=(
            "Practice writing the characters again",
            "Ask why the teacher marked it wrong",
            "Join the drawing class after school",
            "Xiao Ai set a goal for himself. He wants to practice the things he "
            "doesn't do well a few times.",
        ),
        chapters=_chapters(
            (
                "The classroom during writing practice",
                "Xiao Ai's characters hop all over the lines, and the teacher's red "
                "pen circles them one by one.",
            ),
            (
                "Handing back the notebooks",
                "The notebook comes back with marks Xiao Ai doesn't understand, and "
                "the red circles look like little planets.",
            ),
            (
                "Art class in the afternoon",
                "The drawing on Xiao Ai's easel doesn't look like the one in his "
                "head, and the class next door is painting stars.",
            ),
            (
                "Home, after listening to his mom",
                "After listening to his mom, Xiao Ai sits at his desk with a brand-new "
                "practice book in front of him.",
            ),
        ),
    )
)

_add(
    CorpusStory(
        child_id="C11",
        title="Bravely Jump into Happy Circle",
        note="Twin sister, emotionally fragile",
        character_kind="Girl",
        protagonist="Blue",
        responses=(
            "Ask the children if she can join the game",
            "Play tag together and laugh a lot",
            "Stay at the edge and just watch today",
            "Tell her friend she wants to play every day",
        ),
        chapters=_chapters(
            (
                "The big circle game at recess",
                "The children hold hands in a laughing circle, and Blue watches from "
                "three steps away, afraid of being told no.",
            ),
            (
                "The same playground, minutes later",
                "A gap opens in the circle right in front of Blue, and the game "
                "swirls on around it.",
            ),
            (
                "A rainy-day recess indoors",
                "The classroom games are loud today, and Blue's chair feels safe and "
                "far away.",
            ),
            (
                "Sunny again, the next day",
                "The circle forms again under the sun, and this time Blue's friend is "
                "in it, waving.",
            ),
        ),
    )
)

_add(
    CorpusStory(
        child_id="C12",
        title="Queuing is Happier than Cutting",
        note="Rule violation, communication difficulties",
        character_kind="Boy",
        protagonist="Xiaohang",
        responses=(
            "Go to the back of the line and wait",
            "Why do the other children not want to play with him?",
            "Apologize to the classmates for cutting in line",
            "Keep queuing properly every single day",
        ),
        chapters=_chapters(
            (
                "The slide line at recess",
                "Xiaohang squeezes past three classmates to reach the slide first, and "
                "the line behind him erupts in protest.",
            ),
            (
                "The playground afterwards",
                "When the next game starts, the other children pick teams and "
                "Xiaohang is left standing alone.",
            ),
            (
                "The slide line, the next day",
                "The line is long again, and the classmates Xiaohang pushed past "
                "yesterday are right there in it.",
            ),
            (
                "Recess at the end of the week",
                "The week is ending, and the slide line moves along one child at a "
                "time, Xiaohang in his place in it.",
            ),
        ),
    )
)


def story(child_id: str) -> CorpusStory:
    return _STORIES[child_id]


def all_story_ids() -> list[str]:
    return sorted(_STORIES, key=lambda c: int(c[1:]))


def all_stories() -> list[CorpusStory]:
    return [_STORIES[c] for c in all_story_ids()]


# --------------------------------------------------------------------------
# The 48 coded responses (code -> subscale), one per child per milestone.
# --------------------------------------------------------------------------

CODED_RESPONSES: tuple[tuple[str, str], ...] = (
    # Problem Focused Coping
    ("C3-3", "CognitiveDecisionMaking"),
    ("C8-4", "CognitiveDecisionMaking"),
    ("C10-4", "CognitiveDecisionMaking"),
    ("C1-2", "DirectProblemSolving"),
    ("C2-4", "DirectProblemSolving"),
    ("C3-1", "DirectProblemSolving"),
    ("C3-4", "DirectProblemSolving"),
    ("C4-1", "DirectProblemSolving"),
    ("C4-4", "DirectProblemSolving"),
    ("C5-1", "DirectProblemSolving"),
    ("C5-2", "DirectProblemSolving"),
    ("C6-1", "DirectProblemSolving"),
    ("C6-2", "DirectProblemSolving"),
    ("C6-3", "DirectProblemSolving"),
    ("C6-4", "DirectProblemSolving"),
    ("C7-1", "DirectProblemSolving"),
    ("C7-2", "DirectProblemSolving"),
    ("C8-1", "DirectProblemSolving"),
    ("C8-2", "DirectProblemSolving"),
    ("C8-3", "DirectProblemSolving"),
    ("C9-2", "DirectProblemSolving"),
    ("C9-3", "DirectProblemSolving"),
    ("C9-4", "DirectProblemSolving"),
    ("C10-1", "DirectProblemSolving"),
    ("C10-3", "DirectProblemSolving"),
    ("C11-1", "DirectProblemSolving"),
    ("C11-2", "DirectProblemSolving"),
    ("C11-4", "DirectProblemSolving"),
    ("C12-1", "DirectProblemSolving"),
    ("C12-3", "DirectProblemSolving"),
    ("C12-4", "DirectProblemSolving"),
    ("C2-3", "SeekingUnderstanding"),
    ("C3-2", "SeekingUnderstanding"),
    ("C7-3", "SeekingUnderstanding"),
    ("C10-2", "SeekingUnderstanding"),
    ("C12-2", "SeekingUnderstanding"),
    # Positive Cognitive Reframing
    ("C2-1", "PositiveThinking"),
    ("C2-2", "PositiveThinking"),
    ("C5-4", "OptimisticThinking"),
    ("C7-4", "OptimisticThinking"),
    # Distraction
    ("C1-1", "PhysicalReleaseOfEmotion"),
    ("C1-4", "PhysicalReleaseOfEmotion"),
    ("C5-3", "DistractingActions"),
    # Avoidance
    ("C4-2", "AvoidantActions"),
    ("C9-1", "AvoidantActions"),
    ("C11-3", "AvoidantActions"),
    ("C1-3", "Repression"),
    # Support Seeking
    ("C4-3", "SupportForFeelings"),
)


def coded_tags() -> list[CopingTag]:
    return [
        make_tag(parse_response_code(code), CopingSubscale(subscale), TagOrigin.MANUAL)
        for code, subscale in CODED_RESPONSES
    ]


def response_text_for(code_str: str) -> str:
    code = parse_response_code(code_str)
    return _STORIES[f"C{code.child_index}"].responses[code.milestone - 1]


def coping_fixture_csv() -> str:
    """CSV (code,subscale,text) of all 48 coded responses."""
    lines = ["code,subscale,text"]
    for code, subscale in CODED_RESPONSES:
        text = response_text_for(code).replace('"', '""')
        lines.append(f'{code},{subscale},"{text}"')
    return "\n".join(lines) + "\n"
