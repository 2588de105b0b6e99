"""Keyword rules used by the deterministic mock classifiers.

Real deployments route classification through a text provider prompt; the
mock backend answers from these hand-curated lists instead so that branch
selection and coping suggestions are reproducible in tests.
"""
from __future__ import annotations

import re

POSITIVE_STEMS = (
    "apolog",
    "try",
    "tries",
    "tried",
    "ask",
    "practic",
    "breath",
    "calm",
    "help",
    "goal",
    "plan",
    "finish",
    "submit",
    "admit",
    "honest",
    "share",
    "join",
    "communicat",
    "improv",
    "accept",
    "brave",
    "focus",
    "explain",
    "listen",
    "effort",
    "courag",
)

NEGATIVE_STEMS = (
    "forget",
    "forgot",
    "avoid",
    "hit",
    "give up",
    "giving up",
    "quit",
    "run away",
    "ignore",
    "hide",
    "slam",
    "shout",
    "yell",
    "angry",
    "refuse",
    "whatever",
)


def _hits(text: str, stems: tuple[str, ...]) -> int:
    return sum(1 for stem in stems if re.search(r"\b" + re.escape(stem), text))


def classify_valence(response_text: str) -> str:
    """'positive', 'negative', or 'unknown' (ties and no-match)."""
    text = response_text.lower()
    pos = _hits(text, POSITIVE_STEMS)
    neg = _hits(text, NEGATIVE_STEMS)
    if pos > neg:
        return "positive"
    if neg > pos:
        return "negative"
    return "unknown"


# First matching rule wins; the fallback is the study's most common strategy.
_COPING_RULES: tuple[tuple[str, str], ...] = (
    (r"\bbreath|\bjump|\bstretch|\brun around", "PhysicalReleaseOfEmotion"),
    (r"\bforget|\bnever mind", "Repression"),
    (r"\blook at|\bwatch|\bdraw|\bsing|\bplay a game", "DistractingActions"),
    (r"\bwish\b|\bhope it", "WishfulThinking"),
    (r"\bstay away|\bavoid|\bwent to play with|\bgo play with", "AvoidantActions"),
    (r"\bwhy\b|\bunderstand|\bwonder", "SeekingUnderstanding"),
    (r"\bset a goal|\bdecide|\bchoose|\bmake a plan", "CognitiveDecisionMaking"),
    (r"\bteacher\b.*\b(see|tell|talk)|\b(see|tell|talk)\b.*\bteacher\b", "SupportForFeelings"),
    (r"\bforgive|\bhappy again|\bturn out|\bwill be fine", "OptimisticThinking"),
    (r"\bnever feel|\bbright side|\benjoy", "PositiveThinking"),
    (r"\bhold back|\bkeep it in|\bstay in control", "Control"),
)


def suggest_subscale(response_text: str) -> str:
    """A coping subscale name for the mock suggestion classifier."""
    text = response_text.lower()
    for pattern, subscale in _COPING_RULES:
        if re.search(pattern, text):
            return subscale
    return "DirectProblemSolving"
