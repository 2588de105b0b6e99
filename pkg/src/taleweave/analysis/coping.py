"""Coping-strategy taxonomy, tagging, and aggregation.

The taxonomy is a fixed table: five dimensions covering thirteen subscales.
Tags are either manual (a human coder picked the subscale) or suggested (a
constrained classification call proposed it); suggested tags are advisory,
never overwrite manual ones, and fall back to an unresolved flag when the
provider strays outside the enum.
"""
from __future__ import annotations

import csv
import io
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

from ..domain import (
    CopingDimension,
    CopingSubscale,
    CopingTag,
    ResponseCode,
    TagOrigin,
    parse_response_code,
)
from ..errors import ValidationFailure
from ..providers.types import AgentRole, TextRequest

TAXONOMY: dict[CopingDimension, tuple[CopingSubscale, ...]] = {
    CopingDimension.PROBLEM_FOCUSED: (
        CopingSubscale.COGNITIVE_DECISION_MAKING,
        CopingSubscale.DIRECT_PROBLEM_SOLVING,
        CopingSubscale.SEEKING_UNDERSTANDING,
    ),
    CopingDimension.POSITIVE_COGNITIVE_REFRAMING: (
        CopingSubscale.POSITIVE_THINKING,
        CopingSubscale.OPTIMISTIC_THINKING,
        CopingSubscale.CONTROL,
    ),
    CopingDimension.DISTRACTION: (
        CopingSubscale.PHYSICAL_RELEASE_OF_EMOTION,
        CopingSubscale.DISTRACTING_ACTIONS,
    ),
    CopingDimension.AVOIDANCE: (
        CopingSubscale.AVOIDANT_ACTIONS,
        CopingSubscale.REPRESSION,
        CopingSubscale.WISHFUL_THINKING,
    ),
    CopingDimension.SUPPORT_SEEKING: (
        CopingSubscale.SUPPORT_FOR_FEELINGS,
        CopingSubscale.SUPPORT_FOR_ACTIONS,
    ),
}

DIMENSION_OF: dict[CopingSubscale, CopingDimension] = {
    subscale: dimension
    for dimension, subscales in TAXONOMY.items()
    for subscale in subscales
}

assert len(DIMENSION_OF) == 13, "taxonomy must cover exactly 13 subscales"


@dataclass(frozen=True)
class UnresolvedClassification:
    """Suggestion the provider could not resolve into a valid subscale."""

    code: ResponseCode
    response_text: str
    attempts: tuple[str, ...]
    unresolved: bool = True


def make_tag(code: ResponseCode, subscale: CopingSubscale, origin: TagOrigin) -> CopingTag:
    return CopingTag(
        code=code, dimension=DIMENSION_OF[subscale], subscale=subscale, origin=origin
    )


def tag_response(
    code: ResponseCode,
    response_text: str,
    subscale: Optional[CopingSubscale | str] = None,
    gateway=None,
) -> Union[CopingTag, UnresolvedClassification]:
    """Tag one milestone response.

    Manual mode (subscale given): validates the subscale and records a manual
    tag. Suggested mode (gateway given): asks the text provider to pick one of
    the 13 subscale names; an answer outside the enum retries once, then the
    response is flagged for human review instead of being tagged.
    """
    if subscale is not None:
        try:
            resolved = CopingSubscale(subscale)
        except ValueError:
            raise ValidationFailure(
                f"invalid subscale {subscale!r}; expected one of "
                f"{[s.value for s in CopingSubscale]}"
            ) from None
        return make_tag(code, resolved, TagOrigin.MANUAL)
    if gateway is None:
        raise ValidationFailure("suggested mode requires a text provider gateway")
    names = ", ".join(s.value for s in CopingSubscale)
    attempts: list[str] = []
    for _ in range(2):
        result = gateway.generate_text(
            TextRequest(
                role_tag=AgentRole.COPING_CLASSIFIER,
                prompt=(
                    "Classify the child's coping response into exactly one of these "
                    f"subscales: {names}. Answer with the subscale name only."
                ),
                context=(("response", response_text),),
            )
        )
        answer = result.text.strip()
        attempts.append(answer)
        try:
            return make_tag(code, CopingSubscale(answer), TagOrigin.SUGGESTED)
        except ValueError:
            continue
    return UnresolvedClassification(
        code=code, response_text=response_text, attempts=tuple(attempts)
    )


class CopingTagStore:
    """Per-code tag registry. Manual tags win; suggested tags never overwrite."""

    def __init__(self):
        self._tags: dict[ResponseCode, CopingTag] = {}
        self._lock = threading.Lock()

    def add(self, tag: CopingTag) -> CopingTag:
        with self._lock:
            existing = self._tags.get(tag.code)
            if (
                existing is not None
                and existing.origin is TagOrigin.MANUAL
                and tag.origin is TagOrigin.SUGGESTED
            ):
                return existing
            self._tags[tag.code] = tag
            return tag

    def all(self) -> list[CopingTag]:
        with self._lock:
            return sorted(self._tags.values(), key=lambda t: t.code)


@dataclass(frozen=True)
class CopingDistribution:
    subscale_counts: dict[CopingSubscale, int]
    dimension_counts: dict[CopingDimension, int]
    presence: dict[int, tuple[CopingSubscale, ...]]  # child index -> subscales used
    codes_by_subscale: dict[CopingSubscale, tuple[ResponseCode, ...]]
    total: int

    def children_using(self, subscale: CopingSubscale) -> tuple[int, ...]:
        return tuple(
            sorted(child for child, used in self.presence.items() if subscale in used)
        )

    def to_doc(self) -> dict[str, Any]:
        return {
            "total": self.total,
            "subscale_counts": {s.value: c for s, c in self.subscale_counts.items()},
            "dimension_counts": {d.value: c for d, c in self.dimension_counts.items()},
            "presence": {
                str(child): [s.value for s in subscales]
                for child, subscales in self.presence.items()
            },
            "codes_by_subscale": {
                s.value: [c.encode() for c in codes]
                for s, codes in self.codes_by_subscale.items()
            },
        }


def aggregate_coping(tags: list[CopingTag]) -> CopingDistribution:
    seen: dict[ResponseCode, CopingTag] = {}
    for tag in tags:
        if tag.code in seen:
            raise ValidationFailure(f"duplicate response code {tag.code.encode()}")
        seen[tag.code] = tag
    subscale_counts = {s: 0 for s in CopingSubscale}
    dimension_counts = {d: 0 for d in CopingDimension}
    presence_sets: dict[int, set[CopingSubscale]] = {}
    codes: dict[CopingSubscale, list[ResponseCode]] = {s: [] for s in CopingSubscale}
    for tag in tags:
        subscale_counts[tag.subscale] += 1
        dimension_counts[tag.dimension] += 1
        presence_sets.setdefault(tag.code.child_index, set()).add(tag.subscale)
        codes[tag.subscale].append(tag.code)
    return CopingDistribution(
        subscale_counts=subscale_counts,
        dimension_counts=dimension_counts,
        presence={
            child: tuple(sorted(used, key=lambda s: s.value))
            for child, used in sorted(presence_sets.items())
        },
        codes_by_subscale={s: tuple(sorted(c)) for s, c in codes.items()},
        total=len(tags),
    )


# --------------------------------------------------------------------------
# CSV ingestion (header: code,subscale,text) and table rendering
# --------------------------------------------------------------------------


def read_coping_csv(source: Path | str | io.TextIOBase) -> list[CopingTag]:
    if isinstance(source, (str, Path)):
        handle = open(source, "r", encoding="utf-8", newline="")
        close = True
    else:
        handle, close = source, False
    try:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationFailure("coping CSV is empty") from None
        normalized = [h.strip() for h in header]
        if normalized[:2] != ["code", "subscale"]:
            raise ValidationFailure("coping CSV header must start with code,subscale")
        tags = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 2:
                raise ValidationFailure(
                    f"coping CSV line {line_no}: expected code,subscale[,text]"
                )
            try:
                code = parse_response_code(row[0])
                subscale = CopingSubscale(row[1].strip())
            except (ValidationFailure, ValueError) as exc:
                raise ValidationFailure(f"coping CSV line {line_no}: {exc}") from None
            tags.append(make_tag(code, subscale, TagOrigin.MANUAL))
        return tags
    finally:
        if close:
            handle.close()


def render_coping_table(distribution: CopingDistribution) -> str:
    """Plain-text table: dimension, subscale, count, and the response codes."""
    width_dim = max(len(d.value) for d in CopingDimension)
    width_sub = max(len(s.value) for s in CopingSubscale)
    lines = [
        f"{'Dimension':<{width_dim}}  {'Subscale':<{width_sub}}  {'Count':>5}  Codes",
        "-" * (width_dim + width_sub + 16),
    ]
    for dimension, subscales in TAXONOMY.items():
        for subscale in subscales:
            codes = ", ".join(c.encode() for c in distribution.codes_by_subscale[subscale])
            lines.append(
                f"{dimension.value:<{width_dim}}  {subscale.value:<{width_sub}}  "
                f"{distribution.subscale_counts[subscale]:>5}  {codes}"
            )
    lines.append("-" * (width_dim + width_sub + 16))
    lines.append(f"Total responses: {distribution.total}")
    return "\n".join(lines)
