"""Scoring and statistics for the 13-item children's usability questionnaire.

Items 1, 3, 5, 7, 9, 11, 12, 13 are positively worded (contribution is
item - 1); items 2, 4, 6, 8, 10 are negatively worded (contribution is
5 - item). A questionnaire's score is 100 * total_contribution / 52, so the
scale spans exactly [0, 100].
"""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from ..domain import SUS_ITEM_COUNT, SUSAnalysis, SUSResponse, UsabilityBenchmark
from ..errors import ValidationFailure
from .shapiro import MIN_N, DegenerateSampleError, shapiro_wilk

POSITIVE_ITEMS = frozenset({1, 3, 5, 7, 9, 11, 12, 13})
NEGATIVE_ITEMS = frozenset({2, 4, 6, 8, 10})
MAX_CONTRIBUTION = 4 * SUS_ITEM_COUNT  # 52

# Adjective-scale thresholds on the 0..100 score.
BENCHMARK_THRESHOLDS = (
    (84.1, UsabilityBenchmark.BEST_IMAGINABLE),
    (80.8, UsabilityBenchmark.EXCELLENT),
    (71.4, UsabilityBenchmark.GOOD),
    (51.0, UsabilityBenchmark.OK),
)


def sus_score(response: SUSResponse) -> float:
    total = 0
    for index, item in enumerate(response.items, start=1):
        if index in POSITIVE_ITEMS:
            total += item - 1
        else:
            total += 5 - item
    return 100.0 * total / MAX_CONTRIBUTION


def benchmark_for(score: float) -> UsabilityBenchmark:
    for threshold, benchmark in BENCHMARK_THRESHOLDS:
        if score >= threshold:
            return benchmark
    return UsabilityBenchmark.POOR


def sus_stats(responses: list[SUSResponse]) -> SUSAnalysis:
    """Per-respondent scores plus mean, sample SD, normality test, benchmark.

    The Shapiro-Wilk fields stay absent when n < 3 or when the scores are
    degenerate (zero variance); mean and SD are always computed.
    """
    if not responses:
        raise ValidationFailure("sus_stats needs at least one response")
    scores = tuple(sus_score(r) for r in responses)
    n = len(scores)
    mean = sum(scores) / n
    sd = math.sqrt(sum((s - mean) ** 2 for s in scores) / (n - 1)) if n > 1 else 0.0
    shapiro_w = shapiro_p = None
    degenerate = False
    if n >= MIN_N:
        try:
            shapiro_w, shapiro_p = shapiro_wilk(scores)
        except DegenerateSampleError:
            degenerate = True
    return SUSAnalysis(
        scores=scores,
        mean=mean,
        sd=sd,
        benchmark=benchmark_for(mean),
        shapiro_w=shapiro_w,
        shapiro_p=shapiro_p,
        degenerate=degenerate,
    )


# --------------------------------------------------------------------------
# CSV ingestion: header respondent_id,q1..q13
# --------------------------------------------------------------------------

_EXPECTED_HEADER = ["respondent_id"] + [f"q{i}" for i in range(1, SUS_ITEM_COUNT + 1)]


def read_sus_csv(source: Path | str | io.TextIOBase) -> list[SUSResponse]:
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
            raise ValidationFailure("SUS CSV is empty") from None
        if [h.strip() for h in header] != _EXPECTED_HEADER:
            raise ValidationFailure(
                f"SUS CSV header must be {','.join(_EXPECTED_HEADER)}"
            )
        responses = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != SUS_ITEM_COUNT + 1:
                raise ValidationFailure(
                    f"SUS CSV line {line_no}: expected {SUS_ITEM_COUNT + 1} fields, got {len(row)}"
                )
            try:
                items = tuple(int(cell) for cell in row[1:])
            except ValueError:
                raise ValidationFailure(
                    f"SUS CSV line {line_no}: items must be integers"
                ) from None
            try:
                responses.append(SUSResponse(respondent_id=row[0].strip(), items=items))
            except ValidationFailure as exc:
                raise ValidationFailure(f"SUS CSV line {line_no}: {exc}") from None
        return responses
    finally:
        if close:
            handle.close()


def render_sus_report(analysis: SUSAnalysis) -> str:
    lines = [
        f"Respondents: {len(analysis.scores)}",
        f"Mean score: {analysis.mean:.2f}",
        f"SD (sample): {analysis.sd:.2f}",
        f"Benchmark: {analysis.benchmark.value}",
    ]
    if analysis.degenerate:
        lines.append("Shapiro-Wilk: undefined (degenerate sample)")
    elif analysis.shapiro_w is None:
        lines.append("Shapiro-Wilk: not computed (n < 3)")
    else:
        lines.append(f"Shapiro-Wilk: W = {analysis.shapiro_w:.3f}, p = {analysis.shapiro_p:.3f}")
    return "\n".join(lines)
