from .coping import (
    TAXONOMY,
    CopingDistribution,
    CopingTagStore,
    UnresolvedClassification,
    aggregate_coping,
    make_tag,
    read_coping_csv,
    render_coping_table,
    tag_response,
)
from .shapiro import DegenerateSampleError, shapiro_wilk
from .sus import (
    NEGATIVE_ITEMS,
    POSITIVE_ITEMS,
    benchmark_for,
    read_sus_csv,
    render_sus_report,
    sus_score,
    sus_stats,
)

__all__ = [
    "TAXONOMY",
    "CopingDistribution",
    "CopingTagStore",
    "DegenerateSampleError",
    "NEGATIVE_ITEMS",
    "POSITIVE_ITEMS",
    "UnresolvedClassification",
    "aggregate_coping",
    "benchmark_for",
    "make_tag",
    "read_coping_csv",
    "read_sus_csv",
    "render_coping_table",
    "render_sus_report",
    "shapiro_wilk",
    "sus_score",
    "sus_stats",
    "tag_response",
]
