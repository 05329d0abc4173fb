"""Seed-driven ranking of candidate studies for screening prioritisation."""

from ._core import (
    SeedrankError,
    average_precision,
    bonferroni,
    cmd_analyze,
    cmd_compare,
    cmd_eval,
    cmd_multi,
    cmd_rank,
    evaluate,
    load_corpus,
    make_groups,
    ndcg_at,
    paired_t_test,
    precision_at,
    rank_documents,
    recall_at,
    tokenize,
)

__all__ = [
    "SeedrankError",
    "average_precision",
    "bonferroni",
    "cmd_analyze",
    "cmd_compare",
    "cmd_eval",
    "cmd_multi",
    "cmd_rank",
    "evaluate",
    "load_corpus",
    "make_groups",
    "ndcg_at",
    "paired_t_test",
    "precision_at",
    "rank_documents",
    "recall_at",
    "tokenize",
]
