"""Ranking metrics (P@1, Max-F1, PR-AUC) and annotator agreement.

Max-F1 and PR-AUC pool every candidate of every question into one scored
set (micro averaging), which matches single-number reporting; a macro
per-question average is available behind a flag in the report builder.
PR-AUC uses the average-precision step sum, not trapezoids.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

__all__ = [
    "ScoredGroup",
    "MaxF1",
    "NoPositives",
    "p_at_1",
    "max_f1",
    "pr_auc",
    "annotator_agreement",
    "metrics_report",
]


class NoPositives(ValueError):
    pass


@dataclass(frozen=True)
class ScoredGroup:
    """Per-candidate probabilities and gold labels for one question."""

    probabilities: tuple[float, ...]
    labels: tuple[int, ...]
    tokens: tuple[tuple[str, ...], ...] | None = None

    def __post_init__(self):
        if len(self.probabilities) != len(self.labels):
            raise ValueError("probabilities/labels length mismatch")
        if any(l not in (0, 1) for l in self.labels):
            raise ValueError("labels must be 0 or 1")
        if not self.labels:
            raise ValueError("a scored group cannot be empty")


def _top_index(group: ScoredGroup) -> int:
    def key(i):
        if group.tokens is not None:
            return (-group.probabilities[i], len(group.tokens[i]), " ".join(group.tokens[i]))
        return (-group.probabilities[i], i)

    return min(range(len(group.labels)), key=key)


def p_at_1(groups) -> float:
    """Fraction of groups whose top candidate (after tie-break) is gold."""
    groups = list(groups)
    if not groups:
        raise ValueError("need at least one group")
    hits = sum(group.labels[_top_index(group)] for group in groups)
    return hits / len(groups)


@dataclass(frozen=True)
class MaxF1:
    value: float
    threshold: float
    precision: float
    recall: float


def max_f1(scores, labels) -> MaxF1:
    """Best F1 over all distinct score thresholds (predict score >= t)."""
    scores = list(scores)
    labels = list(labels)
    n_pos = sum(labels)
    if n_pos == 0:
        raise NoPositives("no positive labels")
    best = None
    for t in sorted(set(scores), reverse=True):
        tp = sum(1 for s, l in zip(scores, labels) if s >= t and l == 1)
        predicted = sum(1 for s in scores if s >= t)
        precision = tp / predicted if predicted else 0.0
        recall = tp / n_pos
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        if best is None or f1 > best.value:
            best = MaxF1(f1, t, precision, recall)
    return best


def pr_auc(scores, labels) -> float:
    """Average precision: sum of (R_t - R_prev) * P_t over thresholds."""
    scores = list(scores)
    labels = list(labels)
    n_pos = sum(labels)
    if n_pos == 0:
        raise NoPositives("no positive labels")
    auc = 0.0
    prev_recall = 0.0
    tp = 0
    predicted = 0
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    i = 0
    while i < len(order):
        j = i
        while j < len(order) and scores[order[j]] == scores[order[i]]:
            tp += labels[order[j]]
            predicted += 1
            j += 1
        recall = tp / n_pos
        precision = tp / predicted
        auc += (recall - prev_recall) * precision
        prev_recall = recall
        i = j
    return auc


def annotator_agreement(annotations) -> float:
    """Weighted average agreement over (annotator, question, response) picks.

    A pick is a match when at least two distinct annotators chose the same
    response for the same question; each annotator's agreement is their
    match fraction, weighted by how many questions they annotated.
    """
    annotations = list(annotations)
    if not annotations:
        raise ValueError("need at least one annotation")
    voters: dict[tuple, set] = defaultdict(set)
    for annotator, question, response in annotations:
        voters[(question, response)].add(annotator)
    per_annotator = defaultdict(lambda: [0, 0])  # [matches, total]
    for annotator, question, response in annotations:
        stats = per_annotator[annotator]
        stats[1] += 1
        if len(voters[(question, response)]) >= 2:
            stats[0] += 1
    total = sum(n for _, n in per_annotator.values())
    return sum(m for m, _ in per_annotator.values()) / total


def metrics_report(groups, macro: bool = False) -> dict:
    """The metrics JSON payload for a collection of scored groups."""
    groups = list(groups)
    pooled_scores = [p for g in groups for p in g.probabilities]
    pooled_labels = [l for g in groups for l in g.labels]
    if macro:
        per_q = [g for g in groups if sum(g.labels) > 0]
        mf_vals = [max_f1(g.probabilities, g.labels).value for g in per_q]
        auc_vals = [pr_auc(g.probabilities, g.labels) for g in per_q]
        mf = MaxF1(sum(mf_vals) / len(mf_vals), float("nan"), float("nan"), float("nan"))
        auc = sum(auc_vals) / len(auc_vals)
    else:
        mf = max_f1(pooled_scores, pooled_labels)
        auc = pr_auc(pooled_scores, pooled_labels)
    return {
        "p_at_1": p_at_1(groups),
        "max_f1": {
            "value": mf.value,
            "threshold": mf.threshold,
            "precision": mf.precision,
            "recall": mf.recall,
        },
        "pr_auc": auc,
        "n_questions": len(groups),
        "n_candidates": len(pooled_labels),
    }
