"""End-to-end augmentation: generate, rank, threshold, emit response triples.

For every admissible question the candidates are generated, scored with a
trained ranker (or externally supplied probabilities), filtered to those at
or above the probability threshold, and the top few are emitted as
(question, answer, response) records.  Thresholding happens before the
top-k cut.  Questions the generator cannot transform pass their answer
phrase through as a single record with no probability.  Output order is the
input order, so a run is byte-for-byte reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ranker as rk
from .ngram import NGramModel
from .ranker import FeatureGroup, RankerModel, SchemaMismatch
from .stgen import QAInstance, RuleSet, generate

__all__ = ["AugmentRun", "augment", "augment_report"]

DEFAULT_THRESHOLD = 0.5
DEFAULT_TOP_K = 3


@dataclass
class AugmentRun:
    records: list[dict] = field(default_factory=list)
    n_instances: int = 0
    n_fallbacks: int = 0
    n_truncated: int = 0
    n_empty: int = 0
    n_triples: int = 0


def augment(
    instances,
    model: RankerModel | None,
    lm2: NGramModel,
    lm3: NGramModel,
    threshold: float = DEFAULT_THRESHOLD,
    top_k: int = DEFAULT_TOP_K,
    rules: RuleSet | None = None,
    cap: int = 10_000,
    external_scores: dict | None = None,
) -> AugmentRun:
    """Produce augmentation records for the given instances.

    ``external_scores`` maps instance id -> per-candidate probabilities and
    replaces the linear model's calibration when present.  Every emitted
    record carries id, question, answer, response, probability, and trace;
    questions with no candidate above threshold yield one record with a
    null response and ``empty: true``.
    """
    if model is None and external_scores is None:
        raise SchemaMismatch("either a ranker model or external scores are required")
    run = AugmentRun()
    for instance in instances:
        run.n_instances += 1
        output = generate(instance, rules=rules, cap=cap)
        if output.truncated:
            run.n_truncated += 1
        base = {
            "id": instance.id,
            "question": " ".join(instance.question),
            "answer": " ".join(instance.answer),
        }
        if output.fallback:
            run.n_fallbacks += 1
            candidate = output.candidates[0]
            run.records.append(
                base | {"response": candidate.text(), "trace": sorted(candidate.trace)}
            )
            run.n_triples += 1
            continue
        group = _feature_group(instance, output, model, lm2, lm3, external_scores)
        scores = external_scores.get(instance.id) if external_scores else None
        if scores is not None and len(scores) != len(output.candidates):
            raise SchemaMismatch(
                f"instance {instance.id!r}: {len(scores)} external scores for "
                f"{len(output.candidates)} candidates"
            )
        ranking = rk.rank(model, group, external_scores=scores)
        kept = [i for i in ranking.indices if ranking.probabilities[i] >= threshold][:top_k]
        if not kept:
            run.n_empty += 1
            run.records.append(base | {"response": None, "probability": None,
                                       "trace": [], "empty": True})
            continue
        for i in kept:
            candidate = output.candidates[i]
            run.records.append(
                base
                | {
                    "response": candidate.text(),
                    "probability": float(ranking.probabilities[i]),
                    "trace": sorted(candidate.trace),
                }
            )
            run.n_triples += 1
    return run


def _feature_group(instance, output, model, lm2, lm3, external_scores):
    if external_scores is not None and instance.id in external_scores:
        # Features are not needed; build a placeholder carrying the tokens.
        import numpy as np

        return FeatureGroup(
            instance.id,
            np.zeros((len(output.candidates), 1)),
            np.zeros(len(output.candidates), int),
            tuple(c.tokens for c in output.candidates),
        )
    labeled = rk.LabeledGroup(
        instance, output.candidates, tuple(0 for _ in output.candidates)
    )
    return rk.featurize(labeled, lm2, lm3)


def augment_report(run: AugmentRun) -> dict:
    """Summary counts plus a 10-bin histogram of emitted probabilities."""
    histogram = [0] * 10
    for record in run.records:
        p = record.get("probability")
        if p is None:
            continue
        histogram[min(int(p * 10), 9)] += 1
    return {
        "instances": run.n_instances,
        "fallbacks": run.n_fallbacks,
        "truncated": run.n_truncated,
        "empty_questions": run.n_empty,
        "triples": run.n_triples,
        "records": len(run.records),
        "probability_histogram": histogram,
    }
