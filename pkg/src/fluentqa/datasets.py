"""Build labeled train/val/test splits from raw best-response annotations.

Labeling policy: training positives need agreement from at least two
distinct annotators (questions where no response reaches two votes are
dropped); validation and test keep every annotated response to improve
recall, except that the shortest candidate in the list only counts with two
votes, since lazy annotators gravitate to the first entry of a
length-sorted list.  Everything unannotated is labeled 0.

Annotated response text is matched against candidates after lowercasing
and whitespace normalization.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from importlib import resources

from . import stgen
from .jsonio import read_jsonl
from .ranker import LabeledGroup, shortest_response_baseline
from .stgen import CandidateResponse, GenerationOutput, QAInstance

__all__ = [
    "AnnotationRecord",
    "SGSplit",
    "UnknownResponse",
    "DropCounts",
    "filter_instances",
    "build_labels",
    "make_splits",
    "normalize_response",
    "mini_sg_instances",
    "mini_sg_annotations",
    "mini_sg_corpus",
]

SPLIT_KINDS = ("train", "val", "test")
DEFAULT_RATIOS = (2000, 300, 700)
MAX_ANSWER_TOKENS = 5


class UnknownResponse(ValueError):
    pass


@dataclass(frozen=True)
class AnnotationRecord:
    question_id: str
    annotator_id: str
    response: str

    @classmethod
    def from_json(cls, record: dict) -> "AnnotationRecord":
        return cls(str(record["question_id"]), str(record["annotator_id"]), record["response"])

    def to_json(self) -> dict:
        return {
            "question_id": self.question_id,
            "annotator_id": self.annotator_id,
            "response": self.response,
        }


@dataclass(frozen=True)
class SGSplit:
    kind: str
    groups: tuple[LabeledGroup, ...]

    def __post_init__(self):
        if self.kind not in SPLIT_KINDS:
            raise ValueError(f"unknown split kind {self.kind!r}")


def normalize_response(text) -> str:
    if not isinstance(text, str):
        text = " ".join(text)
    return " ".join(text.lower().split())


DropCounts = Counter


def filter_instances(instances, allow_fallback: bool = False):
    """Apply the dataset admission policy.

    Returns (kept, drop_counts); reasons partition the removed set:
    answers longer than five tokens are dropped first, then trees carrying
    neither an SBARQ nor an SQ node (unless fallback instances are allowed
    through for answer-phrase passthrough).
    """
    kept: list[QAInstance] = []
    drops: Counter = Counter()
    for instance in instances:
        if len(instance.answer) > MAX_ANSWER_TOKENS:
            drops["answer-too-long"] += 1
            continue
        has_clause = any(
            label in ("SBARQ", "SQ")
            for label in _labels(instance.question_tree)
        )
        if not has_clause and not allow_fallback:
            drops["parse-failure"] += 1
            continue
        kept.append(instance)
    return kept, drops


def _labels(tree):
    stack = [tree]
    while stack:
        node = stack.pop()
        yield node.label
        stack.extend(node.children)


def build_labels(groups, annotations, kind: str) -> SGSplit:
    """Label candidate lists from annotation records.

    ``groups`` is a sequence of (QAInstance, candidates) pairs, where
    candidates may be a GenerationOutput or a plain candidate sequence.
    Raises UnknownResponse when an annotation does not match any candidate.
    """
    if kind not in SPLIT_KINDS:
        raise ValueError(f"unknown split kind {kind!r}")
    by_question: dict[str, list[AnnotationRecord]] = defaultdict(list)
    for ann in annotations:
        by_question[ann.question_id].append(ann)

    labeled: list[LabeledGroup] = []
    for instance, candidates in groups:
        if isinstance(candidates, GenerationOutput):
            candidates = candidates.candidates
        candidates = tuple(candidates)
        texts = [normalize_response(c.tokens) for c in candidates]
        available = set(texts)
        votes: dict[str, set[str]] = defaultdict(set)
        for ann in by_question.get(instance.id, ()):
            response = normalize_response(ann.response)
            if response not in available:
                raise UnknownResponse(
                    f"question {instance.id!r}: annotated response {ann.response!r} "
                    "is not among the candidates"
                )
            votes[response].add(ann.annotator_id)

        shortest = texts[shortest_response_baseline([c.tokens for c in candidates])]
        labels = []
        for text in texts:
            needed = 2 if (kind == "train" or text == shortest) else 1
            labels.append(1 if len(votes.get(text, ())) >= needed else 0)
        if kind == "train" and not any(labels):
            continue  # no response reached two votes; drop the question
        labeled.append(LabeledGroup(instance, candidates, tuple(labels)))
    return SGSplit(kind, tuple(labeled))


def make_splits(items, ratios=DEFAULT_RATIOS, seed: int = 13) -> dict:
    """Proportional seeded split into train/val/test."""
    import random

    items = list(items)
    order = list(range(len(items)))
    random.Random(seed).shuffle(order)
    total = sum(ratios)
    n_train = round(len(items) * ratios[0] / total)
    n_val = round(len(items) * ratios[1] / total)
    picks = {
        "train": order[:n_train],
        "val": order[n_train : n_train + n_val],
        "test": order[n_train + n_val :],
    }
    return {kind: [items[i] for i in sorted(indices)] for kind, indices in picks.items()}


# ---------------------------------------------------------------------------
# bundled mini fixture (hand-annotated questions over public-domain facts)


def _fixture_path(name: str):
    return resources.files("fluentqa").joinpath(f"data/mini_sg/{name}")


def mini_sg_instances() -> list[QAInstance]:
    with resources.as_file(_fixture_path("instances.jsonl")) as path:
        return [stgen.instance_from_json(r) for r in read_jsonl(path)]


def mini_sg_annotations() -> list[AnnotationRecord]:
    with resources.as_file(_fixture_path("annotations.jsonl")) as path:
        return [AnnotationRecord.from_json(r) for r in read_jsonl(path)]


def mini_sg_corpus() -> list[str]:
    text = _fixture_path("lm_corpus.txt").read_text(encoding="utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]
