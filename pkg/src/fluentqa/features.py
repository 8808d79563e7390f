"""Fixed 96-dimensional feature vector for (question, answer, response).

Layout (1-based indices, matching the exported schema sidecar):

    1-3    token lengths of question, answer phrase, response
    4-12   indicators: what, who, whom, whose, when, where, which, why, how
           present among the question tokens
    13     indicator: no / not / none present in the question
    14-21  q 2-gram normalized log-prob, q 2-gram perplexity,
           q 3-gram normalized log-prob, q 3-gram perplexity,
           then the same four for the response
    22-57  parse node counts of the question tree over the label inventory
    58-93  parse node counts of the response tree over the label inventory
    94-96  word overlap precision, recall, and harmonic mean

Overlap is the multiset intersection of lowercased tokens; node counts run
over every tree node including leaves, and labels outside the inventory are
ignored.  Extraction is pure: identical inputs give bit-identical vectors.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .ngram import NGramModel, sequence_score
from .stgen import CandidateResponse, QAInstance
from .treebank import ParseTree

__all__ = [
    "SCHEMA_VERSION",
    "LABEL_INVENTORY",
    "FEATURE_NAMES",
    "INDICATOR_DIMS",
    "N_FEATURES",
    "DimensionMismatch",
    "StandardizationStats",
    "extract",
    "node_counts",
    "overlap_scores",
    "fit_standardization",
    "standardize",
    "feature_schema",
]

SCHEMA_VERSION = 1

# 36 clause, phrase, and part-of-speech labels counted in features 22-93.
LABEL_INVENTORY: tuple[str, ...] = (
    "S", "SBAR", "SBARQ", "SINV", "SQ", "NP", "VP", "PP", "ADJP", "ADVP",
    "WHNP", "WHPP", "WHADVP", "WHADJP", "PRT", "INTJ", "CONJP", "QP",
    "NN", "NNS", "NNP", "NNPS", "PRP", "PRP$", "DT", "IN", "TO", "CD",
    "JJ", "RB", "VB", "VBD", "VBG", "VBN", "VBP", "VBZ",
)

_WH_WORDS = ("what", "who", "whom", "whose", "when", "where", "which", "why", "how")
_NEGATION_WORDS = {"no", "not", "none"}

FEATURE_NAMES: tuple[str, ...] = (
    ("q_len", "a_len", "r_len")
    + tuple(f"q_has_{w}" for w in _WH_WORDS)
    + ("q_has_negation",)
    + ("q_norm_logprob_2g", "q_perplexity_2g", "q_norm_logprob_3g", "q_perplexity_3g",
       "r_norm_logprob_2g", "r_perplexity_2g", "r_norm_logprob_3g", "r_perplexity_3g")
    + tuple(f"q_count_{label}" for label in LABEL_INVENTORY)
    + tuple(f"r_count_{label}" for label in LABEL_INVENTORY)
    + ("overlap_precision", "overlap_recall", "overlap_f1")
)
N_FEATURES = len(FEATURE_NAMES)
assert N_FEATURES == 96

# 0-based indices of the 0/1 indicator dimensions (features 4-13).
INDICATOR_DIMS: tuple[int, ...] = tuple(range(3, 13))


class DimensionMismatch(ValueError):
    pass


def feature_schema() -> dict:
    """index (1-based) -> feature name, exported alongside trained models."""
    return {
        "schema_version": SCHEMA_VERSION,
        "features": {str(i + 1): name for i, name in enumerate(FEATURE_NAMES)},
    }


def node_counts(tree: ParseTree, inventory=LABEL_INVENTORY) -> np.ndarray:
    index = {label: i for i, label in enumerate(inventory)}
    counts = np.zeros(len(inventory))
    stack = [tree]
    while stack:
        node = stack.pop()
        i = index.get(node.label)
        if i is not None:
            counts[i] += 1
        stack.extend(node.children)
    return counts


def overlap_scores(q_tokens, r_tokens) -> tuple[float, float, float]:
    qc = Counter(t.lower() for t in q_tokens)
    rc = Counter(t.lower() for t in r_tokens)
    overlap = sum(min(c, rc[t]) for t, c in qc.items())
    precision = overlap / len(q_tokens) if q_tokens else 0.0
    recall = overlap / len(r_tokens) if r_tokens else 0.0
    if precision + recall == 0.0:
        return precision, recall, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)


def extract(
    instance: QAInstance,
    candidate: CandidateResponse,
    lm2: NGramModel,
    lm3: NGramModel,
    inventory=LABEL_INVENTORY,
) -> np.ndarray:
    """The 96-vector for one candidate response."""
    if lm2.order != 2 or lm3.order != 3:
        raise ValueError("extract needs language models of order 2 and 3")
    q = [t.lower() for t in instance.question]
    values = np.zeros(N_FEATURES)
    values[0] = len(instance.question)
    values[1] = len(instance.answer)
    values[2] = len(candidate.tokens)
    qset = set(q)
    for i, w in enumerate(_WH_WORDS):
        values[3 + i] = 1.0 if w in qset else 0.0
    values[12] = 1.0 if qset & _NEGATION_WORDS else 0.0
    pos = 13
    for toks in (instance.question, candidate.tokens):
        for lm in (lm2, lm3):
            s = sequence_score(lm, toks)
            values[pos] = s.normalized
            values[pos + 1] = s.perplexity
            pos += 2
    values[21:57] = node_counts(instance.question_tree, inventory)
    values[57:93] = node_counts(candidate.derived_tree, inventory)
    values[93:96] = overlap_scores(instance.question, candidate.tokens)
    return values


@dataclass(frozen=True)
class StandardizationStats:
    mean: np.ndarray
    std: np.ndarray  # floored at 1e-8; exactly 1.0 on indicator dims

    def to_json(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_json(cls, record: dict) -> "StandardizationStats":
        return cls(np.asarray(record["mean"], float), np.asarray(record["std"], float))


def fit_standardization(matrix: np.ndarray) -> StandardizationStats:
    """Per-dimension mean/std from training data; indicators left untouched."""
    matrix = np.asarray(matrix, float)
    if matrix.ndim != 2 or matrix.shape[1] != N_FEATURES:
        raise DimensionMismatch(f"expected (n, {N_FEATURES}) matrix, got {matrix.shape}")
    mean = matrix.mean(axis=0)
    std = np.maximum(matrix.std(axis=0), 1e-8)
    for i in INDICATOR_DIMS:
        mean[i] = 0.0
        std[i] = 1.0
    return StandardizationStats(mean, std)


def standardize(vectors: np.ndarray, stats: StandardizationStats) -> np.ndarray:
    vectors = np.asarray(vectors, float)
    if vectors.shape[-1] != stats.mean.shape[0]:
        raise DimensionMismatch(
            f"vector dimension {vectors.shape[-1]} != stats dimension {stats.mean.shape[0]}"
        )
    return (vectors - stats.mean) / stats.std
