"""fluentqa: over-generate and rank fluent answer responses for questions.

The pipeline turns a factoid question's constituency parse plus an
extractive answer phrase into a large set of candidate full-sentence
responses, scores them with trainable linear rankers (or baselines), and
emits augmented question/answer/response datasets.
"""

__version__ = "0.1.0"

from .treebank import ParseTree, parse_ptb, to_ptb, leaves
from .treeops import compile_pattern, match, apply_surgery, parse_script
from .morphology import VerbForm, conjugate, aux_to_target_tense
from .stgen import QAInstance, CandidateResponse, generate, find_prep_det_slots
from .ngram import NGramModel, train as train_lm, sequence_score, lm_baseline_rank
from .features import extract as extract_features, LABEL_INVENTORY, FEATURE_NAMES
from .ranker import (
    RankerModel,
    TrainConfig,
    train_logistic,
    train_softmax,
    rank,
    shortest_response_baseline,
)
from .evalkit import p_at_1, max_f1, pr_auc, annotator_agreement
from .datasets import filter_instances, build_labels
from .augment import augment

__all__ = [
    "__version__",
    "ParseTree", "parse_ptb", "to_ptb", "leaves",
    "compile_pattern", "match", "apply_surgery", "parse_script",
    "VerbForm", "conjugate", "aux_to_target_tense",
    "QAInstance", "CandidateResponse", "generate", "find_prep_det_slots",
    "NGramModel", "train_lm", "sequence_score", "lm_baseline_rank",
    "extract_features", "LABEL_INVENTORY", "FEATURE_NAMES",
    "RankerModel", "TrainConfig", "train_logistic", "train_softmax", "rank",
    "shortest_response_baseline",
    "p_at_1", "max_f1", "pr_auc", "annotator_agreement",
    "filter_instances", "build_labels",
    "augment",
]
