from collections import Counter

import numpy as np
import pytest

from fluentqa import treebank
from fluentqa.features import (
    FEATURE_NAMES,
    INDICATOR_DIMS,
    LABEL_INVENTORY,
    N_FEATURES,
    DimensionMismatch,
    extract,
    feature_schema,
    fit_standardization,
    node_counts,
    overlap_scores,
    standardize,
)
from fluentqa.ngram import sequence_score
from fluentqa.stgen import CandidateResponse, QAInstance


def make_pair(q_tree, answer, r_tree):
    qt = treebank.parse_ptb(q_tree)
    rt = treebank.parse_ptb(r_tree)
    inst = QAInstance("q", tuple(qt.tokens()), qt, tuple(answer.split()))
    cand = CandidateResponse(tuple(rt.tokens()), rt, frozenset({"rule=test"}))
    return inst, cand


def test_schema_has_96_unique_names():
    assert N_FEATURES == 96
    assert len(FEATURE_NAMES) == 96
    assert len(set(FEATURE_NAMES)) == 96
    assert len(LABEL_INVENTORY) == 36
    schema = feature_schema()
    assert schema["features"]["1"] == "q_len"
    assert schema["features"]["96"] == "overlap_f1"


def test_overlap_example(lm2, lm3):
    inst, cand = make_pair(
        "(SBARQ (WHNP (WP who)) (SQ (VP (VBD wrote) (NP (NN hamlet)))) (. ?))",
        "shakespeare",
        "(S (NP (XX shakespeare)) (VP (VBD wrote) (NP (NN hamlet))))",
    )
    # question tokens: who wrote hamlet ? -> drop the ? to match the example
    inst = QAInstance("q", ("who", "wrote", "hamlet"),
                      treebank.parse_ptb("(SBARQ (WHNP (WP who)) (SQ (VP (VBD wrote) (NP (NN hamlet)))))"),
                      ("shakespeare",))
    v = extract(inst, cand, lm2, lm3)
    assert v[93] == pytest.approx(2 / 3)
    assert v[94] == pytest.approx(2 / 3)
    assert v[95] == pytest.approx(2 / 3)


def test_overlap_full_and_empty():
    p, r, f = overlap_scores(("a", "B"), ("A", "b"))
    assert (p, r, f) == (1.0, 1.0, 1.0)
    p, r, f = overlap_scores(("a",), ("b",))
    assert (p, r, f) == (0.0, 0.0, 0.0)


def test_overlap_is_multiset():
    p, r, f = overlap_scores(("a", "a", "b"), ("a", "c", "c"))
    assert p == pytest.approx(1 / 3)
    assert r == pytest.approx(1 / 3)


def test_wh_indicators(lm2, lm3):
    inst, cand = make_pair(
        "(SBARQ (WHNP (WP what)) (SQ (VBD did) (NP (PRP she)) (VP (VB eat))) (. ?))",
        "apples",
        "(S (NP (PRP she)) (VP (VBD ate) (NP (XX apples))))",
    )
    v = extract(inst, cand, lm2, lm3)
    assert v[3] == 1.0                     # what
    assert v[4:12].tolist() == [0.0] * 8   # all other wh words absent
    assert v[12] == 0.0                    # no negation


def test_negation_indicator(lm2, lm3):
    inst, cand = make_pair(
        "(SBARQ (WHNP (WP who)) (SQ (VBD did) (RB not) (NP (NN x)) (VP (VB go))) (. ?))",
        "y",
        "(FRAG (XX y))",
    )
    assert extract(inst, cand, lm2, lm3)[12] == 1.0


def test_length_features(lm2, lm3):
    inst, cand = make_pair(
        "(SBARQ (WHNP (WP who)) (SQ (VP (VBD won))) (. ?))",
        "the big team",
        "(S (NP (XX the) (XX big) (XX team)) (VP (VBD won)))",
    )
    v = extract(inst, cand, lm2, lm3)
    assert v[0] == 3.0  # who won ?
    assert v[1] == 3.0
    assert v[2] == 4.0


def test_lm_features_match_sequence_score(lm2, lm3):
    inst, cand = make_pair(
        "(SBARQ (WHNP (WP who)) (SQ (VP (VBD won))) (. ?))",
        "x",
        "(FRAG (XX x))",
    )
    v = extract(inst, cand, lm2, lm3)
    q = sequence_score(lm2, inst.question)
    assert v[13] == pytest.approx(q.normalized)
    assert v[14] == pytest.approx(q.perplexity)
    r3 = sequence_score(lm3, cand.tokens)
    assert v[19] == pytest.approx(r3.normalized)
    assert v[20] == pytest.approx(r3.perplexity)


def test_node_counts_against_brute_force_walk(lm2, lm3, fig2_instance):
    tree = fig2_instance.question_tree
    counts = node_counts(tree)
    brute = Counter(treebank.node_at(tree, a).label for a in treebank.addresses(tree))
    for i, label in enumerate(LABEL_INVENTORY):
        assert counts[i] == brute.get(label, 0)
    assert counts.sum() <= len(treebank.addresses(tree))


def test_extract_is_deterministic(lm2, lm3, fig2_instance):
    from fluentqa.stgen import generate

    cand = generate(fig2_instance).candidates[2]
    a = extract(fig2_instance, cand, lm2, lm3)
    b = extract(fig2_instance, cand, lm2, lm3)
    assert a.tobytes() == b.tobytes()


def test_extract_requires_matching_orders(lm2, lm3, fig2_instance):
    from fluentqa.stgen import generate

    cand = generate(fig2_instance).candidates[0]
    with pytest.raises(ValueError):
        extract(fig2_instance, cand, lm3, lm3)


def test_standardize_zeroes_constant_dims():
    rng = np.random.default_rng(0)
    matrix = rng.normal(size=(40, N_FEATURES))
    matrix[:, 20] = 7.0  # constant column
    stats = fit_standardization(matrix)
    out = standardize(matrix, stats)
    assert np.allclose(out[:, 20], 0.0)
    non_indicator = [i for i in range(N_FEATURES) if i not in INDICATOR_DIMS]
    assert np.allclose(out[:, non_indicator].mean(axis=0), 0.0, atol=1e-9)


def test_standardize_leaves_indicators_untouched():
    rng = np.random.default_rng(1)
    matrix = rng.normal(size=(30, N_FEATURES))
    matrix[:, list(INDICATOR_DIMS)] = rng.integers(0, 2, size=(30, len(INDICATOR_DIMS)))
    stats = fit_standardization(matrix)
    out = standardize(matrix, stats)
    assert np.array_equal(out[:, list(INDICATOR_DIMS)], matrix[:, list(INDICATOR_DIMS)])


def test_standardize_saved_stats_deterministic():
    rng = np.random.default_rng(2)
    train = rng.normal(size=(25, N_FEATURES))
    new = rng.normal(size=(10, N_FEATURES))
    stats = fit_standardization(train)
    assert standardize(new, stats).tobytes() == standardize(new, stats).tobytes()


def test_dimension_mismatch():
    stats = fit_standardization(np.zeros((3, N_FEATURES)))
    with pytest.raises(DimensionMismatch):
        standardize(np.zeros((2, 7)), stats)
    with pytest.raises(DimensionMismatch):
        fit_standardization(np.zeros((3, 7)))
