import pytest

from fluentqa import treebank
from fluentqa.datasets import (
    AnnotationRecord,
    UnknownResponse,
    build_labels,
    filter_instances,
    make_splits,
    mini_sg_annotations,
    mini_sg_corpus,
    mini_sg_instances,
    normalize_response,
)
from fluentqa.evalkit import annotator_agreement
from fluentqa.stgen import QAInstance, generate


def make_instance(tree_s, answer, qid="q"):
    tree = treebank.parse_ptb(tree_s)
    return QAInstance(qid, tuple(tree.tokens()), tree, tuple(answer.split()))


WHO_WON = "(ROOT (SBARQ (WHNP (WP who)) (SQ (VP (VBD won) (NP (DT the) (NN race)))) (. ?)))"
NO_CLAUSE = "(ROOT (FRAG (NP (DT the) (NN race)) (. ?)))"


def ann(qid, annotator, response):
    return AnnotationRecord(qid, annotator, response)


def test_filter_answer_length():
    keep = make_instance(WHO_WON, "a b c d e", "keep")
    drop = make_instance(WHO_WON, "a b c d e f", "drop")
    kept, drops = filter_instances([keep, drop])
    assert [i.id for i in kept] == ["keep"]
    assert drops == {"answer-too-long": 1}


def test_filter_parse_failures():
    good = make_instance(WHO_WON, "Ann", "good")
    bad = make_instance(NO_CLAUSE, "Ann", "bad")
    kept, drops = filter_instances([good, bad])
    assert [i.id for i in kept] == ["good"]
    assert drops == {"parse-failure": 1}
    kept, drops = filter_instances([good, bad], allow_fallback=True)
    assert len(kept) == 2 and not drops


def test_filter_keeps_sq_only_trees():
    sq = make_instance("(ROOT (SQ (VBD did) (NP (PRP she)) (VP (VB win)) (. ?)))", "yes", "sq")
    kept, drops = filter_instances([sq])
    assert kept and not drops


def test_drop_reasons_partition():
    instances = [
        make_instance(WHO_WON, "a b c d e f g", "x1"),
        make_instance(NO_CLAUSE, "y", "x2"),
        make_instance(WHO_WON, "z", "x3"),
    ]
    kept, drops = filter_instances(instances)
    assert len(kept) + sum(drops.values()) == 3


def fixture_group(qid="g1"):
    inst = make_instance(WHO_WON, "Ann", qid)
    return inst, generate(inst)


def test_train_labels_need_two_annotators():
    inst, output = fixture_group()
    gold = "Ann won the race"
    anns = [ann(inst.id, "a1", gold), ann(inst.id, "a2", gold), ann(inst.id, "a3", "he won the race")]
    split = build_labels([(inst, output)], anns, "train")
    group = split.groups[0]
    by_text = dict(zip((" ".join(c.tokens) for c in group.candidates), group.labels))
    assert by_text[gold] == 1
    assert by_text["he won the race"] == 0  # single vote
    # everything unannotated is 0
    assert sum(group.labels) == 1


def test_train_drops_questions_with_five_unique_choices():
    inst, output = fixture_group()
    texts = [" ".join(c.tokens) for c in output.candidates]
    unique = texts[1:6]
    anns = [ann(inst.id, f"a{i}", unique[i]) for i in range(5)]
    split = build_labels([(inst, output)], anns, "train")
    assert split.groups == ()
    test_split = build_labels([(inst, output)], anns, "test")
    assert len(test_split.groups) == 1


def test_test_labels_keep_single_votes_except_shortest():
    inst, output = fixture_group()
    shortest = "Ann"  # the bare answer is always the shortest candidate
    other = "Ann won the race"
    anns = [ann(inst.id, "a1", shortest), ann(inst.id, "a2", other)]
    split = build_labels([(inst, output)], anns, "test")
    group = split.groups[0]
    by_text = dict(zip((" ".join(c.tokens) for c in group.candidates), group.labels))
    assert by_text[shortest] == 0   # one vote is not enough for the shortest
    assert by_text[other] == 1      # one vote suffices elsewhere
    anns.append(ann(inst.id, "a3", shortest))
    group = build_labels([(inst, output)], anns, "test").groups[0]
    by_text = dict(zip((" ".join(c.tokens) for c in group.candidates), group.labels))
    assert by_text[shortest] == 1   # two votes qualify


def test_unknown_response_rejected():
    inst, output = fixture_group()
    with pytest.raises(UnknownResponse):
        build_labels([(inst, output)], [ann(inst.id, "a1", "not a candidate")], "test")


def test_annotation_matching_normalizes_case_and_whitespace():
    inst, output = fixture_group()
    anns = [ann(inst.id, "a1", "  ann   WON the race "), ann(inst.id, "a2", "ANN won the race")]
    split = build_labels([(inst, output)], anns, "train")
    group = split.groups[0]
    by_text = dict(zip((" ".join(c.tokens) for c in group.candidates), group.labels))
    assert by_text["Ann won the race"] == 1


def test_labeling_is_deterministic():
    inst, output = fixture_group()
    anns = [ann(inst.id, "a1", "Ann won the race"), ann(inst.id, "a2", "Ann won the race")]
    a = build_labels([(inst, output)], anns, "train")
    b = build_labels([(inst, output)], anns, "train")
    assert a == b


def test_annotations_for_unknown_questions_ignored():
    inst, output = fixture_group()
    anns = [ann(inst.id, "a1", "Ann won the race"), ann(inst.id, "a2", "Ann won the race"),
            ann("other-question", "a1", "whatever")]
    split = build_labels([(inst, output)], anns, "train")
    assert len(split.groups) == 1


def test_normalize_response():
    assert normalize_response("  The  RACE ") == "the race"
    assert normalize_response(("The", "race")) == "the race"


def test_make_splits_proportions_and_determinism():
    items = list(range(30))
    splits = make_splits(items, ratios=(2000, 300, 700), seed=13)
    assert sorted(splits["train"] + splits["val"] + splits["test"]) == items
    assert len(splits["train"]) == 20
    assert len(splits["val"]) == 3
    assert len(splits["test"]) == 7
    again = make_splits(items, ratios=(2000, 300, 700), seed=13)
    assert splits == again
    different = make_splits(items, ratios=(2000, 300, 700), seed=14)
    assert splits != different


def test_split_kind_validation():
    with pytest.raises(ValueError):
        build_labels([], [], "dev")


# ---------------------------------------------------------------------------
# bundled fixture integrity


def test_mini_fixture_loads():
    instances = mini_sg_instances()
    assert len(instances) == 40
    corpus = mini_sg_corpus()
    assert len(corpus) > 50


def test_mini_fixture_annotations_reference_real_candidates():
    instances = mini_sg_instances()
    annotations = mini_sg_annotations()
    kept, drops = filter_instances(instances)
    assert len(kept) == 38 and drops == {"parse-failure": 2}
    pairs = [(inst, generate(inst)) for inst in kept]
    split = build_labels(pairs, annotations, "test")  # raises UnknownResponse on mismatch
    assert len(split.groups) == 38
    assert all(sum(g.labels) >= 1 for g in split.groups)


def test_mini_fixture_agreement_is_high_but_not_perfect():
    annotations = mini_sg_annotations()
    score = annotator_agreement(
        [(a.annotator_id, a.question_id, normalize_response(a.response)) for a in annotations]
    )
    assert 0.5 < score < 1.0
