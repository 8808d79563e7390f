import pytest

from fluentqa import treebank
from fluentqa.stgen import (
    DETERMINERS,
    PREPOSITIONS,
    PRONOUNS,
    CandidateResponse,
    QAInstance,
    RuleFileInvalid,
    default_rules,
    find_prep_det_slots,
    generate,
    instance_from_json,
    instance_to_json,
    load_rules,
)


def make_instance(tree_s, answer, qid="q"):
    tree = treebank.parse_ptb(tree_s)
    return QAInstance(qid, tuple(tree.tokens()), tree, tuple(answer.split()))


def texts(output):
    return [c.text() for c in output.candidates]


def test_option_lists_are_fixed():
    assert PRONOUNS == ("he", "she", "it", "they")
    assert PREPOSITIONS == ("in", "on", "at", "of", "for", "from", "to",
                            "by", "with", "about", "during", "as")
    assert DETERMINERS == ("the", "a", "an")


def test_figure_style_question(fig2_instance):
    out = generate(fig2_instance)
    got = {t.lower() for t in texts(out)}
    assert "the netherlands rose up against philip ii in 1568" in got
    assert "they rose up against philip ii in 1568" in got
    # optional PP removal drops "against Philip II"
    assert "they rose up in 1568" in got
    assert not out.fallback and not out.truncated


def test_candidate_count_matches_variant_lattice(fig2_instance):
    out = generate(fig2_instance)
    # 1 bare answer + pp-masks(2) * subjects(1+4) * preps(1+12) * dets(1)
    assert len(out.candidates) == 1 + 2 * 5 * 13 * 1


def test_two_optional_pps_double_the_lattice():
    inst = make_instance(
        "(ROOT (SBARQ (WHADVP (WRB when)) (SQ (VBD did) (NP (NN she)) "
        "(VP (VB move) (PP (TO to) (NP (NN town))) (PP (IN with) (NP (NN him))))) (. ?)))",
        "1900",
    )
    out = generate(inst)
    assert len(out.candidates) == 1 + 4 * 5 * 13 * 1


def test_bare_answer_always_first():
    inst = make_instance(
        "(ROOT (SBARQ (WHNP (WP who)) (SQ (VP (VBD wrote) (NP (NNP Hamlet)))) (. ?)))",
        "Shakespeare",
    )
    out = generate(inst)
    first = out.candidates[0]
    assert first.tokens == ("Shakespeare",)
    assert first.trace == frozenset({"fallback"})


def test_fallback_no_sbarq():
    inst = make_instance("(ROOT (FRAG (NP (NN what)) (PP (IN about) (NP (NNP Indiana))) (. ?)))",
                         "Indiana")
    out = generate(inst)
    assert out.fallback
    assert texts(out) == ["Indiana"]
    assert out.candidates[0].trace == frozenset({"fallback"})


def test_fallback_sq_root():
    inst = make_instance("(ROOT (SQ (VBD did) (NP (PRP she)) (VP (VB win)) (. ?)))", "yes")
    out = generate(inst)
    assert out.fallback and texts(out) == ["yes"]


def test_fallback_no_wh_word():
    inst = make_instance(
        "(ROOT (SBARQ (WHNP (NN name)) (SQ (VBD did) (NP (PRP she)) (VP (VB use))) (. ?)))",
        "Jo",
    )
    out = generate(inst)
    assert out.fallback


def test_tokens_always_equal_tree_leaves(fig2_instance):
    out = generate(fig2_instance)
    for c in out.candidates:
        assert tuple(c.derived_tree.tokens()) == c.tokens


def test_generation_deterministic(fig2_instance):
    a = generate(fig2_instance)
    b = generate(fig2_instance)
    assert [c.tokens for c in a.candidates] == [c.tokens for c in b.candidates]
    assert [sorted(c.trace) for c in a.candidates] == [sorted(c.trace) for c in b.candidates]


def test_cap_truncates_with_flag(fig2_instance):
    full = generate(fig2_instance)
    capped = generate(fig2_instance, cap=20)
    assert len(capped.candidates) == 20
    assert capped.truncated
    assert [c.tokens for c in capped.candidates] == [c.tokens for c in full.candidates[:20]]
    assert not full.truncated
    with pytest.raises(ValueError):
        generate(fig2_instance, cap=0)


def test_traces_carry_variant_tags(fig2_instance):
    out = generate(fig2_instance)
    by_text = {c.text().lower(): c for c in out.candidates}
    gold = by_text["the netherlands rose up against philip ii in 1568"]
    assert "verb-mod" in gold.trace and "prep=in" in gold.trace
    swapped = by_text["they rose up against philip ii in 1568"]
    assert "pronoun=they" in swapped.trace
    removed = by_text["they rose up in 1568"]
    assert "pp-removed" in removed.trace


def test_slots_open_preposition(fig2_instance):
    slots = find_prep_det_slots(fig2_instance.question_tree, fig2_instance.answer)
    assert slots.preposition_open
    assert slots.preposition_from_question is None
    assert not slots.determiner_open  # numeric answer


def test_slots_reuse_question_preposition():
    inst = make_instance(
        "(ROOT (SBARQ (WHPP (IN in) (WHNP (WDT what) (NN year))) "
        "(SQ (VBD did) (NP (NNP Rome)) (VP (VB fall))) (. ?)))",
        "476",
    )
    slots = find_prep_det_slots(inst.question_tree, inst.answer)
    assert not slots.preposition_open
    assert slots.preposition_from_question == "in"
    out = generate(inst)
    assert "Rome fell in 476" in texts(out)
    # no other preposition is tried
    assert "Rome fell on 476" not in texts(out)


def test_slots_closed_for_object_answer_with_determiner():
    inst = make_instance(
        "(ROOT (SBARQ (WHNP (WP what)) (SQ (VBD did) (NP (PRP she)) (VP (VB eat))) (. ?)))",
        "an apple",
    )
    slots = find_prep_det_slots(inst.question_tree, inst.answer)
    assert not slots.preposition_open and not slots.determiner_open
    assert "she ate an apple" in texts(generate(inst))


def test_subject_question_answer_becomes_subject():
    inst = make_instance(
        "(ROOT (SBARQ (WHNP (WP who)) (SQ (VP (VBD wrote) (NP (NNP Hamlet)))) (. ?)))",
        "Shakespeare",
    )
    got = texts(generate(inst))
    assert "Shakespeare wrote Hamlet" in got
    assert "he wrote Hamlet" in got


def test_copula_question():
    inst = make_instance(
        "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (VBZ is) (NP (DT the) (NNP Eiffel) (NNP Tower))) (. ?)))",
        "Paris",
    )
    got = texts(generate(inst))
    assert "the Eiffel Tower is in Paris" in got
    assert "it is in Paris" in got


def test_modal_question_keeps_modal():
    inst = make_instance(
        "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (MD can) (NP (NNS pandas)) (VP (VB survive))) (. ?)))",
        "forests",
    )
    got = texts(generate(inst))
    assert "pandas can survive in forests" in got


def test_present_tense_agreement():
    inst = make_instance(
        "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (VBZ does) (NP (DT the) (NN river)) (VP (VB flow))) (. ?)))",
        "the sea",
    )
    assert "the river flows to the sea" in texts(generate(inst))
    inst = make_instance(
        "(ROOT (SBARQ (WHADVP (WRB where)) (SQ (VBP do) (NP (NNS bears)) (VP (VB sleep))) (. ?)))",
        "caves",
    )
    assert "bears sleep in caves" in texts(generate(inst))


def test_candidate_validation():
    tree = treebank.parse_ptb("(FRAG (XX a))")
    with pytest.raises(ValueError):
        CandidateResponse(("b",), tree, frozenset({"fallback"}))
    with pytest.raises(ValueError):
        CandidateResponse(("a",), tree, frozenset())


def test_instance_validation():
    tree = treebank.parse_ptb("(SBARQ (WHNP (WP who)) (SQ (VP (VBD won))))")
    with pytest.raises(ValueError):
        QAInstance("x", ("who", "lost"), tree, ("me",))


def test_instance_json_round_trip(fig2_instance):
    record = instance_to_json(fig2_instance)
    back = instance_from_json(record)
    assert back == fig2_instance


def test_rule_file_validation(tmp_path):
    bad = tmp_path / "rules.txt"
    bad.write_text("rule x\ncategory nope\npattern NP\nscript delete n\n")
    with pytest.raises(RuleFileInvalid):
        load_rules(bad)
    bad.write_text("rule x\ncategory do\npattern NP <\nscript delete n\n")
    with pytest.raises(RuleFileInvalid):
        load_rules(bad)
    bad.write_text("rule x\ncategory do\npattern NP=n\nscript delete q\n")
    with pytest.raises(RuleFileInvalid):
        load_rules(bad)
    bad.write_text("# nothing\n")
    with pytest.raises(RuleFileInvalid):
        load_rules(bad)


def test_bundled_rules_load():
    rules = default_rules()
    assert len(rules.rules) >= 4
    names = [r.name for r in rules.rules]
    assert len(names) == len(set(names))
