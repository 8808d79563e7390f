import random

import pytest

from fluentqa.treebank import (
    EmptyLabel,
    ParseTree,
    TrailingContent,
    UnbalancedBrackets,
    addresses,
    leaves,
    node_at,
    parse_ptb,
    surface,
    to_ptb,
)
from oracles import random_tree


def test_parse_simple():
    tree = parse_ptb("(NP (DT the) (NN dog))")
    assert tree.label == "NP"
    assert [c.label for c in tree.children] == ["DT", "NN"]
    assert tree.children[0].token == "the"
    assert leaves(tree) == [("the", "DT"), ("dog", "NN")]


def test_parse_preserves_root_wrapper():
    tree = parse_ptb("(ROOT (S (NN cat)))")
    assert tree.label == "ROOT"
    assert tree.children[0].label == "S"


def test_whitespace_insensitive():
    a = parse_ptb("(NP  (DT   the)\n\t(NN dog) )")
    b = parse_ptb("(NP (DT the) (NN dog))")
    assert a == b


@pytest.mark.parametrize(
    "text,err",
    [
        ("(S (NP", UnbalancedBrackets),
        ("(S", UnbalancedBrackets),
        ("dog", UnbalancedBrackets),
        ("(NP (DT the) (NN dog)) extra", TrailingContent),
        ("(NP (NN dog)) (NP (NN cat))", TrailingContent),
        ("()", EmptyLabel),
        ("( (NN dog))", EmptyLabel),
        ("(NP)", EmptyLabel),
        ("", EmptyLabel),
    ],
)
def test_parse_errors(text, err):
    with pytest.raises(err):
        parse_ptb(text)


def test_mixed_token_and_subtree_rejected():
    with pytest.raises(Exception):
        parse_ptb("(NP dog (NN cat))")


def test_to_ptb_canonical():
    tree = ParseTree("NP", (ParseTree("DT", (), "the"), ParseTree("NN", (), "dog")))
    assert to_ptb(tree) == "(NP (DT the) (NN dog))"
    assert to_ptb(ParseTree("NN", (), "cat")) == "(NN cat)"


def test_round_trip_random_trees():
    rng = random.Random(7)
    for _ in range(300):
        tree = random_tree(rng)
        assert parse_ptb(to_ptb(tree)) == tree


def test_leaves_match_surface_token_count():
    rng = random.Random(8)
    for _ in range(50):
        tree = random_tree(rng)
        toks = tree.tokens()
        assert len(leaves(tree)) == len(toks)


def test_functional_tags_stripped_on_load():
    tree = parse_ptb("(NP-SBJ-1 (NN dog))")
    assert tree.label == "NP"
    tree = parse_ptb("(NP=2 (NN dog))")
    assert tree.label == "NP"
    # Labels that begin with a dash are escapes, kept verbatim.
    tree = parse_ptb("(NP (-LRB- -LRB-) (NN dog) (-RRB- -RRB-))")
    assert tree.children[0].label == "-LRB-"


def test_invariant_token_iff_leaf():
    with pytest.raises(Exception):
        ParseTree("NP", (ParseTree("NN", (), "x"),), "y")
    with pytest.raises(EmptyLabel):
        ParseTree("NP", (), None)


def test_label_validation():
    with pytest.raises(EmptyLabel):
        ParseTree("", (), "x")
    with pytest.raises(EmptyLabel):
        ParseTree("N P", (), "x")


def test_addresses_and_node_at():
    tree = parse_ptb("(S (NP (DT the) (NN dog)) (VP (VBD ran)))")
    addrs = addresses(tree)
    assert addrs[0] == ()
    assert addrs == [(), (0,), (0, 0), (0, 1), (1,), (1, 0)]
    assert node_at(tree, (1, 0)).token == "ran"
    with pytest.raises(IndexError):
        node_at(tree, (5,))


def test_surface_renders_escapes():
    assert surface(["a", "-LRB-", "b", "-RRB-"]) == "a ( b )"
