import math
import random

import pytest

from fluentqa.ngram import (
    BOS,
    EOS,
    UNK,
    EmptyCorpus,
    MalformedArpa,
    lm_baseline_rank,
    read_arpa,
    sequence_score,
    train,
    write_arpa,
)

TOY = ["a b", "a b", "a c"]

WORDS = ["a", "b", "c", "d", "e", "f", "g"]


def random_corpus(rng, max_sentences=8, max_len=6):
    n = rng.randint(1, max_sentences)
    return [
        " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, max_len)))
        for _ in range(n)
    ]


def test_hand_derived_bigram_probabilities():
    model = train(TOY, 2, discount=0.75)
    assert model.cond_prob("b", ("a",)) == pytest.approx(2 / 3, abs=1e-9)
    assert model.cond_prob("c", ("a",)) == pytest.approx(1 / 3, abs=1e-9)


def test_hand_derived_sequence_score():
    model = train(TOY, 2, discount=0.75)
    score = sequence_score(model, ["a", "b"])
    # p(a|<s>) * p(b|a) * p(</s>|b) = 0.75 * (2/3) * 0.625
    assert math.exp(score.logprob) == pytest.approx(0.3125, abs=1e-9)
    assert score.normalized == pytest.approx(score.logprob / 3, abs=1e-12)
    assert score.perplexity == pytest.approx(math.exp(-score.normalized), abs=1e-12)


def test_conditionals_normalize():
    rng = random.Random(5)
    for _ in range(30):
        corpus = random_corpus(rng)
        for order in (2, 3):
            model = train(corpus, order)
            contexts = {k for k in model.backoff} | {(rng.choice(WORDS),) * (order - 1), ("zz",)}
            for ctx in contexts:
                total = sum(model.cond_prob(w, ctx) for w in model.vocabulary)
                assert total == pytest.approx(1.0, abs=1e-6), (corpus, order, ctx)


def test_unigram_model_sums_to_one_with_unknown():
    model = train(["a"], 1, discount=0.75)
    total = model.cond_prob("a") + model.cond_prob(EOS) + model.cond_prob(UNK)
    assert total == pytest.approx(1.0, abs=1e-12)
    assert model.cond_prob(UNK) > 0


def test_monotonic_in_counts_under_fixed_discount():
    rng = random.Random(11)
    for _ in range(100):
        corpus = random_corpus(rng)
        model = train(corpus, 2, discount=0.75)
        bigrams = [g for g in model.logprob if len(g) == 2 and BOS not in g and EOS not in g]
        if not bigrams:
            continue
        u, v = bigrams[rng.randrange(len(bigrams))]
        bigger = train(corpus + [f"{u} {v}"], 2, discount=0.75)
        assert bigger.cond_prob(v, (u,)) >= model.cond_prob(v, (u,)) - 1e-12


def test_oov_maps_to_unknown():
    model = train(TOY, 2, discount=0.75)
    s1 = sequence_score(model, ["zzz"])
    s2 = sequence_score(model, [UNK])
    assert s1.logprob == s2.logprob


def test_scores_are_case_insensitive():
    model = train(TOY, 2, discount=0.75)
    assert sequence_score(model, ["A", "B"]).logprob == sequence_score(model, ["a", "b"]).logprob


def test_empty_corpus_rejected():
    with pytest.raises(EmptyCorpus):
        train([], 2)
    with pytest.raises(EmptyCorpus):
        train(["", "   "], 2)


def test_lm_baseline_rank_argmax():
    model = train(["a b", "a b", "c d"], 2, discount=0.75)
    candidates = [["c", "d"], ["a", "b"], ["z", "z", "z"]]
    best = lm_baseline_rank(model, candidates)
    scores = [sequence_score(model, c).normalized for c in candidates]
    assert scores[best] == max(scores)


def test_lm_baseline_tie_breaks_lexicographic():
    # symmetric corpus: "a b" and "a c" tie exactly; lexicographic wins
    model = train(TOY + ["a c"], 2, discount=0.75)
    assert lm_baseline_rank(model, [["a", "c"], ["a", "b"]]) == 1


def test_lm_baseline_single_candidate():
    model = train(TOY, 2, discount=0.75)
    assert lm_baseline_rank(model, [["a"]]) == 0


def test_arpa_round_trip_scores(tmp_path):
    rng = random.Random(2)
    corpus = random_corpus(rng, max_sentences=10)
    model = train(corpus, 3)
    path = tmp_path / "model.arpa"
    write_arpa(model, path)
    back = read_arpa(path)
    assert back.order == model.order
    for _ in range(100):
        seq = [rng.choice(WORDS + ["zz"]) for _ in range(rng.randint(1, 6))]
        a = sequence_score(model, seq).logprob
        b = sequence_score(back, seq).logprob
        assert a == pytest.approx(b, abs=1e-9)


def test_arpa_counts_match_sections(tmp_path):
    model = train(TOY, 2, discount=0.75)
    path = tmp_path / "model.arpa"
    write_arpa(model, path)
    lines = path.read_text().splitlines()
    declared = {}
    for line in lines:
        if line.startswith("ngram "):
            k, n = line[len("ngram "):].split("=")
            declared[int(k)] = int(n)
    for k, n in declared.items():
        start = lines.index(f"\\{k}-grams:") + 1
        entries = 0
        for line in lines[start:]:
            if not line.strip() or line.startswith("\\"):
                break
            entries += 1
        assert entries == n


def test_arpa_missing_end_rejected(tmp_path):
    model = train(TOY, 2, discount=0.75)
    path = tmp_path / "model.arpa"
    write_arpa(model, path)
    text = path.read_text().replace("\\end\\", "")
    path.write_text(text)
    with pytest.raises(MalformedArpa):
        read_arpa(path)


def test_arpa_count_mismatch_rejected(tmp_path):
    model = train(TOY, 2, discount=0.75)
    path = tmp_path / "model.arpa"
    write_arpa(model, path)
    text = path.read_text().replace("ngram 1=", "ngram 1=9")
    # 9 prefixing the real count makes it wrong
    path.write_text(text)
    with pytest.raises(MalformedArpa):
        read_arpa(path)


def test_arpa_garbage_rejected(tmp_path):
    path = tmp_path / "bad.arpa"
    path.write_text("not an arpa file\n")
    with pytest.raises(MalformedArpa):
        read_arpa(path)


def test_fixed_discount_validation():
    with pytest.raises(ValueError):
        train(TOY, 2, discount=0.0)
    with pytest.raises(ValueError):
        train(TOY, 2, discount=1.5)


def test_boundary_markers_in_vocabulary():
    model = train(TOY, 2)
    assert {BOS, EOS, UNK} <= set(model.vocabulary)
