"""N-gram language model with interpolated modified Kneser-Ney smoothing.

Conventions are fixed here because downstream feature values must be
bit-stable:

  * tokens are lowercased for training and scoring;
  * each sentence is padded with (order - 1) ``<s>`` markers and one ``</s>``;
  * the normalized log-probability of a sequence divides by the token count
    plus one (the end marker), and perplexity is ``exp(-normalized)``;
  * the highest order uses raw counts, lower orders use continuation counts
    (number of distinct one-word left extensions);
  * the unigram base distribution is built from interior bigram types only
    (real word on both sides, boundary markers excluded);
  * an order-1 model instead interpolates its discounted unigrams with a
    uniform distribution over the vocabulary, so ``<unk>`` gets real mass;
  * any probability the model cannot derive (unknown words under higher
    orders) is floored at ``PROB_FLOOR``.

After training, the interpolated conditionals are compiled into probability
and backoff tables, which is also exactly what the ARPA file stores; export
followed by import therefore reproduces scores to float precision.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass

__all__ = [
    "BOS",
    "EOS",
    "UNK",
    "PROB_FLOOR",
    "NGramModel",
    "SequenceScore",
    "EmptyCorpus",
    "MalformedArpa",
    "train",
    "sequence_score",
    "lm_baseline_rank",
    "write_arpa",
    "read_arpa",
]

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

PROB_FLOOR = 1e-12
_LOG_FLOOR = math.log(PROB_FLOOR)
_DUMMY = -99.0  # ARPA placeholder for entries that only carry a backoff
_LN10 = math.log(10.0)


class EmptyCorpus(ValueError):
    pass


class MalformedArpa(ValueError):
    pass


@dataclass(frozen=True)
class SequenceScore:
    logprob: float          # natural log of the joint probability
    normalized: float       # logprob / (token count + 1)
    perplexity: float


@dataclass(frozen=True)
class NGramModel:
    order: int
    vocabulary: frozenset[str]
    logprob: dict[tuple[str, ...], float]   # natural log conditionals
    backoff: dict[tuple[str, ...], float]   # natural log backoff weights

    def logp(self, ngram: tuple[str, ...]) -> float:
        """Natural-log conditional probability of ngram[-1] given the rest."""
        ngram = ngram[-self.order:] if len(ngram) > self.order else ngram
        acc = 0.0
        while True:
            hit = self.logprob.get(ngram)
            if hit is not None:
                return acc + hit
            if len(ngram) == 1:
                return _LOG_FLOOR
            acc += self.backoff.get(ngram[:-1], 0.0)
            ngram = ngram[1:]

    def cond_prob(self, word: str, context: tuple[str, ...] = ()) -> float:
        return math.exp(self.logp(tuple(context) + (word,)))


def _sentences(corpus) -> list[list[str]]:
    sents = []
    for sent in corpus:
        toks = sent.split() if isinstance(sent, str) else list(sent)
        toks = [t.lower() for t in toks]
        if toks:
            sents.append(toks)
    return sents


def _discounts(counts, fixed: float | None) -> tuple[float, float, float]:
    """Modified KN discounts (D1, D2, D3+) from count-of-counts."""
    if fixed is not None:
        return (fixed, min(fixed, 2.0), min(fixed, 3.0))
    n = Counter()
    for c in counts.values():
        if c <= 4:
            n[c] += 1
    if n[1] == 0 or n[2] == 0:
        return (0.75, 1.5, 2.25)
    y = n[1] / (n[1] + 2 * n[2])
    d1 = 1.0 - 2.0 * y * n[2] / n[1]
    d2 = 2.0 - 3.0 * y * n[3] / n[2] if n[2] else 1.5
    d3 = 3.0 - 4.0 * y * n[4] / n[3] if n[3] else 2.25
    clamp = lambda v, hi: min(max(v, 1e-4), hi)
    return (clamp(d1, 1.0), clamp(d2, 2.0), clamp(d3, 3.0))


def train(corpus, order: int, discount: float | None = None) -> NGramModel:
    """Estimate an interpolated modified-KN model of the given order.

    ``discount`` overrides the count-of-counts estimate with one fixed value
    applied at every level (used by the hand-checked tests); it must lie in
    (0, 1] so no context loses all of its backoff mass.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if discount is not None and not (0.0 < discount <= 1.0):
        raise ValueError("fixed discount must be in (0, 1]")
    sents = _sentences(corpus)
    if not sents:
        raise EmptyCorpus("training corpus has no non-empty sentences")

    raw: list[Counter] = [Counter() for _ in range(order + 1)]  # raw[k]
    for toks in sents:
        padded = [BOS] * (order - 1) + toks + [EOS]
        for k in range(1, order + 1):
            for i in range(len(padded) - k + 1):
                raw[k][tuple(padded[i : i + k])] += 1

    real_words = sorted({w for toks in sents for w in toks})
    vocabulary = frozenset(real_words) | {BOS, EOS, UNK}
    logprob: dict[tuple[str, ...], float] = {}
    backoff: dict[tuple[str, ...], float] = {}

    def put(key, p):
        if p > 0.0:
            logprob[key] = math.log(p)

    if order == 1:
        counts = raw[1]
        total = sum(counts.values())
        d1, d2, d3 = _discounts(counts, discount)
        dis = lambda c: d1 if c == 1 else d2 if c == 2 else d3
        gamma = sum(dis(c) for c in counts.values()) / total
        vsize = len(counts) + 1  # event types plus <unk>
        for g in sorted(counts):
            put((g[0],), (counts[g] - dis(counts[g])) / total + gamma / vsize)
        put((UNK,), gamma / vsize)
        return NGramModel(order, vocabulary, logprob, backoff)

    # Unigram base: interior continuation types (no boundary on either side).
    uni_cont = Counter()
    for (v, w), _ in raw[2].items():
        if v != BOS and w not in (BOS, EOS):
            uni_cont[w] += 1
    total_cont = sum(uni_cont.values())
    if total_cont > 0:
        for w in sorted(uni_cont):
            put((w,), uni_cont[w] / total_cont)
    elif real_words:
        for w in real_words:
            put((w,), 1.0 / len(real_words))

    model = NGramModel(order, vocabulary, logprob, backoff)
    for k in range(2, order + 1):
        if k == order:
            table = raw[k]
        else:
            table = Counter()
            for g in raw[k + 1]:
                table[g[1:]] += 1  # distinct left extensions
        d1, d2, d3 = _discounts(table, discount)
        dis = lambda c: d1 if c == 1 else d2 if c == 2 else d3
        totals: dict[tuple, int] = defaultdict(int)
        masses: dict[tuple, float] = defaultdict(float)
        for g, c in table.items():
            totals[g[:-1]] += c
            masses[g[:-1]] += dis(c)
        for h in totals:
            backoff[h] = math.log(masses[h] / totals[h])
        for g in sorted(table):
            c = table[g]
            h = g[:-1]
            gamma = masses[h] / totals[h]
            lower = math.exp(model.logp(g[1:]))
            put(g, (c - dis(c)) / totals[h] + gamma * lower)
    return model


def sequence_score(model: NGramModel, tokens) -> SequenceScore:
    """Joint, per-token-normalized log-probability and perplexity.

    Out-of-vocabulary tokens are mapped to the unknown marker; the end
    marker counts as one scored event, so the normalizer is len + 1.
    """
    toks = [t.lower() for t in tokens]
    mapped = [t if t in model.vocabulary else UNK for t in toks]
    context = (BOS,) * (model.order - 1)
    total = 0.0
    for w in mapped + [EOS]:
        total += model.logp(context + (w,))
        context = (context + (w,))[-(model.order - 1):] if model.order > 1 else ()
    normalized = total / (len(toks) + 1)
    return SequenceScore(total, normalized, math.exp(-normalized))


def lm_baseline_rank(model: NGramModel, candidates) -> int:
    """Index of the candidate with the best normalized log-probability.

    Ties go to the shorter response, then lexicographic order.
    """
    cands = [list(c) for c in candidates]
    if not cands:
        raise ValueError("need at least one candidate")
    scores = [sequence_score(model, c).normalized for c in cands]
    return min(
        range(len(cands)),
        key=lambda i: (-scores[i], len(cands[i]), " ".join(cands[i])),
    )


# ---------------------------------------------------------------------------
# ARPA serialization


def write_arpa(model: NGramModel, path):
    entries: dict[int, list] = {}
    for k in range(1, model.order + 1):
        events = {g for g in model.logprob if len(g) == k}
        ctxs = {g for g in model.backoff if len(g) == k}
        keys = events | ctxs
        if k == 1:
            keys |= {(BOS,), (EOS,), (UNK,)} | {(w,) for w in model.vocabulary}
        entries[k] = sorted(keys)
    with open(path, "w", encoding="utf-8") as f:
        f.write("\\data\\\n")
        for k in range(1, model.order + 1):
            f.write(f"ngram {k}={len(entries[k])}\n")
        for k in range(1, model.order + 1):
            f.write(f"\n\\{k}-grams:\n")
            for g in entries[k]:
                lp = model.logprob.get(g)
                lp10 = _DUMMY if lp is None else lp / _LN10
                line = f"{lp10!r}\t{' '.join(g)}"
                if k < model.order and g in model.backoff:
                    line += f"\t{model.backoff[g] / _LN10!r}"
                f.write(line + "\n")
        f.write("\n\\end\\\n")


def read_arpa(path) -> NGramModel:
    with open(path, encoding="utf-8") as f:
        lines = [ln.rstrip("\n") for ln in f]
    it = iter(enumerate(lines, start=1))
    counts: dict[int, int] = {}
    for lineno, line in it:
        if line.strip() == "\\data\\":
            break
    else:
        raise MalformedArpa("missing \\data\\ section")
    for lineno, line in it:
        line = line.strip()
        if not line:
            break
        if not line.startswith("ngram "):
            raise MalformedArpa(f"line {lineno}: expected 'ngram k=n'")
        try:
            k, n = line[len("ngram "):].split("=")
            counts[int(k)] = int(n)
        except ValueError as exc:
            raise MalformedArpa(f"line {lineno}: bad count line {line!r}") from exc
    if not counts or sorted(counts) != list(range(1, max(counts) + 1)):
        raise MalformedArpa("bad or missing n-gram counts")
    order = max(counts)

    logprob: dict[tuple[str, ...], float] = {}
    backoff: dict[tuple[str, ...], float] = {}
    vocabulary: set[str] = set()
    saw_end = False
    expect_k = 0
    seen_in_section = 0
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped == "\\data\\" or stripped.startswith("ngram "):
            continue
        if stripped == "\\end\\":
            saw_end = True
            break
        if stripped.endswith("-grams:") and stripped.startswith("\\"):
            if expect_k and seen_in_section != counts[expect_k]:
                raise MalformedArpa(
                    f"section {expect_k}: expected {counts[expect_k]} entries, got {seen_in_section}"
                )
            try:
                expect_k = int(stripped[1:-len("-grams:")])
            except ValueError as exc:
                raise MalformedArpa(f"line {lineno}: bad section header") from exc
            if expect_k not in counts:
                raise MalformedArpa(f"line {lineno}: section {expect_k} not declared")
            seen_in_section = 0
            continue
        if not expect_k:
            raise MalformedArpa(f"line {lineno}: entry outside any section")
        parts = stripped.split()
        if len(parts) not in (expect_k + 1, expect_k + 2):
            raise MalformedArpa(f"line {lineno}: expected {expect_k}-gram entry")
        try:
            lp10 = float(parts[0])
            bo10 = float(parts[expect_k + 1]) if len(parts) == expect_k + 2 else None
        except ValueError as exc:
            raise MalformedArpa(f"line {lineno}: bad number") from exc
        g = tuple(parts[1 : expect_k + 1])
        if expect_k == 1:
            vocabulary.add(g[0])
        if lp10 > _DUMMY:
            logprob[g] = lp10 * _LN10
        if bo10 is not None:
            backoff[g] = bo10 * _LN10
        seen_in_section += 1
    if not saw_end:
        raise MalformedArpa("missing \\end\\ marker")
    if expect_k and seen_in_section != counts[expect_k]:
        raise MalformedArpa(
            f"section {expect_k}: expected {counts[expect_k]} entries, got {seen_in_section}"
        )
    return NGramModel(order, frozenset(vocabulary | {BOS, EOS, UNK}), logprob, backoff)
