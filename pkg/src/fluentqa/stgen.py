"""Over-generate candidate answer responses from a question parse.

Given a wh-question's constituency tree and an extractive answer phrase,
this module rewrites the question clause into statement skeletons and then
enumerates a lattice of surface variants:

  * the main verb is re-tensed according to the question's auxiliary
    (did -> past, does/do -> present, modals kept in place, be/have copied);
  * the subject is kept or swapped with each of a fixed pronoun list;
  * when the question does not supply a preposition or determiner linking
    the answer phrase, every option from fixed lists is tried (plus none);
  * prepositional phrases in the predicate are optionally removed;
  * the bare answer phrase is always emitted first.

Most variants are deliberately wrong; a downstream ranker is expected to
sort them.  Questions whose tree has no usable wh-clause (no SBARQ node, an
inverted yes/no SQ root, no wh-word, or no locatable verb) yield exactly one
candidate: the answer phrase itself.

Answer tokens are spliced in as leaves tagged XX under a fresh NP since no
parser runs over generated text; inserted prepositions and determiners do
get their real IN / DT tags.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from . import morphology, treebank, treeops
from .morphology import AuxClass, Number, Person, Tense, UnknownAuxiliary, VerbForm
from .treebank import ParseTree, TreeAddress, node_at
from .treeops import TreePattern, SurgeryScript

__all__ = [
    "QAInstance",
    "CandidateResponse",
    "GenerationOutput",
    "AnswerSlots",
    "Rule",
    "RuleSet",
    "RuleFileInvalid",
    "load_rules",
    "default_rules",
    "generate",
    "find_prep_det_slots",
    "instance_from_json",
    "instance_to_json",
    "candidates_to_json",
    "PRONOUNS",
    "PREPOSITIONS",
    "DETERMINERS",
]

PRONOUNS = ("he", "she", "it", "they")
PREPOSITIONS = ("in", "on", "at", "of", "for", "from", "to", "by", "with", "about", "during", "as")
DETERMINERS = ("the", "a", "an")

WH_WORDS = {"what", "who", "whom", "whose", "when", "where", "which", "why", "how"}
PUNCT_LABELS = {".", ",", ":", "``", "''", "?", "!", "-NONE-"}
ANSWER_POS = "XX"

_DET_WORDS = {
    "the", "a", "an", "this", "that", "these", "those", "his", "her", "its",
    "their", "my", "your", "our", "some", "any", "no", "each", "every", "both",
}
_PREP_WORDS = set(PREPOSITIONS) | {
    "against", "over", "under", "near", "between", "through", "after",
    "before", "since", "until", "into", "onto", "within", "without", "across",
}

# Auxiliary directives accepted by each rule category.
_CATEGORY_GATES = {
    "do": {AuxClass.PRESENT, AuxClass.PAST},
    "modal": {AuxClass.FUTURE, AuxClass.KEEP_MODAL},
    "copula": {AuxClass.COPY_AUX},
    "none": None,
}


class RuleFileInvalid(ValueError):
    pass


@dataclass(frozen=True)
class QAInstance:
    id: str
    question: tuple[str, ...]
    question_tree: ParseTree
    answer: tuple[str, ...]
    passage_id: str | None = None

    def __post_init__(self):
        if not self.question or not self.answer:
            raise ValueError(f"instance {self.id!r}: question and answer must be non-empty")
        tree_tokens = tuple(self.question_tree.tokens())
        if tree_tokens != tuple(self.question):
            raise ValueError(
                f"instance {self.id!r}: tree leaves {tree_tokens} != question tokens {self.question}"
            )


@dataclass(frozen=True)
class CandidateResponse:
    tokens: tuple[str, ...]
    derived_tree: ParseTree
    trace: frozenset[str]

    def __post_init__(self):
        if tuple(self.derived_tree.tokens()) != tuple(self.tokens):
            raise ValueError("candidate tokens do not match derived tree leaves")
        if not self.trace:
            raise ValueError("candidate trace must be non-empty")

    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class GenerationOutput:
    candidates: tuple[CandidateResponse, ...]
    truncated: bool = False
    fallback: bool = False


@dataclass(frozen=True)
class AnswerSlots:
    preposition_open: bool
    preposition_from_question: str | None
    determiner_open: bool


@dataclass(frozen=True)
class Rule:
    name: str
    category: str
    pattern: TreePattern
    script: SurgeryScript


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]
    version: str = "1"


def load_rules(path=None) -> RuleSet:
    """Load a rules file; with no path, the bundled rule set."""
    if path is None:
        return default_rules()
    with open(path, encoding="utf-8") as f:
        return _parse_rules(f.read())


@lru_cache(maxsize=1)
def default_rules() -> RuleSet:
    text = resources.files("fluentqa").joinpath("data/response_rules.txt").read_text()
    return _parse_rules(text)


def _parse_rules(text: str) -> RuleSet:
    rules: list[Rule] = []
    current: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition(" ")
        value = value.strip()
        if key == "rule":
            if current:
                rules.append(_finish_rule(current))
            current = {"rule": value, "_line": str(lineno)}
        elif key in ("category", "pattern", "script"):
            if not current:
                raise RuleFileInvalid(f"line {lineno}: {key!r} outside of a rule block")
            current[key] = value
        else:
            raise RuleFileInvalid(f"line {lineno}: unknown directive {key!r}")
    if current:
        rules.append(_finish_rule(current))
    if not rules:
        raise RuleFileInvalid("rule file defines no rules")
    return RuleSet(tuple(rules))


def _finish_rule(fields: dict[str, str]) -> Rule:
    name = fields.get("rule", "")
    where = f"rule {name!r} (line {fields.get('_line')})"
    for required in ("category", "pattern", "script"):
        if required not in fields:
            raise RuleFileInvalid(f"{where}: missing {required!r}")
    if fields["category"] not in _CATEGORY_GATES:
        raise RuleFileInvalid(f"{where}: unknown category {fields['category']!r}")
    try:
        pattern = treeops.compile_pattern(fields["pattern"])
        script = treeops.parse_script(fields["script"])
    except (treeops.PatternSyntaxError, treeops.ScriptSyntaxError, treebank.PTBError) as exc:
        raise RuleFileInvalid(f"{where}: {exc}") from exc
    missing = script.captures_referenced() - pattern.captures
    if missing:
        raise RuleFileInvalid(f"{where}: script references unknown captures {sorted(missing)}")
    return Rule(name, fields["category"], pattern, script)


# ---------------------------------------------------------------------------
# slot detection


def _wh_phrase(tree: ParseTree) -> ParseTree | None:
    sbarq = _first_labeled(tree, "SBARQ")
    if sbarq is None:
        return None
    for child in sbarq.children:
        if child.label.startswith("WH"):
            return child
    return None


def _first_labeled(tree: ParseTree, label: str) -> ParseTree | None:
    if tree.label == label:
        return tree
    for child in tree.children:
        found = _first_labeled(child, label)
        if found is not None:
            return found
    return None


def _numeric(token: str) -> bool:
    return token.replace(",", "").replace(".", "").isdigit()


def find_prep_det_slots(question_tree: ParseTree, answer) -> AnswerSlots:
    """Decide whether the answer attachment needs a preposition/determiner.

    The preposition slot is closed when the question already supplies one
    (a WHPP like "in what year"), when the answer phrase starts with a
    preposition, or when the wh-phrase is a bare wh-pronoun (the answer then
    fills an argument position).  The determiner slot is closed when the
    answer already starts with a determiner, a preposition, or a number.
    """
    wh = _wh_phrase(question_tree)
    if wh is None:
        raise ValueError("question tree has no SBARQ wh-clause")
    answer = [t.lower() for t in answer]
    prep_from_question = None
    if wh.label == "WHPP":
        for token, label in wh.leaves():
            if label in ("IN", "TO"):
                prep_from_question = token.lower()
                break
    bare_wh = wh.label == "WHNP" and len(wh.leaves()) == 1
    prep_open = (
        prep_from_question is None
        and not bare_wh
        and answer[0] not in _PREP_WORDS
    )
    det_open = (
        answer[0] not in _DET_WORDS
        and answer[0] not in _PREP_WORDS
        and not _numeric(answer[0])
    )
    return AnswerSlots(prep_open, prep_from_question, det_open)


# ---------------------------------------------------------------------------
# skeleton construction


@dataclass
class _Skeleton:
    base: ParseTree
    vp_addr: TreeAddress
    subj_addr: TreeAddress | None     # None when the answer is the subject
    subject_position: bool
    tags: frozenset[str]


def _strip_punct(tree: ParseTree) -> ParseTree | None:
    if tree.is_leaf:
        return None if tree.label in PUNCT_LABELS else tree
    children = tuple(c for c in (_strip_punct(ch) for ch in tree.children) if c is not None)
    if not children:
        return None
    return ParseTree(tree.label, children, None)


def _leaf_token(tree: ParseTree, addr: TreeAddress) -> str:
    node = node_at(tree, addr)
    if not node.is_leaf:
        raise ValueError(f"expected a leaf at {addr}")
    return node.token


def _subject_agreement(subj: ParseTree) -> tuple[Person, Number]:
    pairs = subj.leaves()
    head_token, head_label = pairs[-1]
    for token, label in reversed(pairs):
        if label.startswith("NN"):
            head_token, head_label = token, label
            break
    lowered = head_token.lower()
    if head_label in ("NNS", "NNPS") or lowered in ("they", "we", "you"):
        number = Number.PLURAL
    else:
        number = Number.SINGULAR
    if lowered in ("i", "we"):
        person = Person.FIRST
    elif lowered == "you":
        person = Person.SECOND
    else:
        person = Person.THIRD
    return person, number


def _find_verb_leaf(tree: ParseTree, root_addr: TreeAddress) -> TreeAddress | None:
    """First VB-tagged leaf under root_addr, depth first."""
    node = node_at(tree, root_addr)
    stack = [(root_addr + (i,), c) for i, c in reversed(list(enumerate(node.children)))]
    while stack:
        addr, n = stack.pop()
        if n.is_leaf:
            if n.label.startswith("VB"):
                return addr
        else:
            stack.extend((addr + (i,), c) for i, c in reversed(list(enumerate(n.children))))
    return None


def _build_skeleton(sbarq: ParseTree, rules: RuleSet) -> _Skeleton | None:
    for rule in rules.rules:
        results = treeops.match(rule.pattern, sbarq)
        if not results:
            continue
        captures = results[0].captures
        gate = _CATEGORY_GATES[rule.category]
        directive = None
        if gate is not None:
            try:
                directive = morphology.aux_to_target_tense(_leaf_token(sbarq, captures["aux"]))
            except (UnknownAuxiliary, ValueError):
                continue
            if directive not in gate:
                continue
        skeleton = _assemble(sbarq, rule, captures, directive)
        if skeleton is not None:
            return skeleton
    return None


def _assemble(sbarq, rule, captures, directive) -> _Skeleton | None:
    tags = {f"rule={rule.name}"}
    agreement = None
    if rule.category == "do":
        agreement = _subject_agreement(node_at(sbarq, captures["subj"]))
    base, survivors = treeops.apply_surgery_traced(sbarq, rule.pattern, rule.script)
    subj_addr = survivors.get("subj")
    vp_addr = survivors.get("vp")

    if rule.category == "do":
        verb_addr = None if vp_addr is None else _find_verb_leaf(base, vp_addr)
        if verb_addr is None:
            return None
        tense = Tense.PAST if directive is AuxClass.PAST else Tense.PRESENT
        person, number = agreement
        third_sg = person is Person.THIRD and number is Number.SINGULAR
        if tense is Tense.PAST:
            label = "VBD"
        else:
            label = "VBZ" if third_sg else "VBP"
        verb = node_at(base, verb_addr)
        surface = morphology.conjugate(VerbForm(verb.token.lower(), tense, person, number))
        base = treeops.replace_at(base, verb_addr, ParseTree(label, (), surface))
        tags.add("verb-mod")
    elif rule.category == "modal":
        tags.add("verb-mod")
    elif rule.category == "copula":
        tags.add("aux-copied")
        if vp_addr is None:
            # No verb phrase in the clause: build one around the auxiliary.
            aux_addr = survivors.get("aux")
            if aux_addr is None or subj_addr is None:
                return None
            if len(aux_addr) != 1 or len(subj_addr) != 1:
                return None
            subj = node_at(base, subj_addr)
            keep = [c for i, c in enumerate(base.children) if (i,) not in (aux_addr, subj_addr)]
            vp = ParseTree("VP", (node_at(base, aux_addr), *keep))
            base = ParseTree("S", (subj, vp))
            subj_addr, vp_addr = (0,), (1,)
    else:  # subject-wh
        if vp_addr is None or _find_verb_leaf(base, vp_addr) is None:
            return None
        subj_addr = None

    if vp_addr is None:
        return None
    return _Skeleton(
        base=base,
        vp_addr=vp_addr,
        subj_addr=subj_addr,
        subject_position=rule.category == "none",
        tags=frozenset(tags),
    )


# ---------------------------------------------------------------------------
# variant enumeration


def _answer_np(answer, det: str | None) -> ParseTree:
    leaves = tuple(ParseTree(ANSWER_POS, (), tok) for tok in answer)
    if det is not None:
        leaves = (ParseTree("DT", (), det),) + leaves
    return ParseTree("NP", leaves)


def _attachment(answer, prep: str | None, det: str | None) -> ParseTree:
    np = _answer_np(answer, det)
    if prep is None:
        return np
    return ParseTree("PP", (ParseTree("IN", (), prep), np))


def _pronoun_np(pronoun: str) -> ParseTree:
    return ParseTree("NP", (ParseTree("PRP", (), pronoun),))


def _maximal_pps(tree: ParseTree, root: TreeAddress) -> list[TreeAddress]:
    """Addresses of PP nodes under root not contained in another PP."""
    found: list[TreeAddress] = []

    def walk(addr, node):
        for i, child in enumerate(node.children):
            caddr = addr + (i,)
            if child.label == "PP":
                found.append(caddr)
            else:
                walk(caddr, child)

    walk(root, node_at(tree, root))
    return found


def _answer_only(answer, tags=("fallback",)) -> CandidateResponse:
    tree = ParseTree("FRAG", tuple(ParseTree(ANSWER_POS, (), t) for t in answer))
    return CandidateResponse(tuple(answer), tree, frozenset(tags))


def generate(instance: QAInstance, rules: RuleSet | None = None, cap: int = 10_000) -> GenerationOutput:
    """Enumerate candidate responses for one question/answer pair.

    Candidates come out in a fixed order: the bare answer phrase first, then
    the variant lattice (prepositional-phrase removal mask, outermost; then
    subject choice; then preposition; then determiner).  At most ``cap``
    candidates are produced; hitting the cap sets the truncation flag.
    """
    if cap < 1:
        raise ValueError("cap must be a positive integer")
    if rules is None:
        rules = default_rules()

    answer = tuple(instance.answer)
    fallback = GenerationOutput((_answer_only(answer),), truncated=False, fallback=True)

    top = instance.question_tree
    if top.label == "ROOT" and len(top.children) == 1:
        top = top.children[0]
    if top.label == "SQ":
        return fallback
    if not (set(t.lower() for t in instance.question) & WH_WORDS):
        return fallback
    sbarq = _first_labeled(instance.question_tree, "SBARQ")
    if sbarq is None:
        return fallback
    sbarq = _strip_punct(sbarq)
    if sbarq is None:
        return fallback
    skeleton = _build_skeleton(sbarq, rules)
    if skeleton is None:
        return fallback

    slots = find_prep_det_slots(instance.question_tree, answer)
    if skeleton.subject_position or slots.preposition_from_question is not None:
        prep_options = [slots.preposition_from_question]
    elif slots.preposition_open:
        prep_options = [None, *PREPOSITIONS]
    else:
        prep_options = [None]
    det_options = [None, *DETERMINERS] if slots.determiner_open else [None]

    pps = _maximal_pps(skeleton.base, skeleton.vp_addr)
    if skeleton.subject_position:
        variants_per_mask = len(det_options) + len(PRONOUNS)
    else:
        variants_per_mask = (1 + len(PRONOUNS)) * len(prep_options) * len(det_options)
    expected_total = 1 + 2 ** len(pps) * variants_per_mask

    candidates: list[CandidateResponse] = [_answer_only(answer)]

    def emit(candidate: CandidateResponse) -> bool:
        candidates.append(candidate)
        return len(candidates) >= cap

    done = False
    for mask in range(2 ** len(pps)):
        if done:
            break
        masked = skeleton.base
        removed = [pps[i] for i in range(len(pps)) if mask & (1 << i)]
        for addr in sorted(removed, reverse=True):
            masked = treeops.delete_at(masked, addr)
        mask_tags = {"pp-removed"} if removed else set()
        if skeleton.subject_position:
            subject_options = [(_answer_np(answer, det), {f"det={det}"} if det else set())
                               for det in det_options]
            subject_options += [(_pronoun_np(p), {f"pronoun={p}"}) for p in PRONOUNS]
            for subj_np, subj_tags in subject_options:
                tree = treeops.insert_child_at(masked, (), 0, subj_np)
                tags = skeleton.tags | mask_tags | subj_tags
                if emit(CandidateResponse(tuple(tree.tokens()), tree, frozenset(tags))):
                    done = True
                    break
        else:
            for subj_opt in (None, *PRONOUNS):
                if done:
                    break
                if subj_opt is None:
                    subj_tree, subj_tags = masked, set()
                else:
                    subj_tree = treeops.replace_at(masked, skeleton.subj_addr, _pronoun_np(subj_opt))
                    subj_tags = {f"pronoun={subj_opt}"}
                for prep, det in itertools.product(prep_options, det_options):
                    vp = node_at(subj_tree, skeleton.vp_addr)
                    tree = treeops.insert_child_at(
                        subj_tree, skeleton.vp_addr, len(vp.children), _attachment(answer, prep, det)
                    )
                    tags = skeleton.tags | mask_tags | subj_tags
                    if prep is not None and slots.preposition_from_question is None:
                        tags = tags | {f"prep={prep}"}
                    if det is not None:
                        tags = tags | {f"det={det}"}
                    if emit(CandidateResponse(tuple(tree.tokens()), tree, frozenset(tags))):
                        done = True
                        break
    truncated = len(candidates) < expected_total
    return GenerationOutput(tuple(candidates), truncated=truncated, fallback=False)


# ---------------------------------------------------------------------------
# JSONL record conversion


def instance_from_json(record: dict) -> QAInstance:
    tree = treebank.parse_ptb(record["question_tree"])
    return QAInstance(
        id=str(record["id"]),
        question=tuple(record["question"].split()),
        question_tree=tree,
        answer=tuple(record["answer"].split()),
        passage_id=record.get("passage_id"),
    )


def instance_to_json(instance: QAInstance) -> dict:
    record = {
        "id": instance.id,
        "question": " ".join(instance.question),
        "question_tree": treebank.to_ptb(instance.question_tree),
        "answer": " ".join(instance.answer),
    }
    if instance.passage_id is not None:
        record["passage_id"] = instance.passage_id
    return record


def candidates_to_json(instance: QAInstance, output: GenerationOutput) -> dict:
    return {
        "id": instance.id,
        "fallback": output.fallback,
        "truncated": output.truncated,
        "candidates": [
            {
                "tokens": list(c.tokens),
                "tree": treebank.to_ptb(c.derived_tree),
                "trace": sorted(c.trace),
            }
            for c in output.candidates
        ],
    }
