"""English verb conjugation for rewriting questions into statements.

Irregular verbs come from a bundled table; everything else follows the
regular orthographic rules (+ed / +s with e, consonant+y, and CVC-doubling
handling).  Unknown verbs are treated as regular, so conjugation is total.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

__all__ = [
    "Tense",
    "Person",
    "Number",
    "VerbForm",
    "AuxClass",
    "UnknownAuxiliary",
    "conjugate",
    "aux_to_target_tense",
    "irregular_verbs",
]

_VOWELS = set("aeiou")


class Tense(enum.Enum):
    PAST = "past"
    PRESENT = "present"
    FUTURE = "future"


class Person(enum.Enum):
    FIRST = "first"
    SECOND = "second"
    THIRD = "third"


class Number(enum.Enum):
    SINGULAR = "singular"
    PLURAL = "plural"


@dataclass(frozen=True)
class VerbForm:
    base: str
    tense: Tense
    person: Person = Person.THIRD
    number: Number = Number.SINGULAR

    def __post_init__(self):
        if not self.base or self.base != self.base.lower():
            raise ValueError(f"verb base must be lowercase and non-empty: {self.base!r}")


class AuxClass(enum.Enum):
    """What an auxiliary verb dictates for the rewritten main verb."""

    PRESENT = "present"      # do, does
    PAST = "past"            # did
    FUTURE = "future"        # will
    KEEP_MODAL = "keep-modal"  # modal retained, main verb stays base
    COPY_AUX = "copy-aux"    # be/have auxiliary carried over unchanged


class UnknownAuxiliary(ValueError):
    pass


_AUX_CLASSES = {
    "do": AuxClass.PRESENT,
    "does": AuxClass.PRESENT,
    "did": AuxClass.PAST,
    "will": AuxClass.FUTURE,
    "would": AuxClass.KEEP_MODAL,
    "can": AuxClass.KEEP_MODAL,
    "could": AuxClass.KEEP_MODAL,
    "must": AuxClass.KEEP_MODAL,
    "may": AuxClass.KEEP_MODAL,
    "might": AuxClass.KEEP_MODAL,
    "shall": AuxClass.KEEP_MODAL,
    "should": AuxClass.KEEP_MODAL,
    "is": AuxClass.COPY_AUX,
    "'s": AuxClass.COPY_AUX,
    "are": AuxClass.COPY_AUX,
    "'re": AuxClass.COPY_AUX,
    "am": AuxClass.COPY_AUX,
    "was": AuxClass.COPY_AUX,
    "were": AuxClass.COPY_AUX,
    "has": AuxClass.COPY_AUX,
    "have": AuxClass.COPY_AUX,
    "had": AuxClass.COPY_AUX,
}


def aux_to_target_tense(aux: str) -> AuxClass:
    """Map an auxiliary verb to the directive for the main verb."""
    try:
        return _AUX_CLASSES[aux.lower()]
    except KeyError:
        raise UnknownAuxiliary(f"unrecognized auxiliary {aux!r}") from None


@lru_cache(maxsize=1)
def irregular_verbs() -> dict[str, tuple[str, str, str]]:
    """lemma -> (past, past participle, third singular present)."""
    table = {}
    text = resources.files("fluentqa").joinpath("data/irregular_verbs.tsv").read_text()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        lemma, past, part, third = line.split("\t")
        table[lemma] = (past, part, third)
    return table


def _is_consonant(ch: str) -> bool:
    return ch.isalpha() and ch not in _VOWELS


def _monosyllabic(word: str) -> bool:
    groups = 0
    prev_vowel = False
    for ch in word:
        vowel = ch in _VOWELS or ch == "y"
        if vowel and not prev_vowel:
            groups += 1
        prev_vowel = vowel
    return groups == 1


def _double_final(word: str) -> bool:
    # CVC-final monosyllables double the last consonant: stop -> stopped.
    if len(word) < 3 or not _monosyllabic(word):
        return False
    a, b, c = word[-3], word[-2], word[-1]
    return _is_consonant(a) and b in _VOWELS and _is_consonant(c) and c not in "wxy"


def _regular_past(base: str) -> str:
    if base.endswith("e"):
        return base + "d"
    if base.endswith("y") and len(base) > 1 and _is_consonant(base[-2]):
        return base[:-1] + "ied"
    if _double_final(base):
        return base + base[-1] + "ed"
    return base + "ed"


def _regular_third(base: str) -> str:
    if base.endswith("y") and len(base) > 1 and _is_consonant(base[-2]):
        return base[:-1] + "ies"
    if base.endswith(("s", "sh", "ch", "x", "z", "o")):
        return base + "es"
    return base + "s"


def _conjugate_be(form: VerbForm) -> str:
    if form.tense is Tense.FUTURE:
        return "will be"
    plural = form.number is Number.PLURAL or form.person is Person.SECOND
    if form.tense is Tense.PAST:
        return "were" if plural else "was"
    if plural:
        return "are"
    return "am" if form.person is Person.FIRST else "is"


def conjugate(form: VerbForm) -> str:
    """Inflected surface form for the requested tense, person, and number."""
    base = form.base
    if base == "be":
        return _conjugate_be(form)
    if form.tense is Tense.FUTURE:
        return f"will {base}"
    irregular = irregular_verbs().get(base)
    if form.tense is Tense.PAST:
        return irregular[0] if irregular else _regular_past(base)
    if form.person is Person.THIRD and form.number is Number.SINGULAR:
        return irregular[2] if irregular else _regular_third(base)
    return base
