"""Rule-based morphological analysis of Esperanto words.

Analysis is ending-driven: ``-n`` (accusative) and ``-j`` (plural) are
stripped, the final vowel/verb ending gives the part of speech, and known
affixes are peeled off the remaining stem. Closed-class words (pronouns,
prepositions, table words, ...) are looked up first.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Literal, NamedTuple, Optional

from .text import VOWELS, Token

POS = Literal[
    "Noun", "Adjective", "Adverb", "Verb", "Pronoun", "Preposition", "Conjunction",
    "Determiner", "Number", "Punct", "Table", "Other",
]
Case = Literal["Nominative", "Accusative", "None"]
GramNumber = Literal["Singular", "Plural", "None"]
VerbForm = Literal[
    "Infinitive", "Present", "Past", "Future", "Conditional", "Volitive", "Participle", "None",
]

FINITE_FORMS = frozenset({"Present", "Past", "Future", "Conditional", "Volitive"})

TABLE_PREFIXES = ("i", "ki", "ti", "ĉi", "neni")
TABLE_ENDINGS = ("a", "al", "am", "e", "el", "es", "o", "om", "u")
TABLE_PLURAL_ENDINGS = frozenset({"a", "u"})
TABLE_ACCUSATIVE_ENDINGS = frozenset({"a", "e", "o", "u"})

_VERB_ENDINGS = {
    "i": "Infinitive", "as": "Present", "is": "Past", "os": "Future",
    "us": "Conditional", "u": "Volitive",
}
_ENDING_POS = {"o": "Noun", "a": "Adjective", "e": "Adverb", **{e: "Verb" for e in _VERB_ENDINGS}}
# longest first so "-as" is tried before "-a"
_ENDINGS = tuple(sorted(_ENDING_POS, key=len, reverse=True))

PARTICIPLES = {
    "ant": ("active", "present"), "int": ("active", "past"), "ont": ("active", "future"),
    "at": ("passive", "present"), "it": ("passive", "past"), "ot": ("passive", "future"),
}


class TableWord(NamedTuple):
    prefix: str
    ending: str
    plural: bool
    accusative: bool

    @property
    def base(self) -> str:
        return self.prefix + self.ending


@dataclass(frozen=True)
class MorphAnalysis:
    root: str
    pos: str
    case: str = "None"
    number: str = "None"
    verb_form: str = "None"
    participle: Optional[tuple[str, str]] = None
    prefixes: tuple[str, ...] = ()
    suffixes: tuple[str, ...] = ()
    table: Optional[TableWord] = None
    ending: str = ""
    known: bool = False  # root found in the lexicon or root list
    closed_class: bool = False

    def __post_init__(self) -> None:
        if self.case == "Accusative":
            assert self.pos in ("Noun", "Adjective", "Pronoun", "Adverb", "Table"), self
            assert self.table is None or self.table.ending in TABLE_ACCUSATIVE_ENDINGS, self
        if self.number == "Plural":
            assert self.pos in ("Noun", "Adjective", "Pronoun", "Table"), self
            assert self.table is None or self.table.ending in TABLE_PLURAL_ENDINGS, self
        assert (self.verb_form != "None") == (self.pos == "Verb"), self

    @property
    def stem(self) -> str:
        return "".join(self.prefixes) + self.root + "".join(self.suffixes)

    def synthesize(self) -> str:
        """Rebuild the surface form of an ending-driven analysis."""
        out = self.stem + self.ending
        if self.number == "Plural":
            out += "j"
        if self.case == "Accusative":
            out += "n"
        return out


def _read_list(name: str) -> list[str]:
    text = resources.files("eogec").joinpath("data").joinpath(name).read_text(encoding="utf-8")
    return _parse_list(text)


def _parse_list(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def read_word_list(path: str | Path) -> frozenset[str]:
    """Read a word-per-line list (UTF-8, ``#`` comments), lower-cased."""
    return frozenset(w.lower() for w in _parse_list(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True, eq=False)
class Lexicon:
    pronouns: frozenset[str]
    prepositions: frozenset[str]
    conjunctions: frozenset[str]
    determiners: frozenset[str]
    particles: frozenset[str]
    numerals: frozenset[str]
    interjections: frozenset[str]
    stopwords: frozenset[str]
    prefixes: tuple[str, ...]
    suffixes: tuple[str, ...]
    roots: frozenset[str] = field(repr=False)

    @classmethod
    def load(
        cls,
        stopwords: str | Path | None = None,
        roots: str | Path | None = None,
    ) -> "Lexicon":
        prefixes, suffixes = [], []
        for entry in _read_list("affixes.txt"):
            kind, form = entry.split()
            (prefixes if kind == "prefix" else suffixes).append(form)
        root_set = frozenset(_read_list("roots.txt")) if roots is None else read_word_list(roots)
        stop = frozenset(_read_list("stopwords_eo.txt")) if stopwords is None else read_word_list(stopwords)
        return cls(
            pronouns=frozenset(_read_list("pronouns.txt")),
            prepositions=frozenset(_read_list("prepositions.txt")),
            conjunctions=frozenset(_read_list("conjunctions.txt")),
            determiners=frozenset(_read_list("determiners.txt")),
            particles=frozenset(_read_list("particles.txt")),
            numerals=frozenset(_read_list("numerals.txt")),
            interjections=frozenset(_read_list("interjections.txt")),
            stopwords=stop,
            prefixes=tuple(prefixes),
            suffixes=tuple(suffixes),
            roots=root_set | frozenset(prefixes) | frozenset(suffixes),
        )

    def with_stopwords(self, stopwords: Iterable[str]) -> "Lexicon":
        return Lexicon(**{**self.__dict__, "stopwords": frozenset(stopwords)})

    def pronoun_form(self, norm: str) -> Optional[tuple[str, bool, bool, bool]]:
        """Split ``mian`` into (mi, possessive, plural, accusative)."""
        m = re.fullmatch(r"(.+?)(a?)(j?)(n?)", norm)
        if not m:
            return None
        base, poss, plural, acc = m.groups()
        if base not in self.pronouns or (plural and not poss):
            return None
        return base, bool(poss), bool(plural), bool(acc)

    def is_closed_class(self, norm: str) -> bool:
        return (
            norm in self.prepositions
            or norm in self.conjunctions
            or norm in self.determiners
            or norm in self.particles
            or norm in self.numerals
            or norm in self.interjections
            or self.pronoun_form(norm) is not None
            or analyze_table_word(norm) is not None
        )


@functools.lru_cache(maxsize=1)
def default_lexicon() -> Lexicon:
    return Lexicon.load()


def analyze_table_word(norm: str) -> Optional[TableWord]:
    """Decompose a correlative ("table word") such as ``ĉiujn``."""
    for prefix in TABLE_PREFIXES:
        if not norm.startswith(prefix):
            continue
        m = re.fullmatch(r"(al|am|el|es|om|a|e|o|u)(j?)(n?)", norm[len(prefix):])
        if not m:
            continue
        ending, plural, acc = m.group(1), bool(m.group(2)), bool(m.group(3))
        if plural and ending not in TABLE_PLURAL_ENDINGS:
            return None
        if acc and ending not in TABLE_ACCUSATIVE_ENDINGS:
            return None
        return TableWord(prefix, ending, plural, acc)
    return None


def enumerate_table_words() -> list[str]:
    return [p + e for p in TABLE_PREFIXES for e in TABLE_ENDINGS]


def _closed_class(norm: str, lex: Lexicon) -> list[MorphAnalysis]:
    out = []
    table = analyze_table_word(norm)
    if table is not None:
        out.append(MorphAnalysis(
            root=table.base, pos="Table",
            case="Accusative" if table.accusative else "Nominative",
            number="Plural" if table.plural else "Singular",
            table=table, known=True, closed_class=True,
        ))
    pron = lex.pronoun_form(norm)
    if pron is not None:
        base, poss, plural, acc = pron
        out.append(MorphAnalysis(
            root=base, pos="Pronoun",
            case="Accusative" if acc else "Nominative",
            number=("Plural" if plural else "Singular") if poss else "None",
            ending="a" if poss else "", known=True, closed_class=True,
        ))
    simple = (
        (lex.determiners, "Determiner"), (lex.prepositions, "Preposition"),
        (lex.conjunctions, "Conjunction"), (lex.particles, "Adverb"),
        (lex.numerals, "Number"), (lex.interjections, "Other"),
    )
    for words, pos in simple:
        if norm in words:
            root = "la" if norm == "l'" else norm
            out.append(MorphAnalysis(root=root, pos=pos, known=True, closed_class=True))
    return out


def _root_ok(root: str) -> bool:
    return len(root) >= 2 and any(ch in VOWELS for ch in root)


def segment(stem: str, lex: Lexicon) -> tuple[tuple[str, ...], str, tuple[str, ...], bool]:
    """Peel known prefixes and suffixes off ``stem``.

    Segmentations whose root is in the root list win; among those, fewer
    affixes and then a longer root are preferred. If no segmentation yields a
    known root, only a trailing participle suffix is peeled.
    """
    best = None
    for prefixes, rest in _prefix_splits(stem, lex.prefixes, depth=2):
        for root, suffixes in _suffix_splits(rest, lex.suffixes, depth=3):
            if root not in lex.roots:
                continue
            key = (len(prefixes) + len(suffixes), -len(root))
            if best is None or key < best[0]:
                best = (key, (tuple(prefixes), root, tuple(suffixes), True))
    if best is not None:
        return best[1]
    for part in PARTICIPLES:
        if stem.endswith(part) and len(stem) - len(part) >= 3 and _root_ok(stem[: -len(part)]):
            return (), stem[: -len(part)], (part,), False
    return (), stem, (), False


def _prefix_splits(stem: str, prefixes: tuple[str, ...], depth: int):
    yield [], stem
    if depth == 0:
        return
    for p in prefixes:
        if stem.startswith(p) and len(stem) > len(p):
            for more, rest in _prefix_splits(stem[len(p):], prefixes, depth - 1):
                yield [p] + more, rest


def _suffix_splits(stem: str, suffixes: tuple[str, ...], depth: int):
    yield stem, []
    if depth == 0:
        return
    for s in suffixes:
        if stem.endswith(s) and len(stem) > len(s):
            for root, more in _suffix_splits(stem[: -len(s)], suffixes, depth - 1):
                yield root, more + [s]


def _ending_analysis(norm: str, lex: Lexicon) -> Optional[MorphAnalysis]:
    if norm.endswith("'") and len(norm) > 1:
        stem, ending, plural, acc = norm[:-1], "'", False, False
        pos = "Noun"
    else:
        s = norm
        acc = s.endswith("n")
        if acc:
            s = s[:-1]
        plural = s.endswith("j")
        if plural:
            s = s[:-1]
        for ending in _ENDINGS:
            if s.endswith(ending):
                break
        else:
            return None
        stem = s[: -len(ending)]
        pos = _ENDING_POS[ending]
        if plural and ending not in ("o", "a"):
            return None
        if acc and ending not in ("o", "a", "e"):
            return None
    if not _root_ok(stem):
        return None
    prefixes, root, suffixes, known = segment(stem, lex)
    participle = PARTICIPLES.get(suffixes[-1]) if suffixes else None
    verb_form = _VERB_ENDINGS[ending] if pos == "Verb" else "None"
    if pos in ("Noun", "Adjective"):
        number = "Plural" if plural else "Singular"
    else:
        number = "None"
    case = "None" if pos == "Verb" else ("Accusative" if acc else "Nominative")
    return MorphAnalysis(
        root=root, pos=pos, case=case, number=number, verb_form=verb_form,
        participle=participle, prefixes=prefixes, suffixes=suffixes,
        ending=ending, known=known,
    )


def analyze(token: Token, lexicon: Optional[Lexicon] = None) -> list[MorphAnalysis]:
    """All analyses of ``token``, most plausible first; never empty.

    Closed-class readings come before the ending-driven one. A word with no
    reading at all gets a single ``Other`` analysis whose root is its norm.
    """
    return list(_analyze_cached(token.norm, token.kind, lexicon or default_lexicon()))


@functools.lru_cache(maxsize=65536)
def _analyze_cached(norm: str, kind: str, lex: Lexicon) -> tuple[MorphAnalysis, ...]:
    if kind == "punctuation":
        return (MorphAnalysis(root=norm, pos="Punct", known=True),)
    if kind == "number":
        return (MorphAnalysis(root=norm, pos="Number", known=True),)
    out = _closed_class(norm, lex)
    ending = _ending_analysis(norm, lex)
    if ending is not None:
        out.append(ending)
    if not out:
        out.append(MorphAnalysis(root=norm, pos="Other"))
    return tuple(out)


def analyze_word(word: str, lexicon: Optional[Lexicon] = None) -> list[MorphAnalysis]:
    """Convenience wrapper taking a bare string."""
    return analyze(Token.make(word), lexicon)
