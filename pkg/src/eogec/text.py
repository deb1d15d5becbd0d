"""Esperanto alphabet, orthography normalization and tokenization."""

from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Literal, Mapping

from .tables import FreqTable

__all__ = [
    "Alphabet",
    "ALPHABET",
    "ENGLISH_LETTERS",
    "Token",
    "normalize_orthography",
    "denormalize_orthography",
    "tokenize",
    "letter_frequencies",
    "is_esperanto_word",
    "OPEN_CLASS_ENDINGS",
    "VOWELS",
]

Convention = Literal["auto", "x_system", "unicode"]


@dataclass(frozen=True)
class Alphabet:
    letters: tuple[str, ...]
    diacritic_pairs: Mapping[str, str]
    _letter_set: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_letter_set", frozenset(self.letters))

    def __contains__(self, ch: str) -> bool:
        return ch in self._letter_set

    def index(self, ch: str) -> int:
        return self.letters.index(ch)


_LOWER = tuple("abcĉdefgĝhĥijĵklmnoprsŝtuŭvz")
_PAIRS = {
    "cx": "ĉ", "gx": "ĝ", "hx": "ĥ", "jx": "ĵ", "sx": "ŝ", "ux": "ŭ",
    "Cx": "Ĉ", "Gx": "Ĝ", "Hx": "Ĥ", "Jx": "Ĵ", "Sx": "Ŝ", "Ux": "Ŭ",
}

ALPHABET = Alphabet(_LOWER, MappingProxyType(_PAIRS))
ENGLISH_LETTERS: tuple[str, ...] = tuple("abcdefghijklmnopqrstuvwxyz")
VOWELS = frozenset("aeiou")

# -n (accusative) and -j (plural) are stripped before these are matched
OPEN_CLASS_ENDINGS = ("as", "is", "os", "us", "o", "a", "e", "i", "u")

_BASE_TO_DIACRITIC = {k[0]: v for k, v in _PAIRS.items()}
_DIACRITIC_TO_X = {v: k[0] + "x" for k, v in _PAIRS.items()}
_DIGRAPH_RE = re.compile(r"([cghjsuCGHJSU])[xX]")
_LETTER_RUN_RE = re.compile(r"[^\W\d_]+")

# Esperantization of letters outside the alphabet, used for Token.norm only
_FOREIGN = {"q": "k", "w": "v", "x": "ks", "y": "j"}


def _digraphs_to_unicode(s: str) -> str:
    return _DIGRAPH_RE.sub(lambda m: _BASE_TO_DIACRITIC[m.group(1)], s)


def normalize_orthography(text: str, convention: Convention = "auto") -> str:
    """Render Esperanto diacritic letters as single composed code points.

    ``x_system`` converts every ``cx gx hx jx sx ux`` digraph (any case of the
    ``x``). ``auto`` does the same per word, but leaves a word untouched when
    it would still contain an ``x`` afterwards, which keeps foreign words such
    as "Marx" or "exhaux" intact. ``unicode`` only applies NFC composition.
    """
    text = unicodedata.normalize("NFC", text)
    if convention == "unicode":
        return text
    if convention == "x_system":
        return _digraphs_to_unicode(text)
    if convention != "auto":
        raise ValueError(f"unknown orthography convention: {convention!r}")

    def fix_word(m: re.Match[str]) -> str:
        word = m.group(0)
        if "x" not in word and "X" not in word:
            return word
        converted = _digraphs_to_unicode(word)
        if "x" in converted or "X" in converted:
            return word
        return converted

    return _LETTER_RUN_RE.sub(fix_word, text)


def denormalize_orthography(text: str) -> str:
    """Inverse direction: write diacritic letters in the x-system."""
    text = unicodedata.normalize("NFC", text)
    return "".join(_DIACRITIC_TO_X.get(ch, ch) for ch in text)


@dataclass(frozen=True)
class Token:
    """A token of a sentence.

    Equality ignores ``span`` so that token sequences taken from different
    texts compare by content.
    """

    surface: str
    span: tuple[int, int] = field(compare=False)
    norm: str
    kind: Literal["word", "punctuation", "number"] = "word"

    @classmethod
    def make(cls, surface: str, start: int = 0) -> "Token":
        kind = _kind_of(surface)
        norm = _word_norm(surface) if kind == "word" else surface
        return cls(surface, (start, start + len(surface)), norm, kind)


def _word_norm(surface: str) -> str:
    s = normalize_orthography(surface, "auto").lower().replace("’", "'")
    out = []
    for ch in s:
        if ch in ALPHABET or ch == "'":
            out.append(ch)
        elif ch in _FOREIGN:
            out.append(_FOREIGN[ch])
        else:
            base = unicodedata.normalize("NFD", ch)[0]
            if base in ALPHABET:
                out.append(base)
            elif base in _FOREIGN:
                out.append(_FOREIGN[base])
    return "".join(out)


_NUMBER = r"\d+(?:[.,]\d+)*"
_WORD = r"[^\W\d_]+['’]?"
_WORD_HYPHENATED = r"[^\W\d_]+(?:-[^\W\d_]+)*['’]?"
_TOKEN_RE = re.compile(rf"(?P<number>{_NUMBER})|(?P<word>{_WORD})|(?P<punct>\S)")
_TOKEN_HYPH_RE = re.compile(
    rf"(?P<number>{_NUMBER})|(?P<word>{_WORD_HYPHENATED})|(?P<punct>\S)"
)


def _kind_of(surface: str) -> str:
    if re.fullmatch(_NUMBER, surface):
        return "number"
    if re.fullmatch(_WORD_HYPHENATED, surface):
        return "word"
    return "punctuation"


def tokenize(text: str, *, split_hyphens: bool = True) -> list[Token]:
    """Split ``text`` into word, number and punctuation tokens.

    Only whitespace is discarded, so the surfaces plus the gaps between
    spans reconstruct the input. A trailing elision apostrophe stays on its
    word ("l'"). Hyphenated compounds are split unless ``split_hyphens`` is
    false.
    """
    pattern = _TOKEN_RE if split_hyphens else _TOKEN_HYPH_RE
    tokens = []
    for m in pattern.finditer(text):
        surface = m.group(0)
        kind = m.lastgroup
        if kind == "word":
            tokens.append(Token(surface, m.span(), _word_norm(surface), "word"))
        elif kind == "number":
            tokens.append(Token(surface, m.span(), surface, "number"))
        else:
            tokens.append(Token(surface, m.span(), surface, "punctuation"))
    return tokens


def letter_frequencies(
    text: str,
    letters: tuple[str, ...] = ALPHABET.letters,
    convention: Convention = "unicode",
) -> FreqTable:
    """Count case-folded occurrences of ``letters`` in ``text``; everything else is ignored."""
    allowed = frozenset(letters)
    text = normalize_orthography(text, convention).lower()
    return FreqTable.from_counts(Counter(ch for ch in text if ch in allowed))


def _has_vowel(s: str) -> bool:
    return any(ch in VOWELS for ch in s)


def _has_foreign_letters(surface: str) -> bool:
    s = normalize_orthography(surface, "auto").lower()
    return any(ch.isalpha() and ch not in ALPHABET for ch in s)


def is_esperanto_word(token: Token) -> bool:
    """Cheap lexical test used for corpus filtering and language detection.

    A word passes when it belongs to the closed-class lexicon, or when after
    stripping ``-n`` and then ``-j`` it ends in an open-class ending preceded
    by a stem containing a vowel (which rejects e.g. "the").
    """
    from .morph import default_lexicon

    if token.kind != "word" or _has_foreign_letters(token.surface):
        return False
    norm = token.norm
    if default_lexicon().is_closed_class(norm):
        return True
    if norm.endswith("'"):
        # elided noun ending: dom' = domo
        return _has_vowel(norm[:-1])
    stem = norm
    if stem.endswith("n"):
        stem = stem[:-1]
    if stem.endswith("j"):
        stem = stem[:-1]
    for ending in OPEN_CLASS_ENDINGS:
        if stem.endswith(ending) and _has_vowel(stem[: -len(ending)]):
            return True
    return False
