"""Error-code taxonomy and the rule cascade that assigns codes to edits."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .align import Edit, char_distance, extract_edits
from .errors import EmptyDataset, IllegalCombination
from .morph import FINITE_FORMS, Lexicon, MorphAnalysis, analyze
from .text import Token, normalize_orthography, tokenize

OPERATIONS = ("M", "U", "R")
POS_CATEGORIES = ("ADJ", "ADV", "CONJ", "DET", "NOUN", "PREP", "PRON", "PUNCT", "VERB", "TABLE")
REPLACE_ONLY = ("MORPH", "ORTH", "SPELL", "WO")
CATEGORIES = POS_CATEGORIES + REPLACE_ONLY + ("OTHER",)
SUBTYPES = ("CASE", "NUM", "FIX", "FORM", "SVA", "TENSE")
LEGAL_SUBTYPES = {
    "ADJ": frozenset({"CASE", "NUM", "FIX"}),
    "NOUN": frozenset({"CASE", "NUM", "FIX"}),
    "VERB": frozenset({"FORM", "SVA", "TENSE"}),
    "ADV": frozenset({"CASE"}),
    "PRON": frozenset({"CASE", "NUM"}),
    "TABLE": frozenset({"CASE", "NUM"}),
}

POS_TO_CATEGORY = {
    "Noun": "NOUN", "Adjective": "ADJ", "Adverb": "ADV", "Verb": "VERB",
    "Pronoun": "PRON", "Preposition": "PREP", "Conjunction": "CONJ",
    "Determiner": "DET", "Table": "TABLE", "Punct": "PUNCT",
    "Number": "OTHER", "Other": "OTHER",
}

PROVENANCES = ("TYCE", "PMEG", "UserWriting", "NiveloAlNivelo", "Other")
QUALITY_MARKERS = ("GOOD", "ACCEPTABLE", "POOR")


@dataclass(frozen=True, order=True)
class ErrorCode:
    operation: str
    category: str
    subtype: Optional[str] = None

    def __post_init__(self) -> None:
        if self.operation not in OPERATIONS:
            raise IllegalCombination(f"unknown operation {self.operation!r}")
        if self.category not in CATEGORIES:
            raise IllegalCombination(f"unknown category {self.category!r}")
        if self.category in REPLACE_ONLY and self.operation != "R":
            raise IllegalCombination(f"{self.category} only exists as a replacement")
        if self.subtype is not None:
            if self.operation != "R":
                raise IllegalCombination("morphology subtypes only exist for replacements")
            if self.subtype not in LEGAL_SUBTYPES.get(self.category, ()):
                raise IllegalCombination(f"{self.category}:{self.subtype} is not a valid combination")

    def __str__(self) -> str:
        parts = [self.operation, self.category]
        if self.subtype:
            parts.append(self.subtype)
        return ":".join(parts)

    @classmethod
    def parse(cls, text: str) -> "ErrorCode":
        parts = text.strip().split(":")
        if len(parts) not in (2, 3):
            raise IllegalCombination(f"malformed error code {text!r}")
        return cls(parts[0], parts[1], parts[2] if len(parts) == 3 else None)


def all_codes() -> list[ErrorCode]:
    """Every legal code, in a stable order."""
    out = []
    for op in OPERATIONS:
        for cat in CATEGORIES:
            if cat in REPLACE_ONLY and op != "R":
                continue
            out.append(ErrorCode(op, cat))
            if op == "R":
                out.extend(ErrorCode(op, cat, sub) for sub in sorted(LEGAL_SUBTYPES.get(cat, ())))
    return out


@dataclass(frozen=True)
class AnnotatedSentence:
    source: tuple[Token, ...]
    target: tuple[Token, ...]
    annotations: tuple[tuple[Edit, ErrorCode], ...] = ()
    provenance: str = "Other"
    quality: Optional[str] = None

    @property
    def edits(self) -> list[Edit]:
        return [e for e, _ in self.annotations]

    def edits_in_source_order(self) -> list[Edit]:
        return sorted(self.edits, key=_source_order)


def _source_order(e: Edit) -> tuple[int, int, int]:
    return (e.src_span[0], e.src_span[1], e.tgt_span[0])


def annotation_order(pair: tuple[Edit, ErrorCode]) -> tuple:
    """Replacements first, then unnecessary/missing, each by source position."""
    edit, code = pair
    return (0 if code.operation == "R" else 1,) + _source_order(edit)


def _top(analyses: Sequence[MorphAnalysis]) -> MorphAnalysis:
    return analyses[0]


def _category(a: MorphAnalysis) -> str:
    return POS_TO_CATEGORY[a.pos]


def _has_subject_before(context: Sequence[Token], pos: int, lexicon: Optional[Lexicon]) -> bool:
    """An overt nominative subject in the same clause, with no finite verb in between."""
    for k in range(pos - 1, -1, -1):
        tok = context[k]
        if tok.kind == "punctuation":
            return False
        a = analyze(tok, lexicon)[0]
        if a.pos == "Conjunction":
            return False
        if a.pos == "Verb" and a.verb_form in FINITE_FORMS:
            return False
        if a.case != "Nominative":
            continue
        if a.pos == "Pronoun" and a.ending == "":
            return True
        if a.pos == "Noun":
            return True
        if a.pos == "Table" and a.table.ending in ("o", "u"):
            return True
    return False


def _resolve_subtype(
    s: MorphAnalysis, t: MorphAnalysis, edit: Edit,
    context: Optional[Sequence[Token]], lexicon: Optional[Lexicon],
) -> Optional[ErrorCode]:
    """Same-POS replacement: return a code if a morphology rule applies."""
    cat = _category(s)
    if s.pos == "Table":
        if (s.table.prefix, s.table.ending) != (t.table.prefix, t.table.ending):
            return ErrorCode("R", "TABLE")
        return _single_feature(s, t, cat, allow_fix=False) or ErrorCode("R", "TABLE")
    if s.root != t.root:
        return None
    if s.pos == "Verb":
        if s.verb_form == t.verb_form:
            return None
        s_finite, t_finite = s.verb_form in FINITE_FORMS, t.verb_form in FINITE_FORMS
        if s_finite and t_finite:
            return ErrorCode("R", "VERB", "TENSE")
        if s.verb_form == "Infinitive" and t.verb_form == "Present" and context is not None:
            if _has_subject_before(context, edit.src_span[0], lexicon):
                return ErrorCode("R", "VERB", "SVA")
        return ErrorCode("R", "VERB", "FORM")
    if s.pos in ("Noun", "Adjective"):
        return _single_feature(s, t, cat, allow_fix=True) or ErrorCode("R", cat)
    if s.pos in ("Adverb", "Pronoun"):
        return _single_feature(s, t, cat, allow_fix=False) or ErrorCode("R", cat)
    return None


def _single_feature(s: MorphAnalysis, t: MorphAnalysis, cat: str, allow_fix: bool) -> Optional[ErrorCode]:
    diffs = []
    if s.case != t.case:
        diffs.append("CASE")
    if s.number != t.number:
        diffs.append("NUM")
    if (s.prefixes, s.suffixes) != (t.prefixes, t.suffixes) or s.ending != t.ending:
        diffs.append("FIX")
    if len(diffs) != 1:
        return None
    sub = diffs[0]
    if sub == "FIX" and not allow_fix:
        return None
    if sub not in LEGAL_SUBTYPES.get(cat, ()):
        return None
    return ErrorCode("R", cat, sub)


def token_overlap(a: Sequence[Token], b: Sequence[Token]) -> float:
    """Shared tokens (multiset) relative to the longer sequence."""
    if not a and not b:
        return 1.0
    common = Counter(t.surface for t in a) & Counter(t.surface for t in b)
    return sum(common.values()) / max(len(a), len(b))


def classify_edit(
    edit: Edit,
    src_an: Optional[Sequence[Sequence[MorphAnalysis]]] = None,
    tgt_an: Optional[Sequence[Sequence[MorphAnalysis]]] = None,
    context: Optional[Sequence[Token]] = None,
    lexicon: Optional[Lexicon] = None,
    spell_threshold: float = 0.5,
) -> ErrorCode:
    """Assign an error code to ``edit``.

    ``src_an``/``tgt_an`` hold one analysis list per token of the edit and are
    computed when omitted. ``context`` is the full source sentence; without it
    infinitive-to-finite corrections cannot be recognized as SVA.
    """
    if src_an is None:
        src_an = [analyze(t, lexicon) for t in edit.src_tokens]
    if tgt_an is None:
        tgt_an = [analyze(t, lexicon) for t in edit.tgt_tokens]

    if edit.op == "Transpose":
        return ErrorCode("R", "WO")
    if edit.op == "Merge":
        return ErrorCode("R", "ORTH")
    if edit.op == "Missing":
        return ErrorCode("M", _category(_top(tgt_an[0])))
    if edit.op == "Unnecessary":
        return ErrorCode("U", _category(_top(src_an[0])))

    src_toks, tgt_toks = edit.src_tokens, edit.tgt_tokens
    if len(src_toks) != 1 or len(tgt_toks) != 1:
        if "".join(t.norm for t in src_toks) == "".join(t.norm for t in tgt_toks):
            return ErrorCode("R", "ORTH")
        if token_overlap(src_toks, tgt_toks) < 0.5:
            return ErrorCode("R", "OTHER")
        cats = {_category(_top(a)) for a in tgt_an}
        return ErrorCode("R", cats.pop()) if len(cats) == 1 else ErrorCode("R", "OTHER")

    s_tok, t_tok = src_toks[0], tgt_toks[0]
    s, t = _top(src_an[0]), _top(tgt_an[0])
    if s_tok.norm == t_tok.norm:
        return ErrorCode("R", "ORTH")
    if s.pos == t.pos:
        code = _resolve_subtype(s, t, edit, context, lexicon)
        if code is not None:
            return code
    elif s.root == t.root and s.pos != "Other" and t.pos != "Other":
        return ErrorCode("R", "MORPH")
    if (s.pos == "Other" or not s.known) and s_tok.kind == "word":
        if char_distance(s_tok.norm, t_tok.norm) <= spell_threshold:
            return ErrorCode("R", "SPELL")
    return ErrorCode("R", _category(t))


def _collapse_to_other(edits: list[Edit], src: Sequence[Token], tgt: Sequence[Token]) -> Optional[Edit]:
    s0, s1 = edits[0].src_span[0], edits[-1].src_span[1]
    t0, t1 = edits[0].tgt_span[0], edits[-1].tgt_span[1]
    if s0 == s1 or t0 == t1:
        return None
    return Edit((s0, s1), (t0, t1), "Replace", tuple(src[s0:s1]), tuple(tgt[t0:t1]),
                sum(e.cost for e in edits))


def annotate(
    source: str,
    target: str,
    provenance: str = "Other",
    quality: Optional[str] = None,
    lexicon: Optional[Lexicon] = None,
    other_threshold: float = 0.5,
) -> AnnotatedSentence:
    """Tokenize, align and classify a (source, corrected) sentence pair."""
    src = tuple(tokenize(normalize_orthography(source)))
    tgt = tuple(tokenize(normalize_orthography(target)))
    return annotate_tokens(src, tgt, provenance, quality, lexicon, other_threshold)


def annotate_tokens(
    src: Sequence[Token],
    tgt: Sequence[Token],
    provenance: str = "Other",
    quality: Optional[str] = None,
    lexicon: Optional[Lexicon] = None,
    other_threshold: float = 0.5,
) -> AnnotatedSentence:
    if provenance not in PROVENANCES:
        raise ValueError(f"unknown provenance {provenance!r}")
    if quality is not None and quality not in QUALITY_MARKERS:
        raise ValueError(f"unknown quality marker {quality!r}")
    src, tgt = tuple(src), tuple(tgt)
    edits = extract_edits(src, tgt, lexicon)
    pairs: list[tuple[Edit, ErrorCode]] = []
    if edits and token_overlap(src, tgt) < other_threshold:
        whole = _collapse_to_other(edits, src, tgt)
        if whole is not None:
            pairs = [(whole, ErrorCode("R", "OTHER"))]
    if not pairs:
        for e in edits:
            pairs.append((e, classify_edit(e, context=src, lexicon=lexicon)))
    pairs.sort(key=annotation_order)
    return AnnotatedSentence(src, tgt, tuple(pairs), provenance, quality)


# -- dataset statistics -------------------------------------------------------

@dataclass
class DatasetReport:
    n_sentences: int
    mean_source_length: float
    mean_target_length: float
    source_lengths: Counter
    target_lengths: Counter
    provenance: Counter
    codes: Counter
    operations: Counter
    pos_categories: Counter
    subtypes: Counter
    top_k: int = 10

    @property
    def n_edits(self) -> int:
        return sum(self.operations.values())

    def operation_share(self) -> dict[str, float]:
        total = self.n_edits
        return {op: (100.0 * self.operations[op] / total if total else 0.0) for op in OPERATIONS}

    def top_codes(self) -> list[tuple[str, int]]:
        return sorted(self.codes.items(), key=lambda kv: (-kv[1], kv[0]))[: self.top_k]

    def write_csv(self, out_dir: str | Path) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []

        def dump(name, header, rows):
            path = out / name
            with path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                w.writerows(rows)
            written.append(path)

        dump("summary.csv", ["metric", "value"], [
            ["sentences", self.n_sentences],
            ["edits", self.n_edits],
            ["mean_source_length", f"{self.mean_source_length:.4f}"],
            ["mean_target_length", f"{self.mean_target_length:.4f}"],
        ])
        lengths = sorted(set(self.source_lengths) | set(self.target_lengths))
        dump("lengths.csv", ["length", "source", "target"],
             [[n, self.source_lengths[n], self.target_lengths[n]] for n in lengths])
        dump("provenance.csv", ["provenance", "count"],
             [[p, self.provenance[p]] for p in PROVENANCES if self.provenance[p]])
        dump("error_codes.csv", ["rank", "code", "count"],
             [[i, c, n] for i, (c, n) in enumerate(self.top_codes(), 1)])
        share = self.operation_share()
        dump("operations.csv", ["operation", "count", "percent"],
             [[op, self.operations[op], f"{share[op]:.2f}"] for op in OPERATIONS])
        pos_total = sum(self.pos_categories.values())
        dump("pos.csv", ["category", "count", "percent"],
             [[c, n, f"{100.0 * n / pos_total:.2f}"]
              for c, n in sorted(self.pos_categories.items(), key=lambda kv: (-kv[1], kv[0]))])
        dump("subtypes.csv", ["subtype", "count"],
             [[s, self.subtypes[s]] for s in SUBTYPES if self.subtypes[s]])
        return written


def _length(tokens: Sequence[Token], count_punctuation: bool) -> int:
    return sum(1 for t in tokens if count_punctuation or t.kind != "punctuation")


def dataset_report(
    sentences: Sequence[AnnotatedSentence],
    top_k: int = 10,
    count_punctuation: bool = False,
) -> DatasetReport:
    """Descriptive statistics of an annotated dataset (lengths in words by default)."""
    if not sentences:
        raise EmptyDataset("dataset_report needs at least one sentence")
    src_len = [_length(s.source, count_punctuation) for s in sentences]
    tgt_len = [_length(s.target, count_punctuation) for s in sentences]
    codes, ops, pos, subs = Counter(), Counter(), Counter(), Counter()
    for s in sentences:
        for _, code in s.annotations:
            codes[str(code)] += 1
            ops[code.operation] += 1
            if code.category in POS_CATEGORIES:
                pos[code.category] += 1
            if code.subtype:
                subs[code.subtype] += 1
    return DatasetReport(
        n_sentences=len(sentences),
        mean_source_length=sum(src_len) / len(src_len),
        mean_target_length=sum(tgt_len) / len(tgt_len),
        source_lengths=Counter(src_len),
        target_lengths=Counter(tgt_len),
        provenance=Counter(s.provenance for s in sentences),
        codes=codes,
        operations=ops,
        pos_categories=pos,
        subtypes=subs,
        top_k=top_k,
    )
