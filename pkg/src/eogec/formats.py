"""Annotation file formats.

Canonical (M2-style)::

    # provenance=PMEG quality=GOOD
    S Mi loĝi en Romo .
    A 1 2|||R:VERB:SVA|||loĝas|||REQUIRED|||-NONE-|||0

Insertions use ``start == end`` at the index of the following source token.
The metadata comment line is written only when provenance or quality differ
from the defaults.

Compact (index/code)::

    S Mi loĝi en Romo .
    T Mi loĝas en Romo .
    1 R:VERB:SVA

One index addresses a single source token (for M codes, the token following
the insertion). Two indices give the first and last source token of a span,
as used by R:WO and R:ORTH. A trailing ``=k`` states the number of target
tokens when it differs from the default for that code (1, or 0 for U codes,
or 2 for R:WO). Records are separated by blank lines in both formats.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

from .align import Edit, apply_edits
from .classify import AnnotatedSentence, ErrorCode
from .errors import FormatError, IllegalCombination
from .text import Token

_SEP = "|||"


def tokens_from_words(words: Sequence[str]) -> tuple[Token, ...]:
    out, pos = [], 0
    for w in words:
        out.append(Token.make(w, pos))
        pos += len(w) + 1
    return tuple(out)


def _join(tokens: Iterable[Token]) -> str:
    return " ".join(t.surface for t in tokens)


def _meta_line(s: AnnotatedSentence) -> Optional[str]:
    parts = []
    if s.provenance != "Other":
        parts.append(f"provenance={s.provenance}")
    if s.quality:
        parts.append(f"quality={s.quality}")
    return "# " + " ".join(parts) if parts else None


def _parse_meta(line: str) -> dict:
    meta = {}
    for item in line.lstrip("#").split():
        if "=" in item:
            k, v = item.split("=", 1)
            meta[k] = v
    return meta


def _parse_code(text: str, lineno: int) -> ErrorCode:
    try:
        return ErrorCode.parse(text)
    except IllegalCombination as exc:
        raise FormatError(f"line {lineno}: {exc}") from None


def _op_for(code: ErrorCode, n_src: int, n_tgt: int) -> str:
    if code.operation == "M":
        return "Missing"
    if code.operation == "U":
        return "Unnecessary"
    if code.category == "WO" and n_src == 2 and n_tgt == 2:
        return "Transpose"
    if code.category == "ORTH" and n_src >= 2 and n_tgt == 1:
        return "Merge"
    return "Replace"


def _build_sentence(
    source: tuple[Token, ...],
    raw: list[tuple[tuple[int, int], ErrorCode, tuple[Token, ...]]],
    meta: dict,
    lineno: int,
) -> AnnotatedSentence:
    """Turn (src_span, code, correction) triples into Edits with target spans."""
    order = sorted(range(len(raw)), key=lambda k: (raw[k][0][0], raw[k][0][1]))
    tgt_spans: dict[int, tuple[int, int]] = {}
    delta = 0
    prev_end = 0
    for k in order:
        (s0, s1), _, corr = raw[k]
        if not 0 <= s0 <= s1 <= len(source):
            raise FormatError(f"record ending at line {lineno}: span {s0} {s1} out of range")
        if s0 < prev_end:
            raise FormatError(f"record ending at line {lineno}: overlapping edits at {s0} {s1}")
        prev_end = s1
        t0 = s0 + delta
        tgt_spans[k] = (t0, t0 + len(corr))
        delta += len(corr) - (s1 - s0)
    pairs = []
    for k, ((s0, s1), code, corr) in enumerate(raw):
        edit = Edit((s0, s1), tgt_spans[k], _op_for(code, s1 - s0, len(corr)),
                    tuple(source[s0:s1]), corr)
        pairs.append((edit, code))
    target = apply_edits(source, sorted((e for e, _ in pairs), key=lambda e: (e.src_span, e.tgt_span)))
    return AnnotatedSentence(
        source, tuple(target), tuple(pairs),
        provenance=meta.get("provenance", "Other"), quality=meta.get("quality"),
    )


# -- canonical ----------------------------------------------------------------

def format_m2_record(s: AnnotatedSentence) -> str:
    lines = []
    meta = _meta_line(s)
    if meta:
        lines.append(meta)
    lines.append("S " + _join(s.source))
    for edit, code in s.annotations:
        corr = " ".join(edit.correction)
        lines.append(
            f"A {edit.src_span[0]} {edit.src_span[1]}{_SEP}{code}{_SEP}{corr}"
            f"{_SEP}REQUIRED{_SEP}-NONE-{_SEP}0"
        )
    return "\n".join(lines) + "\n"


def dumps_m2(sentences: Iterable[AnnotatedSentence]) -> str:
    return "\n".join(format_m2_record(s) for s in sentences)


def write_m2(sentences: Iterable[AnnotatedSentence], path: str | Path) -> None:
    Path(path).write_text(dumps_m2(sentences), encoding="utf-8", newline="\n")


def _records(text: str) -> Iterator[tuple[int, list[str]]]:
    block: list[str] = []
    for lineno, line in enumerate(io.StringIO(text), 1):
        line = line.rstrip("\n").rstrip("\r")
        if line.strip():
            block.append(line)
        elif block:
            yield lineno, block
            block = []
    if block:
        yield lineno, block


def loads_m2(text: str) -> list[AnnotatedSentence]:
    out = []
    for lineno, block in _records(text):
        meta: dict = {}
        source: Optional[tuple[Token, ...]] = None
        raw = []
        for line in block:
            if line.startswith("#"):
                meta.update(_parse_meta(line))
            elif line.startswith("S "):
                source = tokens_from_words(line[2:].split(" ")) if line[2:] else ()
            elif line == "S":
                source = ()
            elif line.startswith("A "):
                fields = line[2:].split(_SEP)
                if len(fields) < 3:
                    raise FormatError(f"line {lineno}: malformed annotation {line!r}")
                try:
                    s0, s1 = (int(x) for x in fields[0].split())
                except ValueError:
                    raise FormatError(f"line {lineno}: bad span in {line!r}") from None
                if fields[1] == "noop" or s0 < 0:
                    continue
                code = _parse_code(fields[1], lineno)
                if source is None:
                    raise FormatError(f"line {lineno}: annotation before S line")
                words = fields[2].split(" ") if fields[2] else []
                raw.append(((s0, s1), code, tokens_from_words(words)))
            else:
                raise FormatError(f"line {lineno}: unexpected line {line!r}")
        if source is None:
            raise FormatError(f"record ending at line {lineno} has no S line")
        out.append(_build_sentence(source, raw, meta, lineno))
    return out


def read_m2(path: str | Path) -> list[AnnotatedSentence]:
    return loads_m2(Path(path).read_text(encoding="utf-8"))


# -- compact ------------------------------------------------------------------

def _default_tgt_len(code: ErrorCode, two_index: bool) -> int:
    if code.operation == "U":
        return 0
    if two_index and code.category == "WO":
        return 2
    return 1


def format_compact_record(s: AnnotatedSentence) -> str:
    lines = []
    meta = _meta_line(s)
    if meta:
        lines.append(meta)
    lines.append("S " + _join(s.source))
    lines.append("T " + _join(s.target))
    for edit, code in s.annotations:
        s0, s1 = edit.src_span
        n_tgt = len(edit.tgt_tokens)
        if code.operation == "M":
            if s0 != s1:
                raise FormatError(f"missing-token edit with non-empty source span {edit.src_span}")
            idx, two = f"{s0}", False
        elif s1 - s0 == 1:
            idx, two = f"{s0}", False
        else:
            idx, two = f"{s0} {s1 - 1}", True
        item = f"{idx} {code}"
        if n_tgt != _default_tgt_len(code, two):
            item += f" ={n_tgt}"
        lines.append(item)
    return "\n".join(lines) + "\n"


def dumps_compact(sentences: Iterable[AnnotatedSentence]) -> str:
    return "\n".join(format_compact_record(s) for s in sentences)


def loads_compact(text: str) -> list[AnnotatedSentence]:
    out = []
    for lineno, block in _records(text):
        meta: dict = {}
        source = target = None
        items = []
        for line in block:
            if line.startswith("#"):
                meta.update(_parse_meta(line))
            elif line.startswith("S ") or line == "S":
                source = tokens_from_words(line[2:].split(" ")) if line[2:] else ()
            elif line.startswith("T ") or line == "T":
                target = tokens_from_words(line[2:].split(" ")) if line[2:] else ()
            else:
                items.append(line.split())
        if source is None or target is None:
            raise FormatError(f"record ending at line {lineno} needs both S and T lines")
        specs = []
        for parts in items:
            n_tgt = None
            if parts and parts[-1].startswith("="):
                n_tgt = int(parts[-1][1:])
                parts = parts[:-1]
            try:
                if len(parts) == 2:
                    i, code = int(parts[0]), _parse_code(parts[1], lineno)
                    span = (i, i) if code.operation == "M" else (i, i + 1)
                    two = False
                elif len(parts) == 3:
                    i, j, code = int(parts[0]), int(parts[1]), _parse_code(parts[2], lineno)
                    span, two = (i, j + 1), True
                else:
                    raise ValueError
            except ValueError:
                raise FormatError(f"record ending at line {lineno}: bad annotation {' '.join(parts)!r}") from None
            specs.append((span, code, n_tgt if n_tgt is not None else _default_tgt_len(code, two)))
        # target spans follow from source order and target lengths
        order = sorted(range(len(specs)), key=lambda k: (specs[k][0][0], specs[k][0][1]))
        raw: list = [None] * len(specs)
        delta = 0
        for k in order:
            (s0, s1), code, n_tgt = specs[k]
            t0 = s0 + delta
            if t0 < 0 or t0 + n_tgt > len(target):
                raise FormatError(f"record ending at line {lineno}: annotation does not fit target")
            raw[k] = ((s0, s1), code, tuple(target[t0:t0 + n_tgt]))
            delta += n_tgt - (s1 - s0)
        sent = _build_sentence(source, raw, meta, lineno)
        if [t.surface for t in sent.target] != [t.surface for t in target]:
            raise FormatError(f"record ending at line {lineno}: annotations do not produce the T line")
        out.append(sent)
    return out


def read_annotations(path: str | Path) -> list[AnnotatedSentence]:
    """Read either format, sniffing for ``T`` lines."""
    text = Path(path).read_text(encoding="utf-8")
    if any(line.startswith("T ") or line == "T" for line in text.splitlines()):
        return loads_compact(text)
    return loads_m2(text)


def convert(text: str, to: str) -> str:
    if to == "compact":
        return dumps_compact(loads_m2(text))
    if to == "canonical":
        return dumps_m2(loads_compact(text))
    raise ValueError(f"unknown target format {to!r}")
