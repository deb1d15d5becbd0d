"""Token-level edit extraction between an erroneous and a corrected sentence.

Weighted Damerau-Levenshtein alignment with linguistically informed
substitution costs, followed by fusion of split/joined words.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

from .errors import OverlappingEdits, SpanOutOfRange
from .morph import Lexicon, analyze
from .text import Token

Op = Literal["Missing", "Unnecessary", "Replace", "Transpose", "Merge"]

# costs in tenths so that ties compare exactly
INSERT = 10
DELETE = 10
TRANSPOSE = 9
SUB_SAME_ROOT = 4
SUB_SIMILAR = 6
SUB_OTHER = 11
COST_SCALE = 10.0


@dataclass(frozen=True)
class Edit:
    src_span: tuple[int, int]
    tgt_span: tuple[int, int]
    op: str
    src_tokens: tuple[Token, ...] = ()
    tgt_tokens: tuple[Token, ...] = ()
    cost: float = field(default=0.0, compare=False)

    def __post_init__(self) -> None:
        s0, s1 = self.src_span
        t0, t1 = self.tgt_span
        if s1 - s0 != len(self.src_tokens) or t1 - t0 != len(self.tgt_tokens):
            raise ValueError(f"span/token length mismatch in {self}")

    @property
    def correction(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tgt_tokens)


def char_distance(a: str, b: str) -> float:
    """Levenshtein distance normalized by the longer string (0 for two empties)."""
    if a == b:
        return 0.0
    if not a or not b:
        return 1.0
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1] / max(len(a), len(b))


def _root_key(tok: Token, lexicon: Optional[Lexicon]) -> str:
    if tok.kind != "word":
        return tok.surface
    return analyze(tok, lexicon)[0].root


def substitution_cost(a: Token, b: Token, lexicon: Optional[Lexicon] = None) -> int:
    """Cost in tenths of replacing ``a`` by ``b``."""
    if a.surface == b.surface:
        return 0
    if a.kind == b.kind and _root_key(a, lexicon) == _root_key(b, lexicon):
        return SUB_SAME_ROOT
    if char_distance(a.norm or a.surface, b.norm or b.surface) <= 0.5:
        return SUB_SIMILAR
    return SUB_OTHER


def _is_transpose(src: Sequence[Token], tgt: Sequence[Token], i: int, j: int) -> bool:
    return (
        i >= 2 and j >= 2
        and src[i - 1].surface == tgt[j - 2].surface
        and src[i - 2].surface == tgt[j - 1].surface
        and src[i - 1].surface != src[i - 2].surface
    )


def _align(src: Sequence[Token], tgt: Sequence[Token], lexicon: Optional[Lexicon]):
    n, m = len(src), len(tgt)
    sub = [[substitution_cost(a, b, lexicon) for b in tgt] for a in src]
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        d[i][0] = i * DELETE
    for j in range(1, m + 1):
        d[0][j] = j * INSERT
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            best = min(
                d[i - 1][j - 1] + sub[i - 1][j - 1],
                d[i - 1][j] + DELETE,
                d[i][j - 1] + INSERT,
            )
            if _is_transpose(src, tgt, i, j):
                best = min(best, d[i - 2][j - 2] + TRANSPOSE)
            d[i][j] = best

    # backtrace preference: substitute > transpose > delete > insert
    ops = []
    i, j = n, m
    while i > 0 or j > 0:
        here = d[i][j]
        if i > 0 and j > 0 and d[i - 1][j - 1] + sub[i - 1][j - 1] == here:
            ops.append(("S", i - 1, j - 1, sub[i - 1][j - 1]))
            i, j = i - 1, j - 1
        elif _is_transpose(src, tgt, i, j) and d[i - 2][j - 2] + TRANSPOSE == here:
            ops.append(("T", i - 2, j - 2, TRANSPOSE))
            i, j = i - 2, j - 2
        elif i > 0 and d[i - 1][j] + DELETE == here:
            ops.append(("D", i - 1, j, DELETE))
            i -= 1
        else:
            ops.append(("I", i, j - 1, INSERT))
            j -= 1
    ops.reverse()
    return d[n][m], ops


def _raw_edits(src: Sequence[Token], tgt: Sequence[Token], ops) -> list[Edit]:
    edits = []
    for kind, i, j, cost in ops:
        c = cost / COST_SCALE
        if kind == "S":
            if cost:
                edits.append(Edit((i, i + 1), (j, j + 1), "Replace", (src[i],), (tgt[j],), c))
        elif kind == "T":
            edits.append(Edit((i, i + 2), (j, j + 2), "Transpose", tuple(src[i:i + 2]), tuple(tgt[j:j + 2]), c))
        elif kind == "D":
            edits.append(Edit((i, i + 1), (j, j), "Unnecessary", (src[i],), (), c))
        else:
            edits.append(Edit((i, i), (j, j + 1), "Missing", (), (tgt[j],), c))
    return edits


def _joined(tokens: Sequence[Token]) -> str:
    return "".join(t.norm for t in tokens)


def _fuse_orthography(edits: list[Edit], src: Sequence[Token], tgt: Sequence[Token], window: int = 4) -> list[Edit]:
    """Fuse contiguous edits that only join (Merge) or split words."""
    out: list[Edit] = []
    k = 0
    while k < len(edits):
        fused = None
        for w in range(min(window, len(edits) - k), 1, -1):
            group = edits[k:k + w]
            if any(e.op == "Transpose" for e in group):
                continue
            contiguous = all(
                a.src_span[1] == b.src_span[0] and a.tgt_span[1] == b.tgt_span[0]
                for a, b in zip(group, group[1:])
            )
            if not contiguous:
                continue
            s0, s1 = group[0].src_span[0], group[-1].src_span[1]
            t0, t1 = group[0].tgt_span[0], group[-1].tgt_span[1]
            s_toks, t_toks = tuple(src[s0:s1]), tuple(tgt[t0:t1])
            if _joined(s_toks) != _joined(t_toks) or not _joined(s_toks):
                continue
            cost = sum(e.cost for e in group)
            if len(s_toks) >= 2 and len(t_toks) == 1:
                fused = Edit((s0, s1), (t0, t1), "Merge", s_toks, t_toks, cost)
            elif len(s_toks) == 1 and len(t_toks) >= 2:
                fused = Edit((s0, s1), (t0, t1), "Replace", s_toks, t_toks, cost)
            if fused is not None:
                k += w
                break
        if fused is None:
            out.append(edits[k])
            k += 1
        else:
            out.append(fused)
    return out


def extract_edits(src: Sequence[Token], tgt: Sequence[Token], lexicon: Optional[Lexicon] = None) -> list[Edit]:
    """Minimal-cost edit script turning ``src`` into ``tgt``, ordered by source position."""
    _, ops = _align(src, tgt, lexicon)
    return _fuse_orthography(_raw_edits(src, tgt, ops), src, tgt)


def alignment_cost(src: Sequence[Token], tgt: Sequence[Token], lexicon: Optional[Lexicon] = None) -> float:
    return _align(src, tgt, lexicon)[0] / COST_SCALE


def script_cost(edits: Sequence[Edit]) -> float:
    return round(sum(e.cost for e in edits), 6)


def apply_edits(src: Sequence[Token], edits: Sequence[Edit]) -> list[Token]:
    out: list[Token] = []
    pos = 0
    for e in edits:
        start, end = e.src_span
        if not 0 <= start <= end <= len(src):
            raise SpanOutOfRange(f"edit span {e.src_span} outside source of length {len(src)}")
        if start < pos:
            raise OverlappingEdits(f"edit at {e.src_span} overlaps the previous edit ending at {pos}")
        out.extend(src[pos:start])
        out.extend(e.tgt_tokens)
        pos = end
    out.extend(src[pos:])
    return out
