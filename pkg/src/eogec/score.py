"""Precision, recall and F0.5 for corrections, in two flavours.

``errant_score`` matches extracted hypothesis edits against gold edits on
(source span, correction), optionally also on the error code.
``m2_score`` works from the corrected sentence itself: it searches the
lattice of possible edit scripts between source and hypothesis for the one
that agrees with the most gold edits, so a phrase-level gold edit can match
even when the hypothesis would naively be split into smaller edits.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence, Union

from .align import Edit
from .classify import AnnotatedSentence, ErrorCode
from .errors import SourceMismatch
from .text import Token

MODES = ("span", "span_and_type")


def fbeta(p: float, r: float, beta: float = 0.5) -> float:
    b2 = beta * beta
    denom = b2 * p + r
    if denom == 0:
        return 0.0
    return (1 + b2) * p * r / denom


class Counts(NamedTuple):
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other) -> "Counts":  # type: ignore[override]
        return Counts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 1.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 1.0

    @property
    def f_half(self) -> float:
        return fbeta(self.precision, self.recall, 0.5)


@dataclass(frozen=True)
class ScoreReport:
    """Corpus-level counts; ratios are derived, in [0, 1]."""

    tp: int = 0
    fp: int = 0
    fn: int = 0
    per_category: dict[str, Counts] = field(default_factory=dict)

    @property
    def counts(self) -> Counts:
        return Counts(self.tp, self.fp, self.fn)

    @property
    def precision(self) -> float:
        return self.counts.precision

    @property
    def recall(self) -> float:
        return self.counts.recall

    @property
    def f_half(self) -> float:
        return self.counts.f_half

    def __add__(self, other: "ScoreReport") -> "ScoreReport":
        cats = dict(self.per_category)
        for k, v in other.per_category.items():
            cats[k] = cats.get(k, Counts()) + v
        return ScoreReport(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn,
                           dict(sorted(cats.items())))

    def format(self, title: str = "") -> str:
        lines = [title] if title else []
        lines.append(f"TP={self.tp} FP={self.fp} FN={self.fn}")
        lines.append(f"P={100 * self.precision:.2f} R={100 * self.recall:.2f} F0.5={100 * self.f_half:.2f}")
        for cat, c in self.per_category.items():
            lines.append(f"  {cat:<6} tp={c.tp} fp={c.fp} fn={c.fn} "
                         f"P={100 * c.precision:.2f} R={100 * c.recall:.2f} F0.5={100 * c.f_half:.2f}")
        return "\n".join(lines)


def aggregate(reports: Iterable[ScoreReport]) -> ScoreReport:
    total = ScoreReport()
    for r in reports:
        total = total + r
    return total


def _surfaces(tokens: Iterable[Token]) -> tuple[str, ...]:
    return tuple(t.surface for t in tokens)


def _bump(cats: dict[str, Counts], key: str, tp=0, fp=0, fn=0) -> None:
    cats[key] = cats.get(key, Counts()) + Counts(tp, fp, fn)


# -- span matching --------------------------------------------------------------

def errant_sentence(hyp: AnnotatedSentence, gold: AnnotatedSentence, mode: str = "span") -> ScoreReport:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")

    def key(edit: Edit, code: ErrorCode):
        k = (edit.src_span, edit.correction)
        return k + (code,) if mode == "span_and_type" else k

    gold_left = Counter(key(e, c) for e, c in gold.annotations)
    cats: dict[str, Counts] = {}
    tp = fp = 0
    matched_gold = Counter()
    for e, c in hyp.annotations:
        k = key(e, c)
        if gold_left[k] > 0:
            gold_left[k] -= 1
            matched_gold[k] += 1
            tp += 1
        else:
            fp += 1
            _bump(cats, c.category, fp=1)
    fn = 0
    for e, c in gold.annotations:
        k = key(e, c)
        if matched_gold[k] > 0:
            matched_gold[k] -= 1
            _bump(cats, c.category, tp=1)
        else:
            fn += 1
            _bump(cats, c.category, fn=1)
    return ScoreReport(tp, fp, fn, dict(sorted(cats.items())))


def _check_sources(hyp: Sequence, gold: Sequence[AnnotatedSentence]) -> None:
    if len(hyp) != len(gold):
        raise SourceMismatch(f"hypothesis has {len(hyp)} sentences, gold has {len(gold)}")


def errant_score(
    hyp: Sequence[AnnotatedSentence],
    gold: Sequence[AnnotatedSentence],
    mode: str = "span",
) -> ScoreReport:
    _check_sources(hyp, gold)
    reports = []
    for i, (h, g) in enumerate(zip(hyp, gold)):
        if _surfaces(h.source) != _surfaces(g.source):
            raise SourceMismatch(f"sentence {i} differs between hypothesis and gold")
        reports.append(errant_sentence(h, g, mode))
    return aggregate(reports)


# -- lattice matching -------------------------------------------------------------

GoldEdit = Union[Edit, tuple[Edit, ErrorCode]]


class M2Match(NamedTuple):
    tp: int
    fp: int
    fn: int
    matched: tuple[int, ...]  # indices into the gold list


def _lattice_nodes(s: Sequence[str], h: Sequence[str]) -> set[tuple[int, int]]:
    """Grid points on at least one unit-cost Levenshtein optimal path."""
    n, m = len(s), len(h)

    def table(a, b):
        d = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
        for i in range(len(a) + 1):
            d[i][0] = i
        for j in range(len(b) + 1):
            d[0][j] = j
        for i in range(1, len(a) + 1):
            for j in range(1, len(b) + 1):
                d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1]))
        return d

    fwd = table(s, h)
    bwd = table(s[::-1], h[::-1])
    total = fwd[n][m]
    return {
        (i, j)
        for i in range(n + 1)
        for j in range(m + 1)
        if fwd[i][j] + bwd[n - i][m - j] == total
    }


def _gold_nodes(s, h, golds, by_start) -> set[tuple[int, int]]:
    """Grid points on a complete path made only of matches and gold edits.

    The weighted alignment behind the gold annotation need not follow a
    unit-cost optimal path, so without these nodes a hypothesis equal to the
    gold target could miss gold edits.
    """
    n, m = len(s), len(h)

    def succ(i, j):
        if i < n and j < m and s[i] == h[j]:
            yield i + 1, j + 1
        for k in by_start.get(i, ()):
            g = golds[k]
            b = len(g.correction)
            if (g.src_span[1] > i or b > 0) and tuple(h[j:j + b]) == g.correction and j + b <= m:
                yield g.src_span[1], j + b

    fwd = {(0, 0)}
    edges: dict[tuple[int, int], list[tuple[int, int]]] = {}
    # every edge advances i or j, so row-major order is topological
    for i in range(n + 1):
        for j in range(m + 1):
            if (i, j) in fwd:
                edges[(i, j)] = list(succ(i, j))
                fwd.update(edges[(i, j)])
    if (n, m) not in fwd:
        return set()
    keep = {(n, m)}
    for i in range(n, -1, -1):
        for j in range(m, -1, -1):
            if any(t in keep for t in edges.get((i, j), ())):
                keep.add((i, j))
    return keep


def m2_match(
    src: Sequence[Token],
    hyp: Sequence[Token],
    gold_edits: Sequence[GoldEdit],
    max_phrase: int = 4,
) -> M2Match:
    """Best edit script between ``src`` and ``hyp`` in terms of gold agreement.

    Nodes are grid points (i, j), meaning i source and j hypothesis tokens
    consumed, restricted to points lying on some minimum edit distance path
    between the two sequences or on a path built from matches and gold
    edits alone. Identical tokens advance both at no cost. Any
    other phrase pair of at most ``max_phrase`` tokens per side is one
    spurious edit. A gold edit whose correction appears in ``hyp`` between
    two nodes is a rewarded transition, whatever its length. Paths are
    ranked by (-matches, edits).
    """
    golds = [g[0] if isinstance(g, tuple) else g for g in gold_edits]
    s = _surfaces(src)
    h = _surfaces(hyp)
    n, m = len(s), len(h)

    by_start: dict[int, list[int]] = {}
    for k, g in enumerate(golds):
        by_start.setdefault(g.src_span[0], []).append(k)
    on_path = _lattice_nodes(s, h) | _gold_nodes(s, h, golds, by_start)

    # state: (i, j, gold insertions already used at row i)
    INF = (1, 10**9)
    best: dict[tuple, tuple[int, int]] = {(0, 0, frozenset()): (0, 0)}
    back: dict[tuple, tuple] = {}
    cells: dict[tuple[int, int], set] = {(0, 0): {frozenset()}}

    def relax(frm, to, cost, gold_k):
        if to[:2] not in on_path:
            return
        cur = best[frm]
        cand = (cur[0] + cost[0], cur[1] + cost[1])
        if cand < best.get(to, INF):
            best[to] = cand
            back[to] = (frm, gold_k)
            cells.setdefault(to[:2], set()).add(to[2])

    # row-major order over (i, j) is topological: every edge advances i or j
    for i in range(n + 1):
        for j in range(m + 1):
            for used in sorted(cells.get((i, j), ()), key=lambda u: (len(u), sorted(u))):
                st = (i, j, used)
                if i < n and j < m and s[i] == h[j]:
                    relax(st, (i + 1, j + 1, frozenset()), (0, 0), None)
                for a in range(0, min(max_phrase, n - i) + 1):
                    for b in range(0, min(max_phrase, m - j) + 1):
                        if a == 0 and b == 0:
                            continue
                        if a == b == 1 and s[i] == h[j]:
                            continue  # that is the match edge
                        nxt = (i + a, j + b, used if a == 0 else frozenset())
                        relax(st, nxt, (0, 1), None)
                for k in by_start.get(i, ()):
                    g = golds[k]
                    corr = g.correction
                    a, b = g.src_span[1] - i, len(corr)
                    if h[j:j + b] != corr or j + b > m:
                        continue
                    if a == 0:
                        if k in used:
                            continue
                        nxt = (i, j + b, used | {k})
                    else:
                        nxt = (i + a, j + b, frozenset())
                    relax(st, nxt, (-1, 1), k)

    finals = [(n, m, u) for u in cells[(n, m)]]
    end = min(finals, key=lambda st: best[st])
    neg_tp, n_edits = best[end]
    matched = []
    st = end
    while st in back:
        st, k = back[st]
        if k is not None:
            matched.append(k)
    tp = -neg_tp
    return M2Match(tp, n_edits - tp, len(golds) - tp, tuple(sorted(matched)))


def m2_score(
    src: Sequence[Token],
    hyp: Sequence[Token],
    gold_edits: Sequence[GoldEdit],
    max_phrase: int = 4,
) -> tuple[int, int, int]:
    r = m2_match(src, hyp, gold_edits, max_phrase)
    return r.tp, r.fp, r.fn


def m2_corpus_score(
    hyp_sentences: Sequence[Sequence[Token]],
    gold: Sequence[AnnotatedSentence],
    max_phrase: int = 4,
) -> ScoreReport:
    """Lattice scoring over a corpus. Per-category rows cover gold edits only (tp, fn)."""
    _check_sources(hyp_sentences, gold)
    reports = []
    for hyp, g in zip(hyp_sentences, gold):
        r = m2_match(g.source, hyp, g.annotations, max_phrase)
        cats: dict[str, Counts] = {}
        hit = set(r.matched)
        for k, (_, code) in enumerate(g.annotations):
            _bump(cats, code.category, tp=int(k in hit), fn=int(k not in hit))
        reports.append(ScoreReport(r.tp, r.fp, r.fn, dict(sorted(cats.items()))))
    return aggregate(reports)


# -- reporting ------------------------------------------------------------------

TABLE_HEADER = ["method", "errant_P", "errant_R", "errant_F0.5", "m2_P", "m2_R", "m2_F0.5"]


def table_row(method: str, errant: ScoreReport | None, m2: ScoreReport | None) -> list[str]:
    def cells(r):
        if r is None:
            return ["", "", ""]
        return [f"{100 * r.precision:.2f}", f"{100 * r.recall:.2f}", f"{100 * r.f_half:.2f}"]

    return [method] + cells(errant) + cells(m2)


def write_table_csv(rows: Iterable[Sequence[str]], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_HEADER)
        w.writerows(rows)
    return path
