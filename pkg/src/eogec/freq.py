"""Word and letter statistics: frequencies, entropy, Zipf fitting."""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from scipy import stats

from .errors import EmptyDistribution, InsufficientData
from .tables import FreqTable
from .text import ALPHABET, ENGLISH_LETTERS, is_esperanto_word, letter_frequencies, tokenize

__all__ = [
    "ZipfFit",
    "word_frequencies",
    "filter_stopwords",
    "entropy",
    "zipf_fit",
    "fit_power_law",
    "compare_letter_frequencies",
    "read_freq_csv",
    "write_word_freq_csv",
    "write_letter_freq_csv",
    "write_zipf_csv",
    "write_loglog_csv",
]


def _lines(corpus: str | Iterable[str]) -> Iterable[str]:
    return [corpus] if isinstance(corpus, str) else corpus


def word_frequencies(
    corpus: str | Iterable[str],
    esperanto_only: bool = False,
    *,
    lowercase: bool = True,
    numerals: bool = False,
) -> FreqTable:
    """Count word tokens in a text or a stream of lines.

    Keys are the lowercased surface forms. Numbers are skipped unless
    ``numerals`` is set; punctuation is never counted.
    """
    counts: Counter[str] = Counter()
    for line in _lines(corpus):
        for tok in tokenize(line):
            if tok.kind == "punctuation" or (tok.kind == "number" and not numerals):
                continue
            if esperanto_only and tok.kind == "word" and not is_esperanto_word(tok):
                continue
            counts[tok.surface.lower() if lowercase else tok.surface] += 1
    return FreqTable.from_counts(counts)


def filter_stopwords(table: FreqTable, stoplist: Iterable[str]) -> FreqTable:
    stop = set(stoplist)
    return FreqTable.from_counts([(it.key, it.count) for it in table if it.key not in stop])


def entropy(table: FreqTable) -> float:
    """Shannon entropy in bits."""
    if table.total <= 0:
        raise EmptyDistribution("entropy of an empty distribution")
    h = 0.0
    for it in table:
        p = it.count / table.total
        h -= p * math.log2(p)
    return max(h, 0.0)


@dataclass(frozen=True)
class ZipfFit:
    """ln f = log_k - a ln r. ``log_k`` is a natural logarithm."""

    log_k: float
    a: float
    r_squared: float
    std_err: float
    n_points: int


def fit_power_law(ranks: Sequence[float], freqs: Sequence[float]) -> ZipfFit:
    """Least squares line through (ln rank, ln freq); frequencies may be real-valued.

    When every frequency is equal the slope is 0 and r² is reported as 0.
    """
    if len(ranks) != len(freqs):
        raise ValueError("ranks and freqs differ in length")
    if len(ranks) < 3:
        raise InsufficientData("a fit needs at least 3 points")
    if min(freqs) <= 0 or min(ranks) <= 0:
        raise InsufficientData("ranks and frequencies must be positive")
    x = [math.log(r) for r in ranks]
    y = [math.log(f) for f in freqs]
    if max(y) == min(y):
        return ZipfFit(y[0], 0.0, 0.0, 0.0, len(y))
    res = stats.linregress(x, y)
    r2 = min(max(res.rvalue ** 2, 0.0), 1.0)
    return ZipfFit(float(res.intercept), float(-res.slope), float(r2), float(res.stderr), len(y))


def zipf_fit(table: FreqTable, top_n: int = 100) -> ZipfFit:
    """Fit ln f = log_k - a ln r over ranks 1..``top_n`` of ``table``."""
    if top_n < 3:
        raise InsufficientData("top_n must be at least 3")
    items = [it for it in table if it.count > 0][:top_n]
    if len(items) < top_n:
        raise InsufficientData(f"need {top_n} nonzero entries, table has {len(items)}")
    return fit_power_law([it.rank for it in items], [it.count for it in items])


@dataclass(frozen=True)
class LetterComparison:
    letters: tuple[str, ...]
    counts_a: dict[str, int]
    counts_b: dict[str, int]
    total_a: int
    total_b: int

    def relfreq_a(self, letter: str) -> float:
        return self.counts_a.get(letter, 0) / self.total_a if self.total_a else 0.0

    def relfreq_b(self, letter: str) -> float:
        return self.counts_b.get(letter, 0) / self.total_b if self.total_b else 0.0

    def rows(self) -> list[tuple[str, int, float, int, float]]:
        return [
            (l, self.counts_a.get(l, 0), self.relfreq_a(l), self.counts_b.get(l, 0), self.relfreq_b(l))
            for l in self.letters
        ]


def _union_letters(a: Sequence[str], b: Sequence[str]) -> tuple[str, ...]:
    seen = dict.fromkeys(a)
    seen.update(dict.fromkeys(b))
    return tuple(seen)


def compare_letter_frequencies(
    corpus_a: str,
    corpus_b: str,
    letters_a: Sequence[str] = ALPHABET.letters,
    letters_b: Sequence[str] = ENGLISH_LETTERS,
) -> LetterComparison:
    """Per-letter frequencies of two texts over the union of their alphabets."""
    union = _union_letters(letters_a, letters_b)
    ta = letter_frequencies(corpus_a, tuple(letters_a))
    tb = letter_frequencies(corpus_b, tuple(letters_b))
    return LetterComparison(union, ta.counts(), tb.counts(), ta.total, tb.total)


# -- CSV ------------------------------------------------------------------------

def _writer(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    fh = path.open("w", newline="", encoding="utf-8")
    return fh, csv.writer(fh, lineterminator="\n")


def write_word_freq_csv(table: FreqTable, path: str | Path) -> Path:
    path = Path(path)
    fh, w = _writer(path)
    with fh:
        w.writerow(["rank", "word", "count"])
        for it in table:
            w.writerow([it.rank, it.key, it.count])
    return path


def read_freq_csv(path: str | Path) -> FreqTable:
    """Read a table written by :func:`write_word_freq_csv` (or any CSV with word/count columns)."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        key = next((f for f in ("word", "key", "letter") if f in fields), None)
        if key is None or "count" not in fields:
            raise InsufficientData(f"{path}: expected a word and a count column")
        return FreqTable.from_counts([(row[key], int(row["count"])) for row in reader])


def write_letter_freq_csv(cmp: LetterComparison, path: str | Path, names=("a", "b")) -> Path:
    path = Path(path)
    fh, w = _writer(path)
    na, nb = names
    with fh:
        w.writerow(["letter", f"count_{na}", f"relfreq_{na}", f"count_{nb}", f"relfreq_{nb}"])
        for letter, ca, ra, cb, rb in cmp.rows():
            w.writerow([letter, ca, f"{ra:.6f}", cb, f"{rb:.6f}"])
    return path


def write_single_letter_csv(table: FreqTable, letters: Sequence[str], path: str | Path) -> Path:
    path = Path(path)
    fh, w = _writer(path)
    counts = table.counts()
    with fh:
        w.writerow(["letter", "count", "relfreq"])
        for letter in letters:
            c = counts.get(letter, 0)
            w.writerow([letter, c, f"{c / table.total:.6f}" if table.total else "0.000000"])
    return path


def write_zipf_csv(fit: ZipfFit, path: str | Path) -> Path:
    path = Path(path)
    fh, w = _writer(path)
    with fh:
        # log base is e
        w.writerow(["log_k", "a", "r2", "stderr", "n"])
        w.writerow([f"{fit.log_k:.6f}", f"{fit.a:.6f}", f"{fit.r_squared:.6f}", f"{fit.std_err:.6e}", fit.n_points])
    return path


def write_loglog_csv(table: FreqTable, path: str | Path, top_n: int | None = None) -> Path:
    """Plot data for the rank/frequency scatter, raw and natural-log scaled."""
    path = Path(path)
    fh, w = _writer(path)
    items = list(table)[:top_n] if top_n else list(table)
    with fh:
        w.writerow(["rank", "freq", "ln_rank", "ln_freq"])
        for it in items:
            w.writerow([it.rank, it.count, f"{math.log(it.rank):.6f}", f"{math.log(it.count):.6f}"])
    return path
