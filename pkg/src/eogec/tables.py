"""Ranked frequency tables shared by the letter and word statistics."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping


@dataclass(frozen=True)
class FreqItem:
    key: str
    count: int
    rank: int


@dataclass(frozen=True)
class FreqTable:
    """Counts ranked by descending count; ties broken by key (code point order)."""

    items: tuple[FreqItem, ...]
    total: int

    @classmethod
    def from_counts(cls, counts: Mapping[str, int] | Iterable[tuple[str, int]]) -> "FreqTable":
        pairs = counts.items() if isinstance(counts, Mapping) else counts
        kept = [(k, int(c)) for k, c in pairs if c > 0]
        kept.sort(key=lambda kc: (-kc[1], kc[0]))
        items = tuple(FreqItem(k, c, i) for i, (k, c) in enumerate(kept, start=1))
        return cls(items, sum(c for _, c in kept))

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __contains__(self, key: str) -> bool:
        return any(it.key == key for it in self.items)

    def counts(self) -> dict[str, int]:
        return {it.key: it.count for it in self.items}

    def relative(self) -> dict[str, float]:
        if not self.total:
            return {}
        return {it.key: it.count / self.total for it in self.items}

    def top(self, n: int) -> "FreqTable":
        return FreqTable.from_counts([(it.key, it.count) for it in self.items[:n]])

    def merge(self, other: "FreqTable") -> "FreqTable":
        # shard reduction: associative and commutative
        merged = Counter(self.counts())
        merged.update(other.counts())
        return FreqTable.from_counts(merged)
