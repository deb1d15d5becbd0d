import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from eogec.align import (
    COST_SCALE,
    Edit,
    alignment_cost,
    apply_edits,
    char_distance,
    extract_edits,
    script_cost,
    substitution_cost,
)
from eogec.errors import OverlappingEdits, SpanOutOfRange
from eogec.morph import default_lexicon
from eogec.text import Token, tokenize

from oracles import brute_force_min_cost, min_edit_cost

VOCAB = ["hundo", "hundon", "hundoj", "kato", "katon", "la", "en", "al", "mi", "vi",
         "loĝas", "loĝi", "domo", "domoj", ",", ".", "kie", "kiu", "bela", "belan"]
LEX = default_lexicon()


def toks(words):
    return tuple(Token.make(w) for w in words)


def oracle_cost(src, tgt):
    return min_edit_cost([t.surface for t in src], [t.surface for t in tgt],
                         lambda i, j: substitution_cost(src[i], tgt[j], LEX))


seqs = st.lists(st.sampled_from(VOCAB), max_size=8)


@given(seqs, seqs)
def test_extract_cost_is_minimal(a, b):
    src, tgt = toks(a), toks(b)
    edits = extract_edits(src, tgt, LEX)
    expected = oracle_cost(src, tgt) / COST_SCALE
    assert script_cost(edits) == pytest.approx(expected)
    assert alignment_cost(src, tgt, LEX) == pytest.approx(expected)


@given(seqs, seqs)
def test_apply_extract_is_identity(a, b):
    src, tgt = toks(a), toks(b)
    out = apply_edits(src, extract_edits(src, tgt, LEX))
    assert [t.surface for t in out] == list(b)


@given(seqs, seqs)
def test_edits_ordered_and_disjoint(a, b):
    edits = extract_edits(toks(a), toks(b), LEX)
    pos = 0
    for e in edits:
        assert e.src_span[0] >= pos
        pos = e.src_span[1]


@given(seqs)
def test_identity_has_no_edits(a):
    assert extract_edits(toks(a), toks(a), LEX) == []


@given(seqs, seqs)
def test_missing_unnecessary_symmetry(a, b):
    fwd = extract_edits(toks(a), toks(b), LEX)
    back = extract_edits(toks(b), toks(a), LEX)
    assert sum(e.op == "Missing" for e in fwd) == sum(e.op == "Unnecessary" for e in back)
    assert sum(e.op == "Unnecessary" for e in fwd) == sum(e.op == "Missing" for e in back)


def test_memoized_oracle_agrees_with_enumeration():
    rng = random.Random(7)
    small = ["a", "b", "c"]
    for _ in range(60):
        s = [rng.choice(small) for _ in range(rng.randint(0, 3))]
        t = [rng.choice(small) for _ in range(rng.randint(0, 3))]
        sub = lambda i, j: 0 if s[i] == t[j] else 11
        assert min_edit_cost(s, t, sub) == brute_force_min_cost(s, t, sub)


def test_transposition():
    edits = extract_edits(toks(["mi", "vi", "."]), toks(["vi", "mi", "."]), LEX)
    assert [e.op for e in edits] == ["Transpose"]
    assert edits[0].cost == pytest.approx(0.9)


def test_merge_and_split():
    src = tuple(tokenize("Mi ŝatas la ĉef urbon ."))
    tgt = tuple(tokenize("Mi ŝatas la ĉefurbon ."))
    edits = extract_edits(src, tgt, LEX)
    assert [e.op for e in edits] == ["Merge"]
    assert edits[0].src_span == (3, 5)
    back = extract_edits(tgt, src, LEX)
    assert [e.op for e in back] == ["Replace"]
    assert len(back[0].tgt_tokens) == 2


def test_substitution_costs():
    assert substitution_cost(Token.make("hundo"), Token.make("hundo")) == 0
    assert substitution_cost(Token.make("hundo"), Token.make("hundojn")) == 4
    assert substitution_cost(Token.make("regjono"), Token.make("regiono")) == 6
    assert substitution_cost(Token.make("al"), Token.make("en")) == 11


def test_char_distance():
    assert char_distance("", "") == 0.0
    assert char_distance("abc", "") == 1.0
    assert char_distance("kato", "kato") == 0.0
    assert char_distance("kato", "kado") == 0.25


def test_apply_errors():
    src = toks(["a", "b"])
    with pytest.raises(SpanOutOfRange):
        apply_edits(src, [Edit((1, 3), (1, 1), "Unnecessary", toks(["b", "c"]))])
    e1 = Edit((0, 2), (0, 0), "Unnecessary", src)
    e2 = Edit((1, 2), (0, 0), "Unnecessary", toks(["b"]))
    with pytest.raises(OverlappingEdits):
        apply_edits(src, [e1, e2])


def test_edit_length_check():
    with pytest.raises(ValueError):
        Edit((0, 2), (0, 1), "Replace", toks(["a"]), toks(["b"]))


def test_roundtrip_10k_seeded():
    rng = random.Random(99)
    for _ in range(10_000):
        a = [rng.choice(VOCAB) for _ in range(rng.randint(0, 8))]
        b = [rng.choice(VOCAB) for _ in range(rng.randint(0, 8))]
        out = apply_edits(toks(a), extract_edits(toks(a), toks(b), LEX))
        assert [t.surface for t in out] == b
