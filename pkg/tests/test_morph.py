import pytest

from eogec.morph import (
    TABLE_ENDINGS,
    TABLE_PREFIXES,
    analyze_table_word,
    analyze_word,
    default_lexicon,
    enumerate_table_words,
)

from oracles import all_table_candidates, legal_table_inflections


def test_45_base_forms():
    forms = enumerate_table_words()
    assert len(forms) == 45
    assert len(set(forms)) == 45
    assert {p + e for p in TABLE_PREFIXES for e in TABLE_ENDINGS} == set(forms)


def test_accepted_inflections_match_oracle():
    accepted = {c for c in all_table_candidates() if analyze_table_word(c) is not None}
    assert accepted == legal_table_inflections()


@pytest.mark.parametrize("word", ["kiajn", "tiun", "ĉiujn", "nenien", "ien", "kion", "tiaj"])
def test_legal_inflections(word):
    assert analyze_table_word(word) is not None


@pytest.mark.parametrize("word", ["kioj", "tielj", "kialn", "tiomn", "kiunj", "kiesn", "ĉiam j"])
def test_illegal_inflections(word):
    assert analyze_table_word(word) is None


def test_table_word_fields():
    tw = analyze_table_word("ĉiujn")
    assert (tw.prefix, tw.ending, tw.plural, tw.accusative) == ("ĉi", "u", True, True)
    assert tw.base == "ĉiu"


@pytest.mark.parametrize("word,pos,extra", [
    ("hundojn", "Noun", {"case": "Accusative", "number": "Plural"}),
    ("bela", "Adjective", {"case": "Nominative", "number": "Singular"}),
    ("rapide", "Adverb", {}),
    ("loĝas", "Verb", {"verb_form": "Present"}),
    ("loĝis", "Verb", {"verb_form": "Past"}),
    ("loĝos", "Verb", {"verb_form": "Future"}),
    ("loĝus", "Verb", {"verb_form": "Conditional"}),
    ("loĝi", "Verb", {"verb_form": "Infinitive"}),
    ("kie", "Table", {}),
    ("al", "Preposition", {}),
    ("mi", "Pronoun", {}),
    ("kaj", "Conjunction", {}),
])
def test_analyze_word(word, pos, extra):
    a = analyze_word(word)[0]
    assert a.pos == pos
    for k, v in extra.items():
        assert getattr(a, k) == v


def test_affix_peeling():
    a = analyze_word("gefiloj")[0]
    assert a.root == "fil"
    assert "ge" in a.prefixes
    assert a.number == "Plural"
    b = analyze_word("malbelaj")[0]
    assert b.root == "bel" and b.prefixes == ("mal",)


def test_participle():
    a = analyze_word("legata")[0]
    assert a.participle == ("passive", "present")


def test_synthesize_roundtrip():
    for w in ["hundojn", "belaj", "rapide", "gefiloj", "malbelan", "loĝas"]:
        a = analyze_word(w)[0]
        assert a.synthesize() == w


def test_lexicon_closed_class():
    lex = default_lexicon()
    assert lex.is_closed_class("la")
    assert lex.is_closed_class("kiujn")
    assert not lex.is_closed_class("hundo")


def test_invariant_accusative_verb_rejected():
    from eogec.morph import MorphAnalysis
    with pytest.raises(AssertionError):
        MorphAnalysis(root="kur", pos="Verb", case="Accusative", verb_form="Present")


from hypothesis import given
from hypothesis import strategies as st

from eogec.morph import analyze
from eogec.text import ALPHABET, Token

letter_words = st.text(alphabet=st.sampled_from(ALPHABET.letters), min_size=1, max_size=12)


@given(letter_words)
def test_analyze_always_answers(word):
    out = analyze(Token.make(word))
    assert len(out) >= 1


@given(letter_words)
def test_inflection_roundtrip(word):
    top = analyze(Token.make(word))[0]
    if top.ending and not top.closed_class:
        assert top.synthesize() == word


@given(st.text(alphabet=st.sampled_from(list("iktĉnejoualsmj")), max_size=8))
def test_random_strings_against_table_oracle(word):
    assert (analyze_table_word(word) is not None) == (word in legal_table_inflections())


def test_verb_forms_from_sva_example():
    assert analyze(Token.make("loĝi"))[0].verb_form == "Infinitive"
    assert analyze(Token.make("loĝas"))[0].verb_form == "Present"
