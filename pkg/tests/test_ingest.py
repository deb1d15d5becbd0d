import json
from pathlib import Path

import httpx
import pytest

from eogec.errors import UnreadableDocument
from eogec.ingest import (
    CorpusManifest,
    book_id,
    build_corpus,
    detect_language,
    esperanto_ratio,
    extract_paragraphs,
    read_inputs,
)


@pytest.fixture
def books(fixtures):
    return fixtures / "books"


def test_header_language_wins(books):
    g = detect_language((books / "la_domo.html").read_bytes())
    assert (g.tag, g.method) == ("eo", "metadata")


def test_lang_attribute_and_legacy_charset(books):
    raw = (books / "vojagho.htm").read_bytes()
    assert detect_language(raw).tag == "eo"
    paras = extract_paragraphs(raw)
    assert len(paras) == 3
    assert paras[0].startswith("Ni vojaĝis tra la montoj")
    assert "ŝanĝiĝis" in paras[0]
    # unclosed <p> tags end at the next block
    assert paras[1].endswith("historiojn.")


def test_english_detected(books):
    assert detect_language((books / "english.html").read_bytes()).tag == "en"


def test_boilerplate_and_markers_removed(books):
    paras = extract_paragraphs((books / "la_domo.html").read_bytes())
    assert paras[0].startswith("Malnova domo")
    assert len(paras) == 3
    assert not any("Gutenberg" in p for p in paras)


def test_mixed_metadata():
    doc = '<html><head><meta name="dc.language" content="eo"><meta name="dc.language" content="fr"></head><body><p>x</p></body></html>'
    assert detect_language(doc).tag == "mixed"


def test_header_beats_html_lang():
    doc = '<html lang="en"><body><pre>Title: Fabeloj\nLanguage: Esperanto\n</pre><p>La hundo dormas.</p></body></html>'
    assert detect_language(doc).tag == "eo"


def test_heuristic_without_metadata():
    eo = "<p>" + "La hundo kuras en la granda ĝardeno kaj la kato dormas. " * 20 + "</p>"
    en = "<p>" + "The dog runs in the big garden while the cat sleeps. " * 20 + "</p>"
    assert detect_language(eo).method == "heuristic"
    assert detect_language(eo).tag == "eo"
    assert detect_language(en).tag == "und"
    ratio, n = esperanto_ratio("La hundo kaj the dog")
    assert n == 5 and ratio == pytest.approx(3 / 5)


def test_threshold_is_respected():
    half = "<p>" + "La hundo kuras the dog runs " * 10 + "</p>"
    assert detect_language(half, threshold=0.4).tag == "eo"
    assert detect_language(half, threshold=0.6).tag == "und"


def test_unreadable():
    with pytest.raises(UnreadableDocument):
        detect_language(b"\x00\x01\x02" * 100)


def test_book_ids():
    assert book_id("/x/y/La Domo.html") == "La_Domo"
    a = book_id("https://example.org/a/book.html")
    b = book_id("https://example.org/b/book.html")
    assert a != b and a.startswith("book-")


def test_corpus_two_accepted_one_rejected(books, tmp_path):
    m = build_corpus([books], tmp_path / "out", workers=2)
    assert (m.accepted, m.rejected, m.failed) == (2, 1, 0)
    by_id = {b.id: b for b in m.books}
    assert by_id["english"].language == "en" and not by_id["english"].accepted
    text = (tmp_path / "out" / "corpus" / "la_domo.txt").read_text(encoding="utf-8")
    assert text.splitlines()[0].startswith("Malnova domo")
    assert by_id["la_domo"].title == "La Domo ĉe la Rivero"
    assert not (tmp_path / "out" / "corpus" / "english.txt").exists()


def test_rerun_is_byte_identical(books, tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    build_corpus([books], tmp_path / "a")
    build_corpus([books], tmp_path / "b", workers=1)
    build_corpus([books], tmp_path / "a")
    for rel in ["manifest.json", "corpus/la_domo.txt", "corpus/vojagho.txt"]:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
    m = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert m["created_at"].startswith("2023-11-14")


def test_manifest_roundtrip(books, tmp_path):
    m = build_corpus([books], tmp_path)
    again = CorpusManifest.from_json(m.to_json())
    assert again == m


def test_missing_file_is_recorded_not_fatal(books, tmp_path):
    m = build_corpus([books / "la_domo.html", tmp_path / "nope.html"], tmp_path / "out")
    assert (m.accepted, m.failed) == (1, 1)
    bad = [b for b in m.books if b.status == "failed"][0]
    assert bad.error


def test_duplicate_ids_rejected(books, tmp_path):
    other = tmp_path / "copy"
    other.mkdir()
    (other / "la_domo.html").write_bytes((books / "la_domo.html").read_bytes())
    with pytest.raises(UnreadableDocument):
        build_corpus([books / "la_domo.html", other / "la_domo.html"], tmp_path / "out")


def test_url_list_and_fetch_with_cache(books, tmp_path):
    body = (books / "la_domo.html").read_bytes()
    calls = []

    def handler(request):
        calls.append(str(request.url))
        if request.url.path.endswith("missing.html"):
            return httpx.Response(404)
        return httpx.Response(200, content=body)

    client = httpx.Client(transport=httpx.MockTransport(handler))
    urls = tmp_path / "urls.txt"
    urls.write_text("# books\nhttps://example.org/la_domo.html\nhttps://example.org/missing.html\n")
    assert read_inputs([urls]) == ["https://example.org/la_domo.html", "https://example.org/missing.html"]
    m = build_corpus([urls], tmp_path / "out", fetch=True, rate_limit=0, client=client)
    assert (m.accepted, m.failed) == (1, 1)
    assert len(calls) == 2
    m2 = build_corpus([urls], tmp_path / "out", fetch=True, rate_limit=0, client=client)
    # the good page came from the cache; the failed one is retried
    assert len(calls) == 3
    assert m2.accepted == 1


def test_url_without_fetch_fails_softly(tmp_path):
    m = build_corpus(["https://example.org/x.html"], tmp_path)
    assert m.failed == 1


def test_accepted_text_comes_from_html_paragraphs(books, tmp_path):
    m = build_corpus([books], tmp_path)
    for b in m.books:
        if not b.accepted:
            continue
        paras = set(extract_paragraphs(Path(b.source).read_bytes()))
        lines = (tmp_path / "corpus" / f"{b.id}.txt").read_text(encoding="utf-8").splitlines()
        assert lines and set(lines) <= paras
        assert len(lines) == b.paragraph_count
        assert not any("Gutenberg" in ln or "ebook" in ln.lower() for ln in lines)


def test_counts_reconcile(books, tmp_path):
    inputs = [books, tmp_path / "missing.html"]
    m = build_corpus(inputs, tmp_path / "o")
    assert m.accepted + m.rejected + m.failed == len(read_inputs(inputs)) == len(m.books)
