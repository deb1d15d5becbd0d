"""Corpus building from Gutenberg-style HTML books."""

from __future__ import annotations

import hashlib
import html.parser
import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

from . import __version__
from .errors import UnreadableDocument
from .text import is_esperanto_word, tokenize

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.6
HEURISTIC_WORDS = 2000

# archive start/end marker lines and boilerplate containers
START_MARKERS = (r"\*\*\*\s*START OF (THE|THIS) PROJECT GUTENBERG",)
END_MARKERS = (r"\*\*\*\s*END OF (THE|THIS) PROJECT GUTENBERG", r"^End of (the )?Project Gutenberg")
BOILERPLATE_CLASSES = ("pg-boilerplate", "pg-header", "pg-footer", "pgheader", "pgfooter", "license")

_LANG_NAMES = {
    "esperanto": "eo", "english": "en", "french": "fr", "german": "de",
    "spanish": "es", "italian": "it", "portuguese": "pt", "russian": "ru",
    "polish": "pl", "dutch": "nl", "swedish": "sv", "hungarian": "hu",
    "czech": "cs", "chinese": "zh", "japanese": "ja", "latin": "la",
}

_BLOCK_TAGS = frozenset({
    "p", "div", "h1", "h2", "h3", "h4", "h5", "h6", "table", "ul", "ol", "li",
    "pre", "blockquote", "hr", "body", "section", "dl",
})
_SKIP_TAGS = frozenset({"script", "style", "head", "title"})
_VOID_TAGS = frozenset({"br", "img", "hr", "meta", "link", "input", "col", "area", "base", "wbr"})


def _lang_code(value: str) -> Optional[str]:
    v = value.strip().lower()
    if not v:
        return None
    if v in _LANG_NAMES:
        return _LANG_NAMES[v]
    code = re.split(r"[-_]", v)[0]
    if re.fullmatch(r"[a-z]{2,3}", code):
        return code
    return None


def _split_languages(value: str) -> set[str]:
    parts = re.split(r"\s*(?:,|;|/|\band\b|&)\s*", value.strip(), flags=re.I)
    return {c for c in (_lang_code(p) for p in parts) if c}


class _Scanner(html.parser.HTMLParser):
    """Forgiving single pass over the document.

    Collects declared languages, the title and paragraph texts. An unclosed
    paragraph ends at the next block-level tag. Text inside boilerplate
    containers, scripts and styles is ignored.
    """

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.attr_languages: list[str] = []
        self.meta_languages: list[str] = []
        self.title_parts: list[str] = []
        self.paragraphs: list[str] = []
        self.text_lines: list[str] = []
        self._stack: list[tuple[str, bool]] = []  # (tag, boilerplate)
        self._skip = 0
        self._in_title = False
        self._para: Optional[list[str]] = None
        self._para_boiler = False

    @property
    def _boiler(self) -> bool:
        return any(b for _, b in self._stack)

    def _close_para(self) -> None:
        if self._para is not None:
            text = " ".join("".join(self._para).split())
            if text and not self._para_boiler:
                self.paragraphs.append(text)
        self._para = None

    def handle_starttag(self, tag, attrs):
        a = {k.lower(): (v or "") for k, v in attrs}
        for key in ("lang", "xml:lang"):
            if a.get(key):
                code = _lang_code(a[key])
                if code and tag in ("html", "body"):
                    self.attr_languages.append(code)
        if tag == "meta":
            name = (a.get("name") or a.get("http-equiv") or a.get("property") or "").lower()
            if name in ("dc.language", "language", "content-language", "og:locale"):
                self.meta_languages.extend(sorted(_split_languages(a.get("content", ""))))
            return
        if tag in _VOID_TAGS:
            if tag == "br" and self._para is not None:
                self._para.append(" ")
            return
        if tag in _BLOCK_TAGS:
            self._close_para()
        classes = (a.get("class", "") + " " + a.get("id", "")).lower()
        boiler = any(c in classes for c in BOILERPLATE_CLASSES)
        self._stack.append((tag, boiler))
        if tag in _SKIP_TAGS:
            self._skip += 1
            if tag == "title":
                self._in_title = True
        if tag == "p":
            self._para = []
            self._para_boiler = self._boiler

    def handle_endtag(self, tag):
        if tag in _VOID_TAGS:
            return
        if tag == "p" or tag in _BLOCK_TAGS:
            self._close_para()
        # pop back to the matching open tag; stray end tags are ignored
        for k in range(len(self._stack) - 1, -1, -1):
            if self._stack[k][0] == tag:
                for t, _ in self._stack[k:]:
                    if t in _SKIP_TAGS:
                        self._skip -= 1
                    if t == "title":
                        self._in_title = False
                del self._stack[k:]
                break

    def handle_data(self, data):
        if self._in_title:
            self.title_parts.append(data)
        if self._skip:
            return
        self.text_lines.append(data)
        if self._para is not None:
            self._para.append(data)

    def close(self):
        super().close()
        self._close_para()


def _decode(doc: str | bytes) -> str:
    if isinstance(doc, str):
        return doc
    if not isinstance(doc, (bytes, bytearray)):
        raise UnreadableDocument(f"expected text or bytes, got {type(doc).__name__}")
    head = bytes(doc[:2048]).decode("ascii", "replace")
    m = re.search(r"charset=[\"']?([\w-]+)", head, flags=re.I)
    encodings = [m.group(1)] if m else []
    encodings.append("utf-8")
    for enc in encodings:
        try:
            return bytes(doc).decode(enc)
        except (LookupError, UnicodeDecodeError):
            continue
    raise UnreadableDocument("document is not valid text in its declared or a UTF-8 encoding")


def _scan(doc: str | bytes) -> _Scanner:
    text = _decode(doc)
    if "\x00" in text:
        raise UnreadableDocument("document contains binary data")
    sc = _Scanner()
    try:
        sc.feed(text)
        sc.close()
    except Exception as exc:  # HTMLParser is tolerant, this is a last resort
        raise UnreadableDocument(str(exc)) from exc
    return sc


@dataclass(frozen=True)
class LanguageGuess:
    tag: str  # "eo", another code, "mixed" or "und"
    confidence: float
    method: str  # "metadata" or "heuristic"


def _header_languages(lines: Iterable[str]) -> set[str]:
    out: set[str] = set()
    for chunk in lines:
        for m in re.finditer(r"^\s*Language:\s*(.+?)\s*$", chunk, flags=re.M):
            out |= _split_languages(m.group(1))
    return out


def _trim_markers(paragraphs: list[str], start=START_MARKERS, end=END_MARKERS) -> list[str]:
    start_re = [re.compile(p, re.I | re.M) for p in start]
    end_re = [re.compile(p, re.I | re.M) for p in end]
    first, last = 0, len(paragraphs)
    for i, p in enumerate(paragraphs):
        if any(r.search(p) for r in start_re):
            first = i + 1
            break
    for i in range(first, len(paragraphs)):
        if any(r.search(paragraphs[i]) for r in end_re):
            last = i
            break
    return paragraphs[first:last]


def esperanto_ratio(text: str, limit: int = HEURISTIC_WORDS) -> tuple[float, int]:
    words = [t for t in tokenize(text) if t.kind == "word"][:limit]
    if not words:
        return 0.0, 0
    return sum(is_esperanto_word(t) for t in words) / len(words), len(words)


def _detect(sc: _Scanner, threshold: float) -> LanguageGuess:
    # most specific source wins: archive header, then meta tags, then lang attributes
    for declared in (_header_languages(sc.text_lines[:400]), set(sc.meta_languages), set(sc.attr_languages)):
        if len(declared) > 1:
            return LanguageGuess("mixed", 1.0, "metadata")
        if declared:
            return LanguageGuess(declared.pop(), 1.0, "metadata")
    body = "\n".join(_trim_markers(sc.paragraphs)) or " ".join(sc.text_lines)
    ratio, n = esperanto_ratio(body)
    if n and ratio >= threshold:
        return LanguageGuess("eo", ratio, "heuristic")
    return LanguageGuess("und", 1.0 - ratio if n else 0.0, "heuristic")


def detect_language(doc: str | bytes, threshold: float = DEFAULT_THRESHOLD) -> LanguageGuess:
    """Declared language metadata first, then the share of Esperanto-looking words.

    Several declared languages give ``mixed``. Without metadata, at least
    ``threshold`` of the first 2000 words must pass the lexical test.
    """
    return _detect(_scan(doc), threshold)


def extract_paragraphs(doc: str | bytes) -> list[str]:
    """Text of ``<p>`` elements in order, without licence boilerplate."""
    return _trim_markers(_scan(doc).paragraphs)


# -- corpus ---------------------------------------------------------------------

@dataclass(frozen=True)
class BookEntry:
    id: str
    title: str
    source: str
    language: str
    accepted: bool
    paragraph_count: int
    byte_count: int
    status: str  # accepted, rejected, failed
    error: str = ""


@dataclass(frozen=True)
class CorpusManifest:
    books: tuple[BookEntry, ...]
    created_at: str
    toolkit_version: str = __version__

    @property
    def accepted(self) -> int:
        return sum(b.status == "accepted" for b in self.books)

    @property
    def rejected(self) -> int:
        return sum(b.status == "rejected" for b in self.books)

    @property
    def failed(self) -> int:
        return sum(b.status == "failed" for b in self.books)

    def to_json(self) -> str:
        data = {
            "created_at": self.created_at,
            "toolkit_version": self.toolkit_version,
            "counts": {"accepted": self.accepted, "rejected": self.rejected, "failed": self.failed},
            "books": [asdict(b) for b in self.books],
        }
        return json.dumps(data, ensure_ascii=False, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CorpusManifest":
        data = json.loads(text)
        return cls(tuple(BookEntry(**b) for b in data["books"]), data["created_at"], data["toolkit_version"])


def _timestamp() -> str:
    # SOURCE_DATE_EPOCH makes manifests reproducible
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.replace(microsecond=0).isoformat()


def _is_url(s: str) -> bool:
    return s.startswith(("http://", "https://"))


def book_id(source: str) -> str:
    name = source.rstrip("/").rsplit("/", 1)[-1]
    stem = re.sub(r"\.(html?|xhtml|txt)$", "", name, flags=re.I)
    stem = re.sub(r"[^\w.-]+", "_", stem).strip("._") or "book"
    if _is_url(source):
        stem += "-" + hashlib.sha256(source.encode()).hexdigest()[:8]
    return stem


@dataclass
class Fetcher:
    """Rate-limited HTTP downloads with an on-disk cache, so interrupted runs resume."""

    cache_dir: Path
    rate_limit: float = 1.0  # requests per second, 0 disables
    max_connections: int = 2
    timeout: float = 30.0
    client: object = None
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _sem: threading.Semaphore = field(init=False, repr=False)
    _last: float = 0.0

    def __post_init__(self) -> None:
        self.cache_dir = Path(self.cache_dir)
        self._sem = threading.Semaphore(max(1, self.max_connections))

    def _wait_turn(self) -> None:
        if self.rate_limit <= 0:
            return
        with self._lock:
            gap = 1.0 / self.rate_limit
            now = time.monotonic()
            delay = self._last + gap - now
            if delay > 0:
                time.sleep(delay)
            self._last = max(now, self._last + gap)

    def get(self, url: str) -> bytes:
        path = self.cache_dir / (hashlib.sha256(url.encode()).hexdigest() + ".html")
        if path.exists():
            return path.read_bytes()
        import httpx

        with self._sem:
            self._wait_turn()
            if self.client is not None:
                resp = self.client.get(url, timeout=self.timeout)
            else:
                resp = httpx.get(url, timeout=self.timeout, follow_redirects=True)
            resp.raise_for_status()
            data = resp.content
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".part")
        tmp.write_bytes(data)
        tmp.replace(path)
        return data


def _title(sc: _Scanner, fallback: str) -> str:
    t = " ".join("".join(sc.title_parts).split())
    if not t:
        for chunk in sc.text_lines[:400]:
            m = re.search(r"^\s*Title:\s*(.+?)\s*$", chunk, flags=re.M)
            if m:
                return m.group(1)
    return t or fallback


def _process(source: str, corpus_dir: Path, threshold: float, fetcher: Optional[Fetcher]) -> BookEntry:
    bid = book_id(source)
    try:
        if _is_url(source):
            if fetcher is None:
                raise UnreadableDocument("URL input needs fetching enabled")
            raw = fetcher.get(source)
        else:
            try:
                raw = Path(source).read_bytes()
            except OSError as exc:
                raise UnreadableDocument(str(exc)) from exc
        sc = _scan(raw)
        guess = _detect(sc, threshold)
        title = _title(sc, bid)
        if guess.tag != "eo":
            return BookEntry(bid, title, source, guess.tag, False, 0, 0, "rejected")
        paras = _trim_markers(sc.paragraphs)
        if not paras:
            return BookEntry(bid, title, source, guess.tag, False, 0, 0, "rejected", "no paragraphs")
        data = ("\n".join(paras) + "\n").encode("utf-8")
        out = corpus_dir / f"{bid}.txt"
        tmp = out.with_suffix(".txt.part")
        tmp.write_bytes(data)
        tmp.replace(out)
        return BookEntry(bid, title, source, guess.tag, True, len(paras), len(data), "accepted")
    except Exception as exc:  # recorded, never aborts the batch
        log.warning("failed on %s: %s", source, exc)
        return BookEntry(bid, bid, source, "", False, 0, 0, "failed", f"{type(exc).__name__}: {exc}")


def read_inputs(paths: Sequence[str | Path]) -> list[str]:
    """Expand directories to their HTML files and URL list files to their URLs."""
    out: list[str] = []
    for p in paths:
        s = str(p)
        if _is_url(s):
            out.append(s)
            continue
        path = Path(s)
        if path.is_dir():
            out.extend(str(f) for f in sorted(path.iterdir()) if f.suffix.lower() in (".html", ".htm", ".xhtml"))
        elif path.suffix.lower() in (".txt", ".lst", ".urls") and path.exists():
            for line in path.read_text(encoding="utf-8").splitlines():
                line = line.strip()
                if line and not line.startswith("#"):
                    out.append(line)
        else:
            out.append(s)
    return out


def build_corpus(
    inputs: Sequence[str | Path],
    out_dir: str | Path,
    *,
    lang_threshold: float = DEFAULT_THRESHOLD,
    workers: int = 4,
    fetch: bool = False,
    rate_limit: float = 1.0,
    cache_dir: str | Path | None = None,
    client=None,
) -> CorpusManifest:
    """Write ``corpus/<id>.txt`` for each accepted book and ``manifest.json``."""
    out = Path(out_dir)
    corpus_dir = out / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    sources = read_inputs(inputs)
    fetcher = None
    if fetch:
        fetcher = Fetcher(Path(cache_dir) if cache_dir else out / "cache", rate_limit, client=client)

    ids: dict[str, int] = {}
    for s in sources:
        ids[book_id(s)] = ids.get(book_id(s), 0) + 1
    dupes = sorted(k for k, n in ids.items() if n > 1)
    if dupes:
        raise UnreadableDocument(f"inputs map to the same book id: {', '.join(dupes)}")

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        books = list(pool.map(lambda s: _process(s, corpus_dir, lang_threshold, fetcher), sources))

    manifest = CorpusManifest(tuple(books), _timestamp())
    (out / "manifest.json").write_text(manifest.to_json(), encoding="utf-8", newline="\n")
    return manifest
