"""Few-shot prompting of a chat-completion endpoint, with caching, and scoring of the replies."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, Sequence

import httpx

from .classify import AnnotatedSentence, annotate_tokens
from .errors import EndpointUnreachable, InputError, MalformedResponse, MissingExamples, QuotaExceeded
from .score import ScoreReport, errant_score, m2_corpus_score, table_row, write_table_csv
from .text import normalize_orthography, tokenize

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

SHOTS = (0, 1, 3, 5)
_PLACEHOLDERS = ("SOURCE_SENTENCE", "TARGET_SENTENCE", "INPUT_SENTENCE")
_PLACEHOLDER_RE = re.compile("|".join(_PLACEHOLDERS))


def _fill(text: str, values: dict[str, str]) -> str:
    # one pass, so placeholder-like text inside sentences is left alone
    return _PLACEHOLDER_RE.sub(lambda m: values.get(m.group(0), m.group(0)), text)


@dataclass(frozen=True)
class PromptTemplate:
    shots: int
    instruction: str
    examples: tuple[tuple[str, str], ...] = ()
    example_format: str = "Source: SOURCE_SENTENCE\nTarget: TARGET_SENTENCE"
    input_format: str = "Source: INPUT_SENTENCE\nTarget:"

    def __post_init__(self) -> None:
        if self.shots not in SHOTS:
            raise InputError(f"shots must be one of {SHOTS}")

    @classmethod
    def parse(cls, text: str, shots: int = 0, examples: Sequence[tuple[str, str]] = ()) -> "PromptTemplate":
        sections: dict[str, list[str]] = {}
        current = None
        for line in text.splitlines():
            if line.startswith("#"):
                continue
            m = re.fullmatch(r"\[(\w+)\]\s*", line)
            if m:
                current = m.group(1)
                sections[current] = []
            elif current is not None:
                sections[current].append(line)
        missing = {"instruction", "example", "input"} - set(sections)
        if missing:
            raise InputError(f"prompt template lacks section(s): {', '.join(sorted(missing))}")

        def body(name):
            return "\n".join(sections[name]).strip("\n")

        return cls(shots, body("instruction"), tuple((s, t) for s, t in examples),
                   body("example"), body("input"))

    @classmethod
    def load(cls, path: str | Path | None = None, shots: int = 0,
             examples: Sequence[tuple[str, str]] = ()) -> "PromptTemplate":
        if path is None:
            text = resources.files("eogec").joinpath("data").joinpath("prompt_template.txt").read_text(encoding="utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        return cls.parse(text, shots, examples)

    def with_shots(self, shots: int) -> "PromptTemplate":
        return replace(self, shots=shots)


def build_prompt(template: PromptTemplate, sentence: str) -> str:
    if template.shots > len(template.examples):
        raise MissingExamples(f"{template.shots}-shot prompt needs {template.shots} example pairs, "
                              f"got {len(template.examples)}")
    blocks = [template.instruction]
    for src, tgt in template.examples[: template.shots]:
        blocks.append(_fill(template.example_format, {"SOURCE_SENTENCE": src, "TARGET_SENTENCE": tgt}))
    blocks.append(_fill(template.input_format, {"INPUT_SENTENCE": sentence}))
    return "\n\n".join(b for b in blocks if b)


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


# -- configuration -----------------------------------------------------------------

@dataclass(frozen=True)
class EndpointConfig:
    url: str
    model: str = "gpt-4"
    api_key: str = field(default="", repr=False)
    temperature: float = 0.0
    max_retries: int = 3
    backoff: float = 0.5
    backoff_cap: float = 8.0
    timeout: float = 60.0
    concurrency: int = 4
    cache_dir: Optional[str] = None

    def public(self) -> dict:
        """Settings safe to log or store; the credential is left out."""
        d = asdict(self)
        d.pop("api_key")
        return d

    @classmethod
    def resolve(cls, config: Optional[dict] = None, env: Optional[dict] = None, **overrides) -> "EndpointConfig":
        """Merge a config mapping, ``EOG_API_URL``/``EOG_API_KEY`` and explicit overrides (last wins)."""
        env = os.environ if env is None else env
        values: dict = {}
        for k, v in (config or {}).items():
            if k in cls.__dataclass_fields__:
                values[k] = v
        if env.get("EOG_API_URL"):
            values["url"] = env["EOG_API_URL"]
        if env.get("EOG_API_KEY"):
            values["api_key"] = env["EOG_API_KEY"]
        values.update({k: v for k, v in overrides.items() if v is not None})
        if not values.get("url"):
            raise InputError("no endpoint URL: set EOG_API_URL or 'url' in the config file")
        return cls(**values)


def load_config(path: str | Path) -> dict:
    """Read a flat TOML or JSON settings file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() == ".json":
            return json.loads(text)
        return tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


# -- responses ----------------------------------------------------------------------

_QUOTES = "\"'“”„«»‘’‚`"
_LABEL_RE = re.compile(r"^(?:target|correction|corrected sentence|corrected)\s*:\s*", re.I)


def extract_correction(raw: str, strict: bool = False) -> str:
    """First non-empty line of the reply, without labels, quotes or outer whitespace."""
    lines = [ln.strip() for ln in raw.splitlines() if ln.strip()]
    if not lines:
        raise MalformedResponse("empty response")
    if strict and len(lines) > 1:
        raise MalformedResponse(f"expected one line, got {len(lines)}")
    line = _LABEL_RE.sub("", lines[0]).strip()
    # only paired wrappers, so a final elision apostrophe survives
    while len(line) >= 2 and line[0] in _QUOTES and line[-1] in _QUOTES:
        line = line[1:-1].strip()
    if not line:
        raise MalformedResponse("response holds no sentence")
    return line


def _message_content(payload) -> str:
    try:
        content = payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise MalformedResponse("payload is not a chat-completion response") from None
    if not isinstance(content, str):
        raise MalformedResponse("message content is not text")
    return content


# -- batch run ----------------------------------------------------------------------

@dataclass(frozen=True)
class RunRecord:
    model: str
    shots: int
    input: str
    prompt_hash: str
    raw_response: str
    correction: str
    latency: float
    retries: int
    status: str = "ok"  # ok or failed
    error: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        return cls(**json.loads(text))


def cache_key(model: str, phash: str) -> str:
    return hashlib.sha256(f"{model}\x00{phash}".encode("utf-8")).hexdigest()


class _Retryable(Exception):
    def __init__(self, cause: Exception):
        super().__init__(str(cause))
        self.cause = cause


def _call(client: httpx.Client, cfg: EndpointConfig, prompt: str) -> str:
    headers = {"Content-Type": "application/json"}
    if cfg.api_key:
        headers["Authorization"] = f"Bearer {cfg.api_key}"
    body = {
        "model": cfg.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": cfg.temperature,
    }
    try:
        resp = client.post(cfg.url, json=body, headers=headers, timeout=cfg.timeout)
    except httpx.HTTPError as exc:
        raise _Retryable(EndpointUnreachable(f"{type(exc).__name__}: {exc}")) from None
    if resp.status_code == 429:
        raise _Retryable(QuotaExceeded("rate limit or quota exceeded (HTTP 429)"))
    if resp.status_code >= 500:
        raise _Retryable(EndpointUnreachable(f"server error HTTP {resp.status_code}"))
    if resp.status_code >= 400:
        raise EndpointUnreachable(f"request rejected with HTTP {resp.status_code}")
    try:
        payload = resp.json()
    except ValueError:
        raise MalformedResponse("response body is not JSON") from None
    return _message_content(payload)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def _one(
    sentence: str,
    template: PromptTemplate,
    cfg: EndpointConfig,
    client: httpx.Client,
    cache: Optional[Path],
    strict: bool,
    sleep: Callable[[float], None],
) -> RunRecord:
    prompt = build_prompt(template, sentence)
    phash = prompt_hash(prompt)
    path = cache / f"{cache_key(cfg.model, phash)}.json" if cache else None
    if path is not None and path.exists():
        return RunRecord.from_json(path.read_text(encoding="utf-8"))

    retries = 0
    start = time.monotonic()
    while True:
        try:
            raw = _call(client, cfg, prompt)
            break
        except _Retryable as exc:
            if retries >= cfg.max_retries:
                err = exc.cause
                log.warning("giving up on %r after %d retries: %s", sentence[:40], retries, err)
                return RunRecord(cfg.model, template.shots, sentence, phash, "", "",
                                 round(time.monotonic() - start, 3), retries, "failed",
                                 f"{type(err).__name__}: {err}")
            sleep(min(cfg.backoff * (2 ** retries), cfg.backoff_cap))
            retries += 1
        except (EndpointUnreachable, MalformedResponse) as exc:
            return RunRecord(cfg.model, template.shots, sentence, phash, "", "",
                             round(time.monotonic() - start, 3), retries, "failed",
                             f"{type(exc).__name__}: {exc}")
    latency = round(time.monotonic() - start, 3)
    try:
        correction = extract_correction(raw, strict)
    except MalformedResponse as exc:
        return RunRecord(cfg.model, template.shots, sentence, phash, raw, "", latency, retries,
                         "failed", f"MalformedResponse: {exc}")
    record = RunRecord(cfg.model, template.shots, sentence, phash, raw, correction, latency, retries)
    if path is not None:
        _atomic_write(path, record.to_json())
    return record


def run_batch(
    sentences: Sequence[str],
    template: PromptTemplate,
    config: EndpointConfig,
    *,
    client: Optional[httpx.Client] = None,
    strict: bool = False,
    sleep: Callable[[float], None] = time.sleep,
) -> list[RunRecord]:
    """One record per sentence, in input order. Only successful replies are cached."""
    cache = Path(config.cache_dir) if config.cache_dir else None
    own = client is None
    client = client or httpx.Client()
    try:
        with ThreadPoolExecutor(max_workers=max(1, config.concurrency)) as pool:
            return list(pool.map(
                lambda s: _one(s, template, config, client, cache, strict, sleep), sentences))
    finally:
        if own:
            client.close()


# -- evaluation ---------------------------------------------------------------------

def _tokens(text: str):
    return tuple(tokenize(normalize_orthography(text)))


def evaluate_run(
    records: Sequence[RunRecord],
    gold: Sequence[AnnotatedSentence],
    out_dir: str | Path | None = None,
    method: str = "run",
    mode: str = "span",
) -> tuple[ScoreReport, ScoreReport]:
    """Score corrections against gold with both scorers.

    A failed record counts as leaving its sentence unchanged.
    """
    if len(records) != len(gold):
        raise InputError(f"{len(records)} records for {len(gold)} gold sentences")
    hyp_tokens = []
    hyp_sents = []
    for rec, g in zip(records, gold):
        toks = _tokens(rec.correction) if rec.status == "ok" else tuple(g.source)
        hyp_tokens.append(toks)
        hyp_sents.append(annotate_tokens(g.source, toks))
    errant = errant_score(hyp_sents, gold, mode)
    m2 = m2_corpus_score(hyp_tokens, gold)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_table_csv([table_row(method, errant, m2)], out / "scores.csv")
        (out / "run_records.jsonl").write_text(
            "".join(r.to_json() + "\n" for r in records), encoding="utf-8", newline="\n")
    return errant, m2
