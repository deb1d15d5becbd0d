"""Command line entry point.

Exit codes for every subcommand: 0 success, 1 bad input or usage, 2 an
internal invariant was violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import random
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .errors import EogecError, InputError, InvariantViolation

log = logging.getLogger("eogec")

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are input errors, exit 1
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise InputError(f"{path} is not UTF-8 text") from None


def _lines(path: str) -> list[str]:
    return [ln for ln in _read_text(path).splitlines()]


class _Out:
    """Destination for a single output: a file, or stdout when no path is given."""

    def __init__(self, path: Optional[str]):
        self.path = path

    def write(self, text: str) -> None:
        if self.path in (None, "-"):
            sys.stdout.write(text)
        else:
            p = Path(self.path)
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(text, encoding="utf-8", newline="\n")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg, file=sys.stderr)


def _stoplist(path: Optional[str]) -> Optional[frozenset[str]]:
    if not path:
        return None
    from .morph import read_word_list

    try:
        return read_word_list(path)
    except OSError as exc:
        raise InputError(f"cannot read stop list {path}: {exc.strerror or exc}") from None


# -- subcommands ----------------------------------------------------------------

def cmd_ingest(args) -> int:
    from .ingest import build_corpus

    m = build_corpus(args.inputs, args.out, lang_threshold=args.lang_threshold, workers=args.workers,
                     fetch=args.fetch, rate_limit=args.rate_limit, cache_dir=args.cache_dir)
    _say(args, f"{len(m.books)} inputs: {m.accepted} accepted, {m.rejected} rejected, {m.failed} failed")
    return EXIT_OK


def _alphabet(name: str) -> tuple[str, ...]:
    from .text import ALPHABET, ENGLISH_LETTERS

    return ALPHABET.letters if name == "eo" else ENGLISH_LETTERS


def cmd_letterfreq(args) -> int:
    from .freq import compare_letter_frequencies
    from .text import letter_frequencies

    text = _read_text(args.input)
    if args.compare:
        cmp = compare_letter_frequencies(text, _read_text(args.compare),
                                         _alphabet(args.alphabet), _alphabet(args.compare_alphabet))
        rows = [[l, ca, f"{ra:.6f}", cb, f"{rb:.6f}"] for l, ca, ra, cb, rb in cmp.rows()]
        _Out(args.out).write(_csv_text(["letter", "count_a", "relfreq_a", "count_b", "relfreq_b"], rows))
    else:
        letters = _alphabet(args.alphabet)
        table = letter_frequencies(text, letters)
        counts = table.counts()
        rows = [[l, counts.get(l, 0), f"{counts.get(l, 0) / table.total:.6f}" if table.total else "0.000000"]
                for l in letters]
        _Out(args.out).write(_csv_text(["letter", "count", "relfreq"], rows))
    return EXIT_OK


def cmd_wordfreq(args) -> int:
    from .freq import filter_stopwords, word_frequencies, write_loglog_csv

    table = None
    for path in args.inputs:
        t = word_frequencies(_lines(path), args.esperanto_only,
                             lowercase=not args.keep_case, numerals=args.numerals)
        table = t if table is None else table.merge(t)
    stop = _stoplist(args.stoplist)
    if stop:
        table = filter_stopwords(table, stop)
    _Out(args.out).write(_csv_text(["rank", "word", "count"], [[it.rank, it.key, it.count] for it in table]))
    if args.plot_data:
        write_loglog_csv(table, args.plot_data, args.top)
    _say(args, f"{len(table)} distinct words, {table.total} tokens")
    return EXIT_OK


def cmd_entropy(args) -> int:
    from .freq import entropy
    from .text import letter_frequencies

    rows = []
    for path in args.inputs:
        h = entropy(letter_frequencies(_read_text(path), _alphabet(args.alphabet)))
        rows.append([path, args.alphabet, f"{h:.6f}"])
    _Out(args.out).write(_csv_text(["source", "alphabet", "entropy_bits"], rows))
    return EXIT_OK


def cmd_zipf(args) -> int:
    from .freq import filter_stopwords, read_freq_csv, zipf_fit

    if args.input == "-":
        raise UsageError("zipf needs a word_freq.csv path")
    table = read_freq_csv(args.input)
    stop = _stoplist(args.stoplist)
    if stop:
        table = filter_stopwords(table, stop)
    fit = zipf_fit(table, args.top)
    _Out(args.out).write(_csv_text(
        ["log_k", "a", "r2", "stderr", "n"],
        [[f"{fit.log_k:.6f}", f"{fit.a:.6f}", f"{fit.r_squared:.6f}", f"{fit.std_err:.6e}", fit.n_points]],
    ))
    _say(args, f"a={fit.a:.4f} r2={fit.r_squared:.4f} (natural log intercept {fit.log_k:.4f})")
    return EXIT_OK


def cmd_annotate(args) -> int:
    from .classify import annotate
    from .formats import dumps_compact, dumps_m2

    src, tgt = _lines(args.src), _lines(args.tgt)
    if len(src) != len(tgt):
        raise InputError(f"{args.src} has {len(src)} lines but {args.tgt} has {len(tgt)}")
    sents = [annotate(s, t, provenance=args.provenance) for s, t in zip(src, tgt)]
    dump = dumps_compact if args.format == "compact" else dumps_m2
    _Out(args.out).write(dump(sents))
    _say(args, f"annotated {len(sents)} sentence pairs")
    return EXIT_OK


def cmd_convert(args) -> int:
    from .formats import convert

    text = _read_text(args.input)
    to = args.to
    if to is None:
        to = "canonical" if any(ln.startswith("T ") or ln == "T" for ln in text.splitlines()) else "compact"
    _Out(args.out).write(convert(text, to))
    return EXIT_OK


def _load_hyp(path: str, gold):
    """Hypotheses as annotated sentences: an annotation file, or one corrected sentence per line."""
    from .classify import annotate_tokens
    from .formats import loads_compact, loads_m2
    from .text import normalize_orthography, tokenize

    text = _read_text(path)
    first = next((ln for ln in text.splitlines() if ln.strip()), "")
    if first.startswith(("S ", "# ")):
        hyp = loads_compact(text) if any(ln.startswith("T ") for ln in text.splitlines()) else loads_m2(text)
        return hyp
    lines = text.splitlines()
    if len(lines) != len(gold):
        raise InputError(f"{path} has {len(lines)} lines for {len(gold)} gold sentences")
    return [annotate_tokens(g.source, tokenize(normalize_orthography(ln))) for ln, g in zip(lines, gold)]


def cmd_score(args) -> int:
    from .formats import read_annotations
    from .score import errant_score, m2_corpus_score, table_row

    try:
        gold = read_annotations(args.gold)
    except OSError as exc:
        raise InputError(f"cannot read {args.gold}: {exc.strerror or exc}") from None
    hyp = _load_hyp(args.hyp, gold)
    errant = m2 = None
    if args.scorer in ("errant", "both"):
        errant = errant_score(hyp, gold, args.mode)
        _say(args, errant.format("ERRANT-style"))
    if args.scorer in ("m2", "both"):
        m2 = m2_corpus_score([h.target for h in hyp], gold, args.max_phrase)
        _say(args, m2.format("M2-style"))
    from .score import TABLE_HEADER

    _Out(args.out).write(_csv_text(TABLE_HEADER, [table_row(args.method, errant, m2)]))
    return EXIT_OK


def _examples(path: Optional[str]) -> list[tuple[str, str]]:
    """Example pairs for few-shot prompts; the shipped gold fixture by default."""
    from importlib import resources

    from .formats import loads_compact, loads_m2

    if path:
        text = _read_text(path)
    else:
        text = resources.files("eogec").joinpath("data").joinpath("gold.m2").read_text(encoding="utf-8")
    sents = loads_compact(text) if any(ln.startswith("T ") for ln in text.splitlines()) else loads_m2(text)
    return [(" ".join(t.surface for t in s.source), " ".join(t.surface for t in s.target)) for s in sents]


def cmd_correct(args) -> int:
    from .formats import read_annotations
    from .harness import EndpointConfig, PromptTemplate, evaluate_run, run_batch

    gold = None
    if args.gold:
        gold = read_annotations(args.gold)
        sentences = [" ".join(t.surface for t in g.source) for g in gold]
    elif args.input:
        sentences = [ln for ln in _lines(args.input) if ln.strip()]
    else:
        raise UsageError("correct needs --in sentences.txt or --gold gold.m2")
    template = PromptTemplate.load(args.template, args.shots, _examples(args.examples))
    cfg = EndpointConfig.resolve(args.config_data, model=args.model, cache_dir=args.cache_dir,
                                 concurrency=args.concurrency)
    log.info("endpoint settings: %s", json.dumps(cfg.public(), sort_keys=True))
    records = run_batch(sentences, template, cfg, strict=args.strict)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if gold is not None:
        errant, m2 = evaluate_run(records, gold, out, method=args.method or f"{cfg.model} {args.shots}-shot")
        _say(args, errant.format("ERRANT-style"))
        _say(args, m2.format("M2-style"))
    else:
        (out / "run_records.jsonl").write_text("".join(r.to_json() + "\n" for r in records),
                                              encoding="utf-8", newline="\n")
    failed = sum(r.status != "ok" for r in records)
    _say(args, f"{len(records)} sentences, {failed} failed")
    return EXIT_OK


def cmd_report(args) -> int:
    from .classify import dataset_report
    from .formats import read_annotations

    sents = read_annotations(args.input)
    rep = dataset_report(sents, top_k=args.top_k, count_punctuation=args.count_punctuation)
    rep.write_csv(args.out)
    _say(args, f"{rep.n_sentences} sentences, {rep.n_edits} edits, "
               f"mean length {rep.mean_source_length:.2f}/{rep.mean_target_length:.2f}")
    return EXIT_OK


def cmd_synth(args) -> int:
    """Synthetic Zipf-distributed frequency table, for trying out ``zipf``."""
    rng = random.Random(args.seed)
    rows = []
    for r in range(1, args.n + 1):
        f = args.scale * r ** (-args.a)
        if args.noise:
            f *= rng.lognormvariate(0.0, args.noise)
        rows.append((f"w{r:05d}", max(1, round(f))))
    from .tables import FreqTable

    table = FreqTable.from_counts(rows)
    _Out(args.out).write(_csv_text(["rank", "word", "count"], [[it.rank, it.key, it.count] for it in table]))
    return EXIT_OK


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="TOML or JSON file with default option values")
    common.add_argument("--quiet", action="store_true", help="only print errors")
    common.add_argument("--seed", type=int, default=0, help="seed for synthetic data generation")

    p = _Parser(prog="eogec", description="Esperanto grammar error correction toolkit.",
                epilog="Exit codes: 0 success, 1 input error, 2 internal invariant violation.",
                parents=[common])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, description=help_, parents=[common],
                            epilog="Exit codes: 0 success, 1 input error, 2 internal invariant violation.")
        sp.set_defaults(func=fn)
        return sp

    sp = add("ingest", cmd_ingest, "Build a plain-text corpus from HTML books.")
    sp.add_argument("--in", dest="inputs", nargs="+", required=True,
                    help="HTML files, directories, URL list files or URLs")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--fetch", action="store_true", help="allow downloading URL inputs")
    sp.add_argument("--rate-limit", type=float, default=1.0, help="downloads per second")
    sp.add_argument("--cache-dir", help="download cache (default OUT/cache)")
    sp.add_argument("--lang-threshold", type=float, default=0.6)
    sp.add_argument("--workers", type=int, default=4)

    sp = add("letterfreq", cmd_letterfreq, "Letter frequencies of a text, optionally against a second text.")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--alphabet", choices=("eo", "en"), default="eo")
    sp.add_argument("--compare", help="second text")
    sp.add_argument("--compare-alphabet", choices=("eo", "en"), default="en")
    sp.add_argument("--out", help="CSV path (default stdout)")

    sp = add("wordfreq", cmd_wordfreq, "Ranked word frequencies.")
    sp.add_argument("--in", dest="inputs", nargs="+", required=True)
    sp.add_argument("--esperanto-only", action="store_true")
    sp.add_argument("--stoplist", help="stop words, one per line")
    sp.add_argument("--keep-case", action="store_true", help="do not lowercase")
    sp.add_argument("--numerals", action="store_true", help="count number tokens")
    sp.add_argument("--plot-data", help="also write log-log scatter data here")
    sp.add_argument("--top", type=int, help="limit the plot data to the top N ranks")
    sp.add_argument("--out", help="CSV path (default stdout)")

    sp = add("entropy", cmd_entropy, "Letter entropy in bits.")
    sp.add_argument("--in", dest="inputs", nargs="+", required=True)
    sp.add_argument("--alphabet", choices=("eo", "en"), default="eo")
    sp.add_argument("--out", help="CSV path (default stdout)")

    sp = add("zipf", cmd_zipf, "Fit a Zipf line to a word_freq.csv table.")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--top", type=int, default=100)
    sp.add_argument("--stoplist")
    sp.add_argument("--out", help="CSV path (default stdout)")

    sp = add("annotate", cmd_annotate, "Align and code source/corrected sentence pairs.")
    sp.add_argument("--src", required=True, help="one source sentence per line")
    sp.add_argument("--tgt", required=True, help="one corrected sentence per line")
    sp.add_argument("--provenance", default="Other")
    sp.add_argument("--format", choices=("canonical", "compact"), default="canonical")
    sp.add_argument("--out", help="output path (default stdout)")

    sp = add("convert", cmd_convert, "Convert between the canonical and compact annotation formats.")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--to", choices=("compact", "canonical"), help="default: the other format")
    sp.add_argument("--out", help="output path (default stdout)")

    sp = add("score", cmd_score, "Score hypotheses against gold annotations.")
    sp.add_argument("--hyp", required=True, help="annotation file or one corrected sentence per line")
    sp.add_argument("--gold", required=True)
    sp.add_argument("--scorer", choices=("errant", "m2", "both"), default="both")
    sp.add_argument("--mode", choices=("span", "span_and_type"), default="span")
    sp.add_argument("--max-phrase", type=int, default=4)
    sp.add_argument("--method", default="hypothesis", help="row label")
    sp.add_argument("--out", help="CSV path (default stdout)")

    sp = add("correct", cmd_correct, "Correct sentences with a chat-completion endpoint (EOG_API_URL, EOG_API_KEY).")
    sp.add_argument("--in", dest="input", help="one sentence per line")
    sp.add_argument("--gold", help="gold annotations; sentences are taken from it and the run is scored")
    sp.add_argument("--shots", type=int, choices=(0, 1, 3, 5), default=0)
    sp.add_argument("--examples", help="annotation file supplying the example pairs")
    sp.add_argument("--template", help="prompt template file")
    sp.add_argument("--model")
    sp.add_argument("--cache-dir")
    sp.add_argument("--concurrency", type=int)
    sp.add_argument("--strict", action="store_true", help="treat multi-line replies as failures")
    sp.add_argument("--method", help="row label in scores.csv")
    sp.add_argument("--out", required=True, help="output directory")

    sp = add("report", cmd_report, "Descriptive statistics of an annotated dataset.")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--top-k", type=int, default=10)
    sp.add_argument("--count-punctuation", action="store_true")
    sp.add_argument("--out", required=True, help="output directory")

    sp = add("synth", cmd_synth, "Write a synthetic Zipf frequency table.")
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--a", type=float, default=0.88)
    sp.add_argument("--scale", type=float, default=1e6)
    sp.add_argument("--noise", type=float, default=0.0, help="sigma of multiplicative log-normal noise")
    sp.add_argument("--out", help="CSV path (default stdout)")
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> dict:
    """Use values from --config as defaults; explicit flags still win."""
    pre = _Parser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    from .harness import load_config

    try:
        data = load_config(known.config)
    except OSError as exc:
        raise InputError(f"cannot read config {known.config}: {exc.strerror or exc}") from None
    flat = {k.replace("-", "_"): v for k, v in data.items() if not isinstance(v, dict)}
    for section in data.values():
        if isinstance(section, dict):
            flat.update({k.replace("-", "_"): v for k, v in section.items()})
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in subparsers.choices.values():
        dests = {a.dest for a in sp._actions}
        sp.set_defaults(**{k: v for k, v in flat.items() if k in dests})
    return data


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        config = _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except EogecError as exc:
        print(f"eogec: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    args.config_data = config
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"eogec: internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (EogecError, ValueError) as exc:
        print(f"eogec: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"eogec: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AssertionError as exc:
        print(f"eogec: internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
