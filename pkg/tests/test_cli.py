import csv
import json

import httpx
import pytest

from eogec import harness
from eogec.cli import build_parser, main
from eogec.errors import IllegalCombination

SUBCOMMANDS = ["ingest", "letterfreq", "wordfreq", "entropy", "zipf", "annotate",
               "convert", "score", "correct", "report", "synth"]


def rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


@pytest.mark.parametrize("cmd", SUBCOMMANDS)
def test_help_everywhere(cmd, capsys):
    assert main([cmd, "--help"]) == 0
    out = capsys.readouterr().out
    assert "Exit codes" in out and "--config" in out


def test_top_level_help(capsys):
    assert main(["--help"]) == 0
    assert "annotate" in capsys.readouterr().out


def test_usage_errors_exit_1(capsys):
    assert main([]) == 1
    assert main(["zipf"]) == 1
    assert main(["zipf", "--in", "x", "--bogus"]) == 1
    assert main(["nonsense"]) == 1
    assert "error" in capsys.readouterr().err


def test_missing_input_exit_1(tmp_path, capsys):
    assert main(["entropy", "--in", str(tmp_path / "none.txt")]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_invariant_violation_exit_2(fixtures, monkeypatch, capsys):
    import eogec.classify

    def broken(*a, **k):
        raise IllegalCombination("M:SPELL")

    monkeypatch.setattr(eogec.classify, "annotate", broken)
    assert main(["annotate", "--src", str(fixtures / "gold.src.txt"), "--tgt", str(fixtures / "gold.tgt.txt")]) == 2
    assert "internal error" in capsys.readouterr().err


def test_synth_zipf_pipeline(tmp_path):
    wf = tmp_path / "word_freq.csv"
    assert main(["synth", "--n", "300", "--out", str(wf), "--quiet"]) == 0
    out = tmp_path / "zipf_fit.csv"
    assert main(["zipf", "--in", str(wf), "--top", "100", "--out", str(out), "--quiet"]) == 0
    header, values = rows(out)
    assert header == ["log_k", "a", "r2", "stderr", "n"]
    assert 0.86 <= float(values[1]) <= 0.90 and float(values[2]) >= 0.99
    assert values[4] == "100"


def test_synth_seeded(tmp_path):
    a, b, c = (tmp_path / n for n in "abc")
    main(["synth", "--n", "50", "--noise", "0.3", "--seed", "5", "--out", str(a)])
    main(["synth", "--n", "50", "--noise", "0.3", "--seed", "5", "--out", str(b)])
    main(["synth", "--n", "50", "--noise", "0.3", "--seed", "6", "--out", str(c)])
    assert a.read_bytes() == b.read_bytes() != c.read_bytes()


def test_zipf_insufficient(tmp_path, capsys):
    wf = tmp_path / "wf.csv"
    main(["synth", "--n", "20", "--out", str(wf)])
    assert main(["zipf", "--in", str(wf), "--top", "100"]) == 1


def test_letterfreq_and_entropy(tmp_path, capsys):
    eo = tmp_path / "eo.txt"
    en = tmp_path / "en.txt"
    eo.write_text("Ĉu vi ŝatas manĝi? Ŝi manĝas.", encoding="utf-8")
    en.write_text("Do you like to eat? She is eating.", encoding="utf-8")
    out = tmp_path / "lf.csv"
    assert main(["letterfreq", "--in", str(eo), "--compare", str(en), "--out", str(out)]) == 0
    table = rows(out)
    assert table[0] == ["letter", "count_a", "relfreq_a", "count_b", "relfreq_b"]
    letters = {r[0]: r for r in table[1:]}
    assert letters["ŝ"][1] == "2" and letters["y"][3] == "1"
    assert main(["letterfreq", "--in", str(en), "--alphabet", "en"]) == 0
    assert capsys.readouterr().out.startswith("letter,count,relfreq")
    assert main(["entropy", "--in", str(eo), str(en), "--out", str(tmp_path / "h.csv")]) == 0
    h = rows(tmp_path / "h.csv")
    assert h[0] == ["source", "alphabet", "entropy_bits"] and len(h) == 3


def test_wordfreq_with_stoplist(tmp_path):
    text = tmp_path / "t.txt"
    text.write_text("La hundo kaj la kato. The dog and the cat. 42\n", encoding="utf-8")
    stop = tmp_path / "stop.txt"
    stop.write_text("# mine\nla\nkaj\n", encoding="utf-8")
    out = tmp_path / "wf.csv"
    plot = tmp_path / "ll.csv"
    assert main(["wordfreq", "--in", str(text), "--esperanto-only", "--stoplist", str(stop),
                 "--plot-data", str(plot), "--out", str(out), "--quiet"]) == 0
    words = [r[1] for r in rows(out)[1:]]
    assert sorted(words) == ["hundo", "kato"]
    assert rows(plot)[0] == ["rank", "freq", "ln_rank", "ln_freq"]


def test_annotate_and_convert_roundtrip(fixtures, tmp_path):
    m2 = tmp_path / "g.m2"
    assert main(["annotate", "--src", str(fixtures / "gold.src.txt"), "--tgt", str(fixtures / "gold.tgt.txt"),
                 "--out", str(m2), "--quiet"]) == 0
    assert m2.read_bytes() == (fixtures / "gold.m2").read_bytes()
    compact = tmp_path / "g.txt"
    back = tmp_path / "g2.m2"
    assert main(["convert", "--in", str(m2), "--out", str(compact)]) == 0
    assert main(["convert", "--in", str(compact), "--out", str(back)]) == 0
    assert back.read_bytes() == m2.read_bytes()
    assert compact.read_bytes() == (fixtures / "gold.compact.txt").read_bytes()


def test_annotate_line_mismatch(fixtures, tmp_path):
    short = tmp_path / "s.txt"
    short.write_text("Mi loĝi en Romo .\n", encoding="utf-8")
    assert main(["annotate", "--src", str(short), "--tgt", str(fixtures / "gold.tgt.txt")]) == 1


def test_convert_bad_code_is_input_error(tmp_path, capsys):
    bad = tmp_path / "bad.m2"
    bad.write_text("S a b\nA 0 1|||M:SPELL|||x|||REQUIRED|||-NONE-|||0\n", encoding="utf-8")
    assert main(["convert", "--in", str(bad)]) == 1


def test_score_both(fixtures, tmp_path):
    out = tmp_path / "scores.csv"
    assert main(["score", "--hyp", str(fixtures / "gpt4.txt"), "--gold", str(fixtures / "cases.m2"),
                 "--method", "GPT-4 0-shot", "--out", str(out), "--quiet"]) == 0
    header, row = rows(out)
    assert header == ["method", "errant_P", "errant_R", "errant_F0.5", "m2_P", "m2_R", "m2_F0.5"]
    assert row == ["GPT-4 0-shot", "72.73", "72.73", "72.73", "80.00", "72.73", "78.43"]


def test_score_gold_against_itself(fixtures, tmp_path):
    out = tmp_path / "s.csv"
    assert main(["score", "--hyp", str(fixtures / "gold.m2"), "--gold", str(fixtures / "gold.compact.txt"),
                 "--mode", "span_and_type", "--out", str(out), "--quiet"]) == 0
    assert rows(out)[1][1:] == ["100.00"] * 6


def test_score_single_scorer(fixtures, capsys):
    assert main(["score", "--hyp", str(fixtures / "gpt35.txt"), "--gold", str(fixtures / "cases.m2"),
                 "--scorer", "errant", "--quiet"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[1].split(",")[4:] == ["", "", ""]


def test_score_wrong_length(fixtures):
    assert main(["score", "--hyp", str(fixtures / "gpt4.txt"), "--gold", str(fixtures / "gold.m2")]) == 1


def test_report(fixtures, tmp_path):
    assert main(["report", "--in", str(fixtures / "gold.m2"), "--out", str(tmp_path), "--top-k", "3",
                 "--quiet"]) == 0
    summary = dict(rows(tmp_path / "summary.csv")[1:])
    assert summary["sentences"] == "20" and summary["edits"] == "23"
    assert len(rows(tmp_path / "error_codes.csv")) == 4


def test_ingest(fixtures, tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    assert main(["ingest", "--in", str(fixtures / "books"), "--out", str(tmp_path), "--quiet"]) == 0
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert sum(b["accepted"] for b in m["books"]) == 2


def _mock_run_batch(monkeypatch, answer):
    real = harness.run_batch
    calls = []

    def handler(request):
        calls.append(1)
        prompt = json.loads(request.content)["messages"][0]["content"]
        sentence = prompt.rsplit("Source: ", 1)[1].split("\n", 1)[0]
        return httpx.Response(200, json={"choices": [{"message": {"content": answer(sentence)}}]})

    def wrapped(*a, **k):
        k["client"] = httpx.Client(transport=httpx.MockTransport(handler))
        return real(*a, **k)

    monkeypatch.setattr(harness, "run_batch", wrapped)
    return calls


def test_correct_with_gold(fixtures, tmp_path, monkeypatch):
    from eogec.formats import read_m2
    gold = read_m2(fixtures / "gold.m2")
    lookup = {" ".join(t.surface for t in g.source): " ".join(t.surface for t in g.target) for g in gold}
    calls = _mock_run_batch(monkeypatch, lambda s: lookup[s])
    monkeypatch.setenv("EOG_API_URL", "http://mock/v1")
    monkeypatch.setenv("EOG_API_KEY", "sk-zzz")
    args = ["correct", "--gold", str(fixtures / "gold.m2"), "--shots", "1", "--cache-dir", str(tmp_path / "c"),
            "--method", "mock", "--quiet"]
    assert main(args + ["--out", str(tmp_path / "r1")]) == 0
    assert len(calls) == 20
    assert main(args + ["--out", str(tmp_path / "r2")]) == 0
    assert len(calls) == 20
    assert rows(tmp_path / "r1" / "scores.csv")[1] == ["mock"] + ["100.00"] * 6
    assert (tmp_path / "r1" / "scores.csv").read_bytes() == (tmp_path / "r2" / "scores.csv").read_bytes()
    assert "sk-zzz" not in (tmp_path / "r1" / "run_records.jsonl").read_text()


def test_correct_plain_input_and_config(tmp_path, monkeypatch):
    _mock_run_batch(monkeypatch, lambda s: s)
    monkeypatch.delenv("EOG_API_URL", raising=False)
    src = tmp_path / "in.txt"
    src.write_text("Mi loĝi en Romo .\n\nSaluton .\n", encoding="utf-8")
    cfg = tmp_path / "c.toml"
    cfg.write_text('url = "http://mock/v1"\nmodel = "gpt-3.5-turbo"\n[correct]\nshots = 3\n', encoding="utf-8")
    assert main(["correct", "--config", str(cfg), "--in", str(src), "--out", str(tmp_path / "o"), "--quiet"]) == 0
    recs = [json.loads(l) for l in (tmp_path / "o" / "run_records.jsonl").read_text().splitlines()]
    assert [r["input"] for r in recs] == ["Mi loĝi en Romo .", "Saluton ."]
    assert recs[0]["model"] == "gpt-3.5-turbo" and recs[0]["shots"] == 3


def test_correct_without_endpoint(tmp_path, monkeypatch):
    monkeypatch.delenv("EOG_API_URL", raising=False)
    src = tmp_path / "in.txt"
    src.write_text("x\n")
    assert main(["correct", "--in", str(src), "--out", str(tmp_path / "o")]) == 1
    assert main(["correct", "--out", str(tmp_path / "o")]) == 1


def test_parser_rejects_bad_shots():
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["correct", "--shots", "2", "--out", "x"])
    assert exc.value.code == 1


def test_deterministic_outputs(fixtures, tmp_path):
    for n in ("a", "b"):
        main(["annotate", "--src", str(fixtures / "cases.src.txt"), "--tgt", str(fixtures / "cases.tgt.txt"),
              "--format", "compact", "--out", str(tmp_path / f"{n}.txt"), "--quiet"])
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()
