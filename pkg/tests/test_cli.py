import json
import subprocess
import sys

import pytest

from abckit.analysis import extract_motifs_per_section
from abckit.abc import parse_tune
from abckit.cli import main
from benchgen import synthetic_items
from tunegen import corpus_records, write_corpus

SAMPLE_CODE = "S:4 B:1 E:1 B:8 E:3 E:7 B:1 E:1 E:4 E:1 B:8"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def tune_files(tmp_path, waltz_text, sample_tune):
    good = tmp_path / "good.abc"
    good.write_text(waltz_text)
    other = tmp_path / "other.abc"
    other.write_text(sample_tune)
    bad = tmp_path / "bad.abc"
    bad.write_text("K:C\nabc|\n")
    return good, other, bad


def test_parse_ok_and_failures(capsys, tune_files):
    good, other, bad = tune_files
    code, out, _ = run(capsys, "parse", good, other)
    assert code == 0
    assert json.loads(out)["ok"] == 2
    code, out, err = run(capsys, "parse", good, bad)
    assert code == 1
    report = json.loads(out)
    assert report["failed"] == 1
    assert report["files"][1]["error"]["kind"] == "missing_X_header"
    assert "missing_X_header" in err


def test_missing_file_and_usage(capsys, tmp_path):
    assert run(capsys, "parse", tmp_path / "nope.abc")[0] == 1
    with pytest.raises(SystemExit) as info:
        main(["parse"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1


def test_form_pretty(capsys, tmp_path):
    corpus = tmp_path / "c.jsonl"
    corpus.write_text(
        json.dumps({"id": "one", "abc": "X:1\nK:C\nabcd|\n", "control_code": None}) + "\n"
        + json.dumps({"id": "d", "control_code": SAMPLE_CODE}) + "\n"
    )
    code, out, _ = run(capsys, "form", corpus, "--pretty")
    assert code == 0
    assert out.splitlines() == ["A / OnlyOneSection", "ABB'C / CompoundBinary"]
    code, out, _ = run(capsys, "form", corpus)
    rows = json.loads(out)
    assert rows[1]["alphabetic"] == "ABB'C" and rows[1]["terms"] == ["CompoundBinary"]


def test_form_bad_code(capsys, tmp_path):
    corpus = tmp_path / "c.jsonl"
    corpus.write_text(json.dumps({"id": "x", "control_code": "S:2 B:4"}) + "\n")
    code, _, err = run(capsys, "form", corpus)
    assert code == 1 and err


def test_form_tunebook(capsys, tmp_path, waltz_text, sample_tune):
    book = tmp_path / "book.abc"
    book.write_text(waltz_text + "\n" + sample_tune)
    code, out, _ = run(capsys, "form", book)
    assert code == 0 and len(json.loads(out)) == 2


def test_motif_matches_library(capsys, tune_files, sample_tune):
    _, other, _ = tune_files
    code, out, _ = run(capsys, "motif", other, "--pretty")
    want = [f"Section {i}: {m}" for i, m in enumerate(extract_motifs_per_section(parse_tune(sample_tune)), 1)]
    assert code == 0 and out.splitlines() == want
    code, out, _ = run(capsys, "motif", other)
    assert [r["section"] for r in json.loads(out)] == [1, 2]


def test_gen(capsys, tmp_path):
    corpus = tmp_path / "c.jsonl"
    write_corpus(corpus, corpus_records(5, seed=4))
    code, out, err = run(capsys, "gen", corpus, "--tasks", "chord,melody", "--seed", 3)
    assert code == 0
    rows = [json.loads(line) for line in out.splitlines()]
    assert {r["task"] for r in rows} == {"ChordConditioned", "MelodyHarmonization"}
    assert json.loads(err)["written"] == len(rows) == 10
    assert run(capsys, "gen", corpus, "--tasks", "chord,melody", "--seed", 3)[1] == out
    target = tmp_path / "o.jsonl"
    code, summary, _ = run(capsys, "gen", corpus, "--tasks", "chord,melody", "--seed", 3, "--out", target, "--jobs", 3)
    assert target.read_text() == out
    assert json.loads(summary)["written"] == 10
    assert run(capsys, "gen", corpus, "--tasks", "lyrics")[0] == 1


def test_gen_config_file(capsys, tmp_path):
    corpus = tmp_path / "c.jsonl"
    write_corpus(corpus, corpus_records(3, seed=4))
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 3, "tasks": "chord,melody"}))
    from_cfg = run(capsys, "gen", corpus, "--config", cfg)[1]
    from_flags = run(capsys, "gen", corpus, "--tasks", "chord,melody", "--seed", 3)[1]
    assert from_cfg == from_flags
    # flags win over the config file
    assert run(capsys, "gen", corpus, "--config", cfg, "--seed", 4)[1] != from_cfg
    cfg.write_text(json.dumps({"colour": "red"}))
    assert run(capsys, "gen", corpus, "--config", cfg)[0] == 1


def eval_rows():
    def tune(chords):
        return "X:1\nK:C\n" + " ".join(f'"{c}" A2' for c in chords) + " |]\n"

    prompt = ["F", "C7", "G", "D"]
    return [
        {"system": "a", "task": "chord", "prompt_signals": {"chords": prompt}, "generated": tune(prompt)},
        {"system": "a", "task": "chord", "prompt_signals": {"chords": prompt}, "generated": tune(["F", "C7", "A", "A"])},
        {"system": "b", "task": "chord", "prompt_signals": {"chords": prompt}, "generated": tune(["F", "C7", "G", "A"])},
        {"system": "b", "task": "chord", "prompt_signals": {"chords": prompt}, "generated": tune(["A"] * 4)},
    ]


def test_eval(capsys, tmp_path):
    records = tmp_path / "r.jsonl"
    records.write_text("".join(json.dumps(r) + "\n" for r in eval_rows()))
    code, out, _ = run(capsys, "eval", records)
    assert code == 0
    report = json.loads(out)
    # pooled scores 1, 1/2, 3/4, 0: percentiles a -> 1, 1/3; b -> 2/3, 0
    assert report["systems"]["a"]["ChordConditioned"]["avg_percentile"] == pytest.approx(2 / 3)
    assert report["systems"]["b"]["ChordConditioned"]["avg_percentile"] == pytest.approx(1 / 3)
    empty = tmp_path / "e.jsonl"
    empty.write_text("")
    assert run(capsys, "eval", empty)[0] == 1


@pytest.fixture
def bench_files(tmp_path):
    items = synthetic_items(10, seed=6)
    bench = tmp_path / "bench.json"
    bench.write_text(json.dumps([i.to_dict() for i in items]))
    provider = tmp_path / "gold.json"
    provider.write_text(json.dumps({"kind": "gold"}))
    return bench, provider


def test_bench_gold(capsys, bench_files, tmp_path):
    bench, provider = bench_files
    ckpt = tmp_path / "ck.jsonl"
    code, out, _ = run(capsys, "bench", bench, "--provider", provider, "--shuffles", 2, "--checkpoint", ckpt)
    assert code == 0
    result = json.loads(out)
    assert all(s["accuracy"] == 1.0 for s in result["subsets"].values())
    assert len(ckpt.read_text().splitlines()) == 1 + 20
    code, again, _ = run(capsys, "bench", bench, "--provider", provider, "--shuffles", 2, "--checkpoint", ckpt)
    assert again == out


def test_bench_provider_failures(capsys, bench_files, tmp_path, monkeypatch):
    bench, _ = bench_files
    assert run(capsys, "bench", bench)[0] == 2
    assert run(capsys, "bench", bench, "--provider", tmp_path / "none.json")[0] == 2
    cfg = tmp_path / "http.json"
    cfg.write_text(json.dumps({"kind": "http", "base_url": "http://x/y", "model": "m", "auth_env": "ABSENT_TOKEN_VAR"}))
    monkeypatch.delenv("ABSENT_TOKEN_VAR", raising=False)
    assert run(capsys, "bench", bench, "--provider", cfg)[0] == 2


def test_bench_schema_error(capsys, tmp_path, bench_files):
    _, provider = bench_files
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([{"id": "q", "subset": "knowledge", "stem": "s", "options": ["a", "b", "c"], "answer_index": 0}]))
    assert run(capsys, "bench", bad, "--provider", provider)[0] == 1


def test_stats(capsys, tmp_path):
    # 4/4 at L:1/8: two bars of 8 eighths = 2 whole notes = 4 s at quarter=120
    tune = tmp_path / "t.abc"
    tune.write_text("X:1\nL:1/8\nM:4/4\nK:C\nabcd efga | g8 |]\n")
    code, out, _ = run(capsys, "stats", tune, "--tokenizer", "whitespace", "--tokenizer", "characters")
    assert code == 0
    stats = json.loads(out)
    # whitespace: 4 header lines, then "abcd", "efga", "|", "g8", "|]"
    assert stats["whitespace"]["total_tokens"] == 9
    assert stats["whitespace"]["total_seconds"] == "4"
    assert stats["whitespace"]["tokens_per_second_exact"] == "9/4"
    assert stats["characters"]["total_tokens"] == len(tune.read_text())
    assert stats["characters"]["songs"] == 1


def test_installed_script(tune_files):
    good, _, _ = tune_files
    proc = subprocess.run([sys.executable, "-m", "abckit.cli", "parse", str(good)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["ok"] == 1
