"""Release acceptance criteria, one test each.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""

import json
import random
import statistics
import time
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from abckit.abc import ERROR_KINDS, ParseError, parse_tune, serialize, split_sections
from abckit.abc.tokens import Accidental, Barline, BarKind, Note
from abckit.analysis import (
    SimilarityLevel,
    alphabetic_form,
    extract_chords,
    extract_motif,
    similarity_levels,
)
from abckit.bench import (
    GoldOracleProvider,
    RandomProvider,
    ShuffleProtocol,
    format_prompt,
    item_from_dict,
    run_eval,
)
from abckit.cli import main
from abckit.control_code import parse_control_code
from abckit.dataset import TaskKind, generate_corpus, load_template_bank
from abckit.metrics import (
    GenerationRecord,
    memorization_report,
    parse_success_rate,
    percentile,
    percentile_report,
    repetition_rate,
)
from abckit.sequence import edit_distance, lcs_length
from benchgen import synthetic_items
from oracles import edit_distance_table, lcs_table, motif_bruteforce
from tunegen import corpus_records, random_tune, write_corpus

S, V, D = SimilarityLevel.IDENTICAL, SimilarityLevel.VARIATION, SimilarityLevel.DIFFERENT
SAMPLE_CODE = "S:4 B:1 E:1 B:8 E:3 E:7 B:1 E:1 E:4 E:1 B:8"


@pytest.mark.acceptance("form analysis golden: [[d],[d,v],[d,d,d]] and ABB'C in < 1 ms")
def test_form_golden():
    def analyse():
        cc = parse_control_code(SAMPLE_CODE)
        return similarity_levels(cc), str(alphabetic_form(cc))

    levels, form = analyse()
    assert levels == [[D], [D, V], [D, D, D]]
    assert form == "ABB'C"
    timings = []
    for _ in range(200):
        t0 = time.perf_counter()
        analyse()
        timings.append(time.perf_counter() - t0)
    assert statistics.median(timings) < 1e-3


@pytest.mark.acceptance("parser goldens: waltz and sample tune parse, round-trip, split into 2 sections each")
def test_parser_goldens(waltz_text, sample_tune):
    waltz = parse_tune(waltz_text)
    assert [key for key, _ in waltz.headers] == ["X", "L", "M", "K"]
    assert parse_tune(serialize(waltz)) == waltz
    both = [t for t in waltz.body if isinstance(t, Barline) and t.kind is BarKind.REPEAT_BOTH]
    assert len(both) == 1
    # one :: divides the waltz into its two repeated parts
    sections = split_sections(waltz)
    assert len(sections) == 2
    assert sections[0][-1] == both[0]

    sample = parse_tune(sample_tune)
    assert parse_tune(serialize(sample)) == sample
    assert len(split_sections(sample)) == 2


@pytest.mark.acceptance("repetition metric: sample tune = 1.0, constructed corpora = k/10")
def test_repetition_rate(sample_tune):
    assert repetition_rate([sample_tune]) == 1
    rng = random.Random(12)
    for k in range(11):
        texts = []
        for i in range(10):
            bars = " | ".join(f"{rng.choice('abcdefg')}2{rng.choice('ABCDEFG')}2" for _ in range(3))
            if i < k:
                marks = rng.choice([("|: ", " :|"), ("", " ::" + " cd :|"), ("", " :|")])
            else:
                marks = rng.choice([("", " |]"), ("", " ||"), ("", " |")])
            texts.append(f"X:{i}\nL:1/8\nK:C\n{marks[0]}{bars}{marks[1]}\n")
        rng.shuffle(texts)
        assert repetition_rate(texts) == Fraction(k, 10)


@pytest.mark.acceptance("parse-rate metric: 20 texts with 3 defects -> 0.85 with correct error kinds")
def test_parse_rate():
    rng = random.Random(5)
    texts = [random_tune(rng, i + 1) for i in range(20)]
    texts[3] = texts[3].split("\n", 1)[1]
    texts[9] = texts[9].rstrip("\n") + ' "Am\n'
    texts[14] = texts[14].replace("K:", "L:1/0\nK:", 1)
    result = parse_success_rate(texts)
    assert result.rate == Fraction(17, 20) == Fraction("0.85")
    kinds = {i: e.kind for i, e in result.failures}
    assert kinds == {3: "missing_X_header", 9: "unbalanced_quote", 14: "bad_duration"}


@pytest.mark.acceptance("motif oracle: 200 random sequences agree with exhaustive n-gram count in < 5 s")
def test_motif_oracle():
    rng = random.Random(99)
    pool = [Note(p) for p in "abcde"] + [Note("a", duration=Fraction(2)), Note("c", accidental=Accidental.SHARP)]
    t0 = time.perf_counter()
    for _ in range(200):
        alphabet = pool[: rng.randint(1, len(pool))]
        seq = [rng.choice(alphabet) for _ in range(rng.randint(1, 30))]
        m = extract_motif(seq)
        assert (m.tokens, m.frequency) == motif_bruteforce(seq)
    assert time.perf_counter() - t0 < 5


def _axioms(a, b, c):
    assert edit_distance(a, b) == edit_distance(b, a)
    assert edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c)
    assert (edit_distance(a, b) == 0) == (a == b)
    assert lcs_length(a, b) == lcs_length(b, a)


@pytest.mark.acceptance("sequence oracles: 1000 pairs agree with quadratic DP; symmetry and triangle inequality hold")
def test_sequence_oracles():
    rng = random.Random(2024)
    for _ in range(1000):
        alphabet = "abcdefgh"[: rng.randint(1, 8)]
        a = [rng.choice(alphabet) for _ in range(rng.randint(0, 50))]
        b = [rng.choice(alphabet) for _ in range(rng.randint(0, 50))]
        assert edit_distance(a, b) == edit_distance_table(a, b)
        assert lcs_length(a, b) == lcs_table(a, b)

    @given(*[st.lists(st.sampled_from("abc"), max_size=15)] * 3)
    def axioms(a, b, c):
        _axioms(a, b, c)

    axioms()


def _chord_tune(chords):
    return "X:1\nK:C\n" + " ".join(f'"{c}" A2' for c in chords) + " |]\n"


PROMPT = ["F", "C7", "G", "D", "Am"]


def _fixture_records():
    # matched chords out of 5: a -> 5, 3, 1; b -> 4, 2, 0
    a = [PROMPT, PROMPT[:3] + ["E", "E"], PROMPT[:1] + ["E"] * 4]
    b = [PROMPT[:4] + ["E"], PROMPT[:2] + ["E"] * 3, ["E"] * 5]
    records = [GenerationRecord("a", TaskKind.ChordConditioned, {"chords": PROMPT}, _chord_tune(g)) for g in a]
    records += [GenerationRecord("b", TaskKind.ChordConditioned, {"chords": PROMPT}, _chord_tune(g)) for g in b]
    return records


def _random_monotone(rng):
    # strictly increasing piecewise-linear map on [0, 1] with random knots and slopes
    knots = sorted(Fraction(rng.randint(1, 999), 1000) for _ in range(rng.randint(1, 5)))
    slopes = [Fraction(rng.randint(1, 50), rng.randint(1, 50)) for _ in range(len(knots) + 1)]
    offset = Fraction(rng.randint(-100, 100), 7)

    def f(x):
        y, prev = offset, Fraction(0)
        for knot, slope in zip(knots + [Fraction(10**9)], slopes):
            seg = min(x, knot) - prev
            if seg <= 0:
                break
            y += seg * slope
            prev = knot
        return y

    return f


@pytest.mark.acceptance("percentile metric: hand-computed averages exact; system order invariant under 10 monotone maps")
def test_percentile():
    report = percentile_report(_fixture_records())
    key_a, key_b = ("a", TaskKind.ChordConditioned), ("b", TaskKind.ChordConditioned)
    # pooled scores 5/5 4/5 3/5 2/5 1/5 0/5; a holds ranks 5, 3, 1 of 0..5 -> 1, 3/5, 1/5
    assert report.initial_scores[key_a] == [1, Fraction(3, 5), Fraction(1, 5)]
    assert report.average_percentile[key_a] == Fraction(3, 5)
    assert report.average_percentile[key_b] == Fraction(2, 5)

    scores = report.initial_scores
    rng = random.Random(77)
    for _ in range(10):
        f = _random_monotone(rng)
        pool = [f(s) for vals in scores.values() for s in vals]
        avg = {k: sum(percentile(f(s), pool) for s in v) / len(v) for k, v in scores.items()}
        assert avg[key_a] > avg[key_b]
        assert avg == report.average_percentile


@pytest.mark.acceptance("memorization: LCS ratios 1.0 / 0.8 / 0.79 classify as exact+overlap / overlap / neither")
def test_memorization():
    ref = [f"t{i}" for i in range(100)]
    copy = list(ref)
    eighty = ref[:80] + ["x"] * 20
    seventy_nine = ref[:79] + ["x"] * 21
    assert [lcs_table(g, ref) for g in (copy, eighty, seventy_nine)] == [100, 80, 79]
    singles = [memorization_report([(g, ref)]) for g in (copy, eighty, seventy_nine)]
    assert [(r.exact_fraction, r.overlap80_fraction) for r in singles] == [(1, 1), (0, 1), (0, 0)]
    rep = memorization_report([(copy, ref), (eighty, ref), (seventy_nine, ref)])
    assert rep.exact_fraction == Fraction(1, 3)
    assert rep.overlap80_fraction == Fraction(2, 3)


@pytest.mark.acceptance("bench protocol: gold oracle 1.000 x 10 seeds; random stub 0.25 +/- 0.03; exemplar layout byte-exact")
def test_bench_protocol(data_dir):
    items = synthetic_items(40, seed=31)
    for seed in range(10):
        res = run_eval(items, GoldOracleProvider(items), ShuffleProtocol(5, seed), jobs=4)
        assert all(s.accuracy == 1 for s in res.subsets.values())

    many = synthetic_items(200, seed=32)
    correct = rounds = 0
    for seed in range(4):
        res = run_eval(many, RandomProvider(seed), ShuffleProtocol(5, seed), jobs=4)
        for s in res.subsets.values():
            correct += s.accuracy * s.n * len(s.per_shuffle)
            rounds += s.n * len(s.per_shuffle)
    assert rounds >= 2000
    assert abs(correct / rounds - Fraction(1, 4)) <= Fraction(3, 100)

    shots = [item_from_dict(d) for d in json.loads((data_dir / "theory_exemplars.json").read_text(encoding="utf-8"))]
    layout = (data_dir / "shot_layout.txt").read_text(encoding="utf-8")
    scored = items[0]
    block = format_prompt(scored, (0, 1, 2, 3)).split("\n", 1)[1]
    want = layout.replace("[Actual question here]", block)
    got = format_prompt(scored, (0, 1, 2, 3), "few_shot", shots)
    assert got.rstrip() == want.rstrip()
    # five_shot keeps the same layout and only needs one more exemplar
    fifth = synthetic_items(1, seed=33, prefix="extra")[0]
    five = format_prompt(scored, (0, 1, 2, 3), "five_shot", shots + [fifth])
    head = layout.split("[Actual question here]")[0]
    assert five.startswith(head)


@pytest.mark.acceptance("dataset: 50-tune corpus byte-identical across runs; every chord sample self-consistent")
def test_dataset(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    write_corpus(corpus, corpus_records(50, seed=50, chordless={7, 21}, bach={0, 1, 2}))
    bank = load_template_bank()
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    generate_corpus(corpus, list(TaskKind), bank, 2024, a)
    generate_corpus(corpus, list(TaskKind), bank, 2024, b, jobs=4)
    assert a.read_bytes() == b.read_bytes()
    chord_rows = 0
    for line in a.read_text(encoding="utf-8").splitlines():
        rec = json.loads(line)
        if rec["task"] != "ChordConditioned":
            continue
        user, assistant = (m["content"] for m in rec["messages"])
        chord_rows += 1
        assert extract_chords(parse_tune(assistant)) == user.split("\n", 1)[1].split()
    assert chord_rows == 48


@pytest.mark.acceptance("fuzz robustness: 100k random byte strings give a document or typed ParseError in < 60 s")
def test_fuzz(waltz_text):
    rng = random.Random(100_000)
    alphabet = b'X:1\nK:CL/8M4|[]:"abcdefgABCDEFGz^_=,\'/23456789(){}!<>-~. %\\[1'
    seed_tune = waltz_text.encode()
    parsed = 0
    t0 = time.perf_counter()
    for i in range(100_000):
        kind = i % 3
        if kind == 0:
            data = rng.randbytes(rng.randint(0, 120))
        elif kind == 1:
            data = b"X:1\nK:C\n" + bytes(rng.choice(alphabet) for _ in range(rng.randint(0, 60)))
        else:
            buf = bytearray(seed_tune)
            for _ in range(rng.randint(1, 4)):
                buf[rng.randrange(len(buf))] = rng.getrandbits(8)
            data = bytes(buf)
        try:
            doc = parse_tune(data)
        except ParseError as exc:
            assert exc.kind in ERROR_KINDS
        else:
            assert doc.body
            parsed += 1
    assert time.perf_counter() - t0 < 60
    assert parsed > 0


@pytest.mark.acceptance("stats sanity: whitespace tokens and performed seconds match hand values exactly")
def test_stats(tmp_path, capsys):
    one = tmp_path / "one.abc"
    # 9 whitespace tokens; two 4/4 bars of eighths at quarter=120 -> 4 s
    one.write_text("X:1\nL:1/8\nM:4/4\nK:C\nabcd efga | g8 |]\n")
    two = tmp_path / "two.abc"
    # 10 tokens; 6 quarters played twice at quarter=60 -> 12 s
    two.write_text("X:2\nL:1/4\nM:3/4\nQ:1/4=60\nK:G\n|: abc | d3 :|\n")
    assert main(["stats", str(one), str(two), "--tokenizer", "whitespace"]) == 0
    stats = json.loads(capsys.readouterr().out)["whitespace"]
    assert stats["songs"] == 2
    assert stats["total_tokens"] == 19
    assert stats["total_seconds"] == "16"
    assert stats["tokens_per_song_exact"] == "19/2"
    assert stats["tokens_per_second_exact"] == "19/16"
    assert stats["failures"] == []
