import json
import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abckit.abc import (
    EmptyCorpus,
    TokenizerLoadError,
    TokenizerSpec,
    corpus_stats,
    count_tokens,
    load_tokenizer_spec,
)
from abckit.abc.tokenizer import _PRETOKEN_RE, _byte_alphabet
from tunegen import random_tune


def train_bpe(texts, n_merges):
    """Tiny reference trainer: most frequent adjacent pair, repeatedly."""
    table = _byte_alphabet()
    words = Counter()
    for text in texts:
        for piece in _PRETOKEN_RE.findall(text):
            words[tuple(table[b] for b in piece.encode("utf-8"))] += 1
    vocab = {sym: i for i, sym in enumerate(table.values())}
    merges = []
    for _ in range(n_merges):
        pairs = Counter()
        for word, freq in words.items():
            for a, b in zip(word, word[1:]):
                pairs[(a, b)] += freq
        if not pairs:
            break
        (a, b), _ = max(pairs.items(), key=lambda kv: (kv[1], kv[0]))
        merges.append((a, b))
        vocab.setdefault(a + b, len(vocab))
        new_words = Counter()
        for word, freq in words.items():
            out, i = [], 0
            while i < len(word):
                if i < len(word) - 1 and (word[i], word[i + 1]) == (a, b):
                    out.append(a + b)
                    i += 2
                else:
                    out.append(word[i])
                    i += 1
            new_words[tuple(out)] += freq
        words = new_words
    return vocab, merges


@pytest.fixture(scope="module")
def bpe_files(tmp_path_factory, waltz_text, sample_tune):
    d = tmp_path_factory.mktemp("bpe")
    rng = random.Random(7)
    corpus = [waltz_text, sample_tune] + [random_tune(rng, i) for i in range(30)]
    vocab, merges = train_bpe(corpus, 120)
    (d / "vocab.json").write_text(json.dumps(vocab), encoding="utf-8")
    (d / "merges.txt").write_text("#version: 0.2\n" + "".join(f"{a} {b}\n" for a, b in merges), encoding="utf-8")
    (d / "tok.cfg").write_text("# test tokenizer\nmode=bpe\nvocab=vocab.json\nmerges=merges.txt\n", encoding="utf-8")
    return d


def test_whitespace_and_empty():
    assert count_tokens("F G A", TokenizerSpec("whitespace")) == 3
    for mode in ("bytes", "characters", "whitespace"):
        assert count_tokens("", TokenizerSpec(mode)) == 0


def test_characters_and_bytes(waltz_text):
    assert count_tokens(waltz_text, TokenizerSpec("characters")) == len(waltz_text)
    assert count_tokens("F#m é", TokenizerSpec("bytes")) == 6


def test_spec_invariants(tmp_path):
    with pytest.raises(TokenizerLoadError):
        TokenizerSpec("bpe")
    with pytest.raises(TokenizerLoadError):
        TokenizerSpec("characters", bpe_vocab_path="v.json")
    with pytest.raises(TokenizerLoadError):
        TokenizerSpec("sentencepiece")


def test_load_spec_resolves_relative(bpe_files):
    spec = load_tokenizer_spec(bpe_files / "tok.cfg")
    assert spec.mode == "bpe"
    assert spec.bpe_vocab_path == str(bpe_files / "vocab.json")


def test_missing_vocab(tmp_path):
    cfg = tmp_path / "t.cfg"
    cfg.write_text("mode=bpe\nvocab=nope.json\nmerges=nope.txt\n")
    with pytest.raises(TokenizerLoadError):
        count_tokens("abc", load_tokenizer_spec(cfg))
    cfg.write_text("mode=bpe\nsize=3\n")
    with pytest.raises(TokenizerLoadError):
        load_tokenizer_spec(cfg)


def test_bpe_matches_gpt2_reference(bpe_files, waltz_text, sample_tune):
    transformers = pytest.importorskip("transformers")
    ref = transformers.GPT2Tokenizer(str(bpe_files / "vocab.json"), str(bpe_files / "merges.txt"))
    spec = load_tokenizer_spec(bpe_files / "tok.cfg")
    rng = random.Random(3)
    texts = [waltz_text, sample_tune, "F G A", "a_b __c ^^d"] + [random_tune(rng, i) for i in range(40)]
    for text in texts:
        assert count_tokens(text, spec) == len(ref.tokenize(text)), text


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=120))
def test_bpe_never_exceeds_characters(bpe_files, text):
    spec = load_tokenizer_spec(bpe_files / "tok.cfg")
    assert count_tokens(text, spec) <= count_tokens(text, TokenizerSpec("characters"))


def test_bpe_compresses_abc(bpe_files, waltz_text):
    spec = load_tokenizer_spec(bpe_files / "tok.cfg")
    assert count_tokens(waltz_text, spec) < len(waltz_text)


def test_corpus_stats_one_tune(tmp_path):
    # 8 bars of 2/4 at quarter = 120: 8 seconds; whitespace tokens counted by hand
    text = "X:1\nL:1/8\nM:2/4\nK:C\n" + " | ".join(["ab cd"] * 8) + " |]\n"
    path = tmp_path / "t.abc"
    path.write_text(text)
    stats = corpus_stats([path], TokenizerSpec("whitespace"))
    n = 4 + 8 * 2 + 7 + 1
    assert stats.total_tokens == n
    assert stats.total_seconds == 8
    assert stats.tokens_per_song == n
    assert stats.tokens_per_second == Fraction(n, 8)


def test_corpus_stats_means_and_failures(tmp_path):
    a = tmp_path / "a.abc"
    a.write_text("X:1\nL:1/4\nM:4/4\nK:C\nC D E F |]\n")  # 2 s
    b = tmp_path / "b.abc"
    b.write_text("X:2\nL:1/4\nM:4/4\nK:C\n|: C D E F | G A B c :|\n")  # 8 s
    bad = tmp_path / "bad.abc"
    bad.write_text("K:C\nabc\n")
    spec = TokenizerSpec("characters")
    stats = corpus_stats([a, b, bad], spec, jobs=3)
    ta, tb = len(a.read_text()), len(b.read_text())
    assert stats.songs == 2
    assert stats.tokens_per_song == Fraction(ta + tb, 2)
    assert stats.tokens_per_second == Fraction(ta + tb, 10)
    assert [name for name, _ in stats.failures] == [str(bad)]
    assert "missing_X_header" in stats.failures[0][1]


def test_corpus_stats_tunebook(tmp_path, waltz_text, sample_tune):
    book = tmp_path / "book.abc"
    book.write_text(waltz_text + "\n" + sample_tune.replace("X:1", "X:2"))
    assert corpus_stats([book], TokenizerSpec("characters")).songs == 2


def test_empty_corpus(tmp_path):
    bad = tmp_path / "bad.abc"
    bad.write_text("nothing here\n")
    with pytest.raises(EmptyCorpus):
        corpus_stats([bad], TokenizerSpec("characters"))
