"""Token counting under a pluggable tokenizer.

BPE mode reads a ``vocab.json`` + ``merges.txt`` pair in the usual GPT-2
layout. Merging runs over characters rather than raw bytes (code points
below 256 go through the GPT-2 byte alphabet so ``Ġ``-style vocabularies
line up), which keeps a BPE count at or below the character count.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple

MODES = ("bytes", "characters", "whitespace", "bpe")

# GPT-2 pre-tokenization, restricted to what the stdlib ``re`` supports
_PRETOKEN_RE = re.compile(r"""'s|'t|'re|'ve|'m|'ll|'d| ?[^\W\d_]+| ?\d+| ?(?:[^\s\w]|_)+|\s+(?!\S)|\s+""")


class TokenizerLoadError(Exception):
    """Tokenizer config or vocabulary files are missing or malformed."""


@dataclass(frozen=True)
class TokenizerSpec:
    mode: str
    bpe_vocab_path: Optional[str] = None
    bpe_merges_path: Optional[str] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise TokenizerLoadError(f"unknown tokenizer mode {self.mode!r}")
        has_paths = self.bpe_vocab_path is not None, self.bpe_merges_path is not None
        if self.mode == "bpe" and not all(has_paths):
            raise TokenizerLoadError("bpe mode needs both vocab and merges paths")
        if self.mode != "bpe" and any(has_paths):
            raise TokenizerLoadError(f"{self.mode} mode takes no vocab/merges paths")


def load_tokenizer_spec(path) -> TokenizerSpec:
    """Read a ``key=value`` config (``mode=``, ``vocab=``, ``merges=``).

    Relative vocab/merges paths resolve against the config file's directory.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise TokenizerLoadError(f"cannot read {path}: {exc}") from exc
    values: Dict[str, str] = {}
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise TokenizerLoadError(f"{path}:{n}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in ("mode", "vocab", "merges"):
            raise TokenizerLoadError(f"{path}:{n}: unknown key {key!r}")
        values[key] = value
    if "mode" not in values:
        raise TokenizerLoadError(f"{path}: missing mode=")

    def resolve(v: Optional[str]) -> Optional[str]:
        if v is None:
            return None
        p = Path(v)
        return str(p if p.is_absolute() else path.parent / p)

    return TokenizerSpec(values["mode"], resolve(values.get("vocab")), resolve(values.get("merges")))


@lru_cache(maxsize=1)
def _byte_alphabet() -> Dict[int, str]:
    printable = list(range(ord("!"), ord("~") + 1)) + list(range(ord("¡"), ord("¬") + 1)) + list(range(ord("®"), ord("ÿ") + 1))
    table = {b: chr(b) for b in printable}
    n = 0
    for b in range(256):
        if b not in table:
            table[b] = chr(256 + n)
            n += 1
    return table


_BYTE_SYMBOLS = _byte_alphabet()


class BPE:
    """Greedy lowest-rank-first pair merging."""

    def __init__(self, vocab: Dict[str, int], merges: List[Tuple[str, str]]):
        self.vocab = vocab
        self.ranks = {pair: i for i, pair in enumerate(merges)}
        self._cache: Dict[str, Tuple[str, ...]] = {}

    @classmethod
    def from_files(cls, vocab_path, merges_path) -> "BPE":
        try:
            vocab = json.loads(Path(vocab_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise TokenizerLoadError(f"bad vocab file {vocab_path}: {exc}") from exc
        if not isinstance(vocab, dict) or not all(isinstance(v, int) for v in vocab.values()):
            raise TokenizerLoadError(f"{vocab_path}: vocab must map token strings to integer ids")
        try:
            raw = Path(merges_path).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise TokenizerLoadError(f"cannot read merges file {merges_path}: {exc}") from exc
        merges = []
        for n, line in enumerate(raw, 1):
            if not line.strip() or line.startswith("#version"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise TokenizerLoadError(f"{merges_path}:{n}: expected two symbols per merge")
            merges.append((parts[0], parts[1]))
        return cls(vocab, merges)

    def encode_piece(self, piece: str) -> Tuple[str, ...]:
        cached = self._cache.get(piece)
        if cached is not None:
            return cached
        # one symbol per character, so a piece never yields more tokens than characters
        word = [_BYTE_SYMBOLS[ord(c)] if ord(c) < 256 else c for c in piece]
        while len(word) > 1:
            best = None
            best_rank = None
            for i in range(len(word) - 1):
                rank = self.ranks.get((word[i], word[i + 1]))
                if rank is not None and (best_rank is None or rank < best_rank):
                    best, best_rank = i, rank
            if best is None:
                break
            pair = (word[best], word[best + 1])
            merged: List[str] = []
            i = 0
            while i < len(word):
                if i < len(word) - 1 and (word[i], word[i + 1]) == pair:
                    merged.append(word[i] + word[i + 1])
                    i += 2
                else:
                    merged.append(word[i])
                    i += 1
            word = merged
        result = tuple(word)
        self._cache[piece] = result
        return result

    def encode(self, text: str) -> List[str]:
        out: List[str] = []
        for piece in _PRETOKEN_RE.findall(text):
            out.extend(self.encode_piece(piece))
        return out


_BPE_CACHE: Dict[Tuple[str, str], BPE] = {}


def load_bpe(spec: TokenizerSpec) -> BPE:
    key = (spec.bpe_vocab_path, spec.bpe_merges_path)
    if key not in _BPE_CACHE:
        _BPE_CACHE[key] = BPE.from_files(*key)
    return _BPE_CACHE[key]


def count_tokens(text: str, spec: TokenizerSpec) -> int:
    if not text:
        return 0
    if spec.mode == "bytes":
        return len(text.encode("utf-8"))
    if spec.mode == "characters":
        return len(text)
    if spec.mode == "whitespace":
        return len(text.split())
    return len(load_bpe(spec).encode(text))
