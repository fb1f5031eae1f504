"""Corpus-level token statistics: tokens per song and tokens per second."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Sequence, Tuple

from .duration import ZeroDuration, duration_info
from .parser import ParseError, parse_tune, split_tunebook
from .tokenizer import TokenizerSpec, count_tokens

log = logging.getLogger(__name__)


class EmptyCorpus(ValueError):
    """No tune in the corpus could be measured."""


@dataclass
class CorpusStats:
    tokens_per_song: Fraction
    tokens_per_second: Fraction
    songs: int
    total_tokens: int
    total_seconds: Fraction
    failures: List[Tuple[str, str]] = field(default_factory=list)


def _measure(name: str, text: str, spec: TokenizerSpec):
    try:
        doc = parse_tune(text)
        seconds = duration_info(doc).seconds
    except ParseError as exc:
        return name, None, None, f"{exc.kind} at {exc.line}:{exc.column}"
    except ZeroDuration as exc:
        return name, None, None, f"zero_duration: {exc}"
    return name, count_tokens(text, spec), seconds, None


def corpus_stats(paths: Sequence, spec: TokenizerSpec, jobs: int = 1) -> CorpusStats:
    """Mean tokens per tune and total tokens over total performed seconds.

    Every tune of every file counts as one song. Tunes that fail to parse or
    have no timed content are logged, listed in ``failures`` and left out.

    Raises:
        EmptyCorpus: nothing measurable was found.
    """
    work = []
    for path in paths:
        text = Path(path).read_text(encoding="utf-8")
        tunes = split_tunebook(text)
        for i, tune in enumerate(tunes):
            name = str(path) if len(tunes) == 1 else f"{path}#{i + 1}"
            work.append((name, tune))
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(lambda item: _measure(item[0], item[1], spec), work))

    failures = []
    total_tokens = 0
    total_seconds = Fraction(0)
    songs = 0
    for name, tokens, seconds, err in results:
        if err is not None:
            log.warning("skipping %s: %s", name, err)
            failures.append((name, err))
            continue
        songs += 1
        total_tokens += tokens
        total_seconds += seconds
    if songs == 0:
        raise EmptyCorpus("no measurable tunes in corpus")
    if total_seconds == 0:
        raise EmptyCorpus("corpus has zero total duration")
    return CorpusStats(
        tokens_per_song=Fraction(total_tokens, songs),
        tokens_per_second=Fraction(total_tokens) / total_seconds,
        songs=songs,
        total_tokens=total_tokens,
        total_seconds=total_seconds,
        failures=failures,
    )
