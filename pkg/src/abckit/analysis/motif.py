"""Most frequent short figure per section."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from ..abc.sections import split_sections
from ..abc.tokens import BodyToken, MultiNote, Note, Rest, TuneDocument, Tuplet, render_tokens

MAX_MOTIF_LEN = 8
_KEEP = (Note, Rest, MultiNote, Tuplet)


class EmptyAfterFilter(ValueError):
    def __init__(self, message: str = "no notes left after filtering", section: int | None = None):
        self.section = section
        super().__init__(message if section is None else f"section {section}: {message}")


@dataclass(frozen=True)
class Motif:
    tokens: Tuple[BodyToken, ...]
    frequency: int

    def __str__(self) -> str:
        return render_tokens(self.tokens)


def filter_for_motif(tokens: Sequence[BodyToken]) -> Tuple[BodyToken, ...]:
    """Keep notes, rests, chords and tuplet markers; drop bars, chord symbols, ornaments."""
    return tuple(t for t in tokens if isinstance(t, _KEEP))


def extract_motif(section: Sequence[BodyToken]) -> Motif:
    """Most frequent contiguous run of 1-8 filtered tokens.

    Ties go to the longer run, then to the run that occurs first.

    Raises:
        EmptyAfterFilter: nothing survives filtering.
    """
    seq = filter_for_motif(section)
    if not seq:
        raise EmptyAfterFilter()
    counts: Counter = Counter()
    first_seen: Dict[Tuple[BodyToken, ...], int] = {}
    for start in range(len(seq)):
        for length in range(1, MAX_MOTIF_LEN + 1):
            if start + length > len(seq):
                break
            gram = seq[start:start + length]
            counts[gram] += 1
            first_seen.setdefault(gram, start)
    best = max(counts, key=lambda g: (counts[g], len(g), -first_seen[g]))
    return Motif(best, counts[best])


def extract_motifs_per_section(doc: TuneDocument) -> List[Motif]:
    motifs = []
    for i, sec in enumerate(split_sections(doc), 1):
        try:
            motifs.append(extract_motif(sec))
        except EmptyAfterFilter:
            raise EmptyAfterFilter(section=i) from None
    return motifs
