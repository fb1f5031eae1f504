"""Conditioning signals pulled out of a score: chords and the bare melody."""

from __future__ import annotations

from typing import List

from ..abc.tokens import ChordSymbol, TuneDocument

# quoted text starting with these is a free-text annotation, not a chord
ANNOTATION_PREFIXES = ("^", "_", "<", ">", "@")


def extract_chords(doc: TuneDocument) -> List[str]:
    """Chord symbols in body order, duplicates kept."""
    return [t.text for t in doc.body if isinstance(t, ChordSymbol) and not t.text.startswith(ANNOTATION_PREFIXES)]


def strip_chords(doc: TuneDocument) -> TuneDocument:
    return doc.with_body(t for t in doc.body if not isinstance(t, ChordSymbol))
