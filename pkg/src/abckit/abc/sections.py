"""Section splitting and measure counting.

A section ends after ``:|``, ``::``, ``||`` or ``|]`` and a new one begins
at ``|:``. Volta brackets never delimit: a second ending that follows
``:|`` stays with the section it closes, and a pickup before the first
``|:`` joins the section after it.
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

from .tokens import (
    BarKind,
    Barline,
    BodyToken,
    ChordSymbol,
    Comment,
    Decoration,
    LineBreak,
    MultiNote,
    Note,
    Rest,
    SlurOpen,
    TuneDocument,
    Volta,
)

SECTION_END = frozenset({BarKind.REPEAT_END, BarKind.REPEAT_BOTH, BarKind.DOUBLE, BarKind.FINAL})
_TIMED = (Note, Rest, MultiNote)
_LEADING_NOISE = (LineBreak, Comment, ChordSymbol, Decoration, SlurOpen)


def _has_timed(chunk: Sequence[BodyToken]) -> bool:
    return any(isinstance(t, _TIMED) for t in chunk)


def _starts_with_volta(chunk: Sequence[BodyToken]) -> bool:
    for tok in chunk:
        if isinstance(tok, _LEADING_NOISE):
            continue
        return isinstance(tok, Volta)
    return False


def split_body(body: Sequence[BodyToken]) -> List[Tuple[BodyToken, ...]]:
    """Partition a token sequence into sections; concatenating them gives ``body`` back."""
    chunks: List[List[BodyToken]] = []
    cur: List[BodyToken] = []
    for tok in body:
        if isinstance(tok, Barline) and tok.kind is BarKind.REPEAT_START and cur:
            chunks.append(cur)
            cur = []
        cur.append(tok)
        if isinstance(tok, Barline) and tok.kind in SECTION_END:
            chunks.append(cur)
            cur = []
    if cur:
        chunks.append(cur)

    merged: List[List[BodyToken]] = []
    for chunk in chunks:
        if merged and (not _has_timed(chunk) or _starts_with_volta(chunk)):
            merged[-1].extend(chunk)
        else:
            merged.append(chunk)
    if len(merged) > 1:
        head = merged[0]
        if not _has_timed(head) or not any(isinstance(t, Barline) for t in head):
            merged[1] = head + merged[1]
            merged.pop(0)
    if not merged:
        merged = [[]]
    return [tuple(c) for c in merged]


def split_sections(doc: TuneDocument) -> List[Tuple[BodyToken, ...]]:
    """Sections of a parsed tune, in order. Always at least one."""
    return split_body(doc.body)


def section_documents(doc: TuneDocument) -> List[TuneDocument]:
    """Each section as a standalone document sharing the tune's headers."""
    return [doc.with_body(sec) for sec in split_sections(doc)]


def count_bars(tokens: Sequence[BodyToken]) -> int:
    """Number of measures holding at least one note, rest or chord."""
    bars = 0
    open_measure = False
    for tok in tokens:
        if isinstance(tok, _TIMED):
            open_measure = True
        elif isinstance(tok, Barline):
            if open_measure:
                bars += 1
            open_measure = False
    return bars + (1 if open_measure else 0)
