"""Performed length of a tune, with repeats expanded."""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence

from .tokens import (
    BarKind,
    Barline,
    BodyToken,
    BrokenRhythm,
    InlineField,
    MultiNote,
    Note,
    Rest,
    TuneDocument,
    Tuplet,
    Volta,
)

DEFAULT_UNIT = Fraction(1, 8)
DEFAULT_METER = Fraction(4, 4)
DEFAULT_TEMPO_QPM = Fraction(120)

_TEMPO_RE = re.compile(r"((?:\d+/\d+\s*)+)=\s*(\d+(?:\.\d+)?)")
_BARE_TEMPO_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*$")
# tuplet (n -> n notes in the time of q
_TUPLET_Q = {2: 3, 3: 2, 4: 3, 6: 2, 8: 3}


class ZeroDuration(ValueError):
    """The body has no notes, rests or chords to time."""


@dataclass(frozen=True)
class DurationInfo:
    whole_note_total: Fraction
    seconds: Fraction
    tempo_qpm: Fraction


def parse_unit_length(value: str | None) -> Fraction:
    if not value:
        return DEFAULT_UNIT
    num, den = value.split("/")
    return Fraction(int(num), int(den))


def parse_meter(value: str | None) -> Fraction:
    if not value:
        return DEFAULT_METER
    value = value.strip()
    if value == "C":
        return Fraction(4, 4)
    if value == "C|":
        return Fraction(2, 2)
    if value == "none":
        return DEFAULT_METER
    num, den = value.split("/")
    return Fraction(int(num), int(den))


def _is_compound(meter: Fraction, meter_text: str | None) -> bool:
    top = int(meter_text.split("/")[0]) if meter_text and "/" in meter_text else meter.numerator
    return top % 3 == 0 and top > 3


def parse_tempo(value: str | None, unit: Fraction) -> Fraction:
    """Quarter notes per minute from a ``Q:`` value; 120 when absent or unreadable."""
    if not value:
        return DEFAULT_TEMPO_QPM
    m = _TEMPO_RE.search(value)
    if m:
        beat = sum((Fraction(p) for p in m.group(1).split()), Fraction(0))
        qpm = Fraction(m.group(2)) * beat * 4
    else:
        m = _BARE_TEMPO_RE.match(value)
        if not m:
            return DEFAULT_TEMPO_QPM
        # legacy form counts unit-length notes per minute
        qpm = Fraction(m.group(1)) * unit * 4
    return qpm if qpm > 0 else DEFAULT_TEMPO_QPM


def token_durations(tokens: Sequence[BodyToken], unit: Fraction, meter_text: str | None = None) -> List[Fraction]:
    """Length of every token in whole notes (zero for untimed tokens), played once."""
    meter = parse_meter(meter_text)
    compound = _is_compound(meter, meter_text)
    out = [Fraction(0)] * len(tokens)
    timed_idx: List[int] = []
    tuplet_left = 0
    tuplet_factor = Fraction(1)
    for i, tok in enumerate(tokens):
        if isinstance(tok, InlineField):
            if tok.field == "L":
                unit = parse_unit_length(tok.value)
            elif tok.field == "M":
                meter_text = tok.value
                meter = parse_meter(meter_text)
                compound = _is_compound(meter, meter_text)
        elif isinstance(tok, Tuplet):
            q = _TUPLET_Q.get(tok.n, 3 if compound else 2)
            tuplet_factor = Fraction(q, tok.n)
            tuplet_left = tok.n
        elif isinstance(tok, (Note, Rest, MultiNote)):
            if isinstance(tok, MultiNote):
                d = tok.duration * tok.notes[0].duration
            else:
                d = tok.duration
            d *= unit
            if tuplet_left:
                d *= tuplet_factor
                tuplet_left -= 1
            out[i] = d
            timed_idx.append(i)

    # broken rhythm rebalances the two neighbouring timed tokens
    for i, tok in enumerate(tokens):
        if not isinstance(tok, BrokenRhythm):
            continue
        k = bisect.bisect_left(timed_idx, i)
        if k == 0 or k == len(timed_idx):
            continue
        short = Fraction(1, 2 ** tok.count)
        long_ = 2 - short
        left, right = timed_idx[k - 1], timed_idx[k]
        if tok.direction == ">":
            out[left] *= long_
            out[right] *= short
        else:
            out[left] *= short
            out[right] *= long_
    return out


def play_counts(tokens: Sequence[BodyToken]) -> List[int]:
    """How many times each token is performed once repeats are expanded.

    ``|: ... :|`` plays twice, ``::`` closes one repeat and opens the next,
    a ``:|`` with no opener repeats from the tune start (or from the
    previous repeat end), and a first ending plays once.
    """
    counts = [1] * len(tokens)
    start = 0
    first_ending = None
    for i, tok in enumerate(tokens):
        if isinstance(tok, Volta):
            if tok.number == 1 and first_ending is None:
                first_ending = i
        elif isinstance(tok, Barline):
            if tok.kind is BarKind.REPEAT_START:
                start = i + 1
                first_ending = None
            elif tok.kind in (BarKind.REPEAT_END, BarKind.REPEAT_BOTH):
                stop = first_ending if first_ending is not None else i
                for j in range(start, stop):
                    counts[j] += 1
                start = i + 1
                first_ending = None
    return counts


def duration_info(doc: TuneDocument) -> DurationInfo:
    """Total performed length of a tune in whole notes and seconds.

    Raises:
        ZeroDuration: the body holds nothing timed.
    """
    unit = parse_unit_length(doc.header("L"))
    durations = token_durations(doc.body, unit, doc.header("M"))
    if not any(isinstance(t, (Note, Rest, MultiNote)) for t in doc.body):
        raise ZeroDuration("body has no notes, rests or chords")
    counts = play_counts(doc.body)
    total = sum((d * c for d, c in zip(durations, counts)), Fraction(0))
    tempo = parse_tempo(doc.header("Q"), unit)
    seconds = total * 4 * 60 / tempo
    return DurationInfo(total, seconds, tempo)
