"""Typed body tokens for the supported ABC subset.

All tokens are frozen dataclasses, so token sequences can be hashed and
compared structurally (motif counting relies on this).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Tuple, Union


class Accidental(str, enum.Enum):
    NONE = "none"
    SHARP = "sharp"
    FLAT = "flat"
    NATURAL = "natural"
    DOUBLE_SHARP = "double_sharp"
    DOUBLE_FLAT = "double_flat"


ACCIDENTAL_TEXT = {
    Accidental.NONE: "",
    Accidental.SHARP: "^",
    Accidental.FLAT: "_",
    Accidental.NATURAL: "=",
    Accidental.DOUBLE_SHARP: "^^",
    Accidental.DOUBLE_FLAT: "__",
}


class BarKind(str, enum.Enum):
    SINGLE = "single"
    DOUBLE = "double"
    FINAL = "final"
    REPEAT_START = "repeat_start"
    REPEAT_END = "repeat_end"
    REPEAT_BOTH = "repeat_both"


BAR_TEXT = {
    BarKind.SINGLE: "|",
    BarKind.DOUBLE: "||",
    BarKind.FINAL: "|]",
    BarKind.REPEAT_START: "|:",
    BarKind.REPEAT_END: ":|",
    BarKind.REPEAT_BOTH: "::",
}

REPEAT_BARS = frozenset({BarKind.REPEAT_START, BarKind.REPEAT_END, BarKind.REPEAT_BOTH})


def render_duration(d: Fraction) -> str:
    """Render a length multiplier the way ABC writes it: 1 -> '', 1/2 -> '/'."""
    if d == 1:
        return ""
    if d.denominator == 1:
        return str(d.numerator)
    num = "" if d.numerator == 1 else str(d.numerator)
    if d.denominator == 2:
        return num + "/"
    return f"{num}/{d.denominator}"


@dataclass(frozen=True)
class Note:
    pitch: str
    accidental: Accidental = Accidental.NONE
    octave_shift: int = 0
    duration: Fraction = Fraction(1)

    def render(self) -> str:
        marks = "'" * self.octave_shift if self.octave_shift > 0 else "," * -self.octave_shift
        return ACCIDENTAL_TEXT[self.accidental] + self.pitch + marks + render_duration(self.duration)


@dataclass(frozen=True)
class Rest:
    duration: Fraction = Fraction(1)

    def render(self) -> str:
        return "z" + render_duration(self.duration)


@dataclass(frozen=True)
class MultiNote:
    notes: Tuple[Note, ...]
    duration: Fraction = Fraction(1)

    def render(self) -> str:
        return "[" + "".join(n.render() for n in self.notes) + "]" + render_duration(self.duration)


@dataclass(frozen=True)
class ChordSymbol:
    text: str

    def render(self) -> str:
        return f'"{self.text}"'


@dataclass(frozen=True)
class Barline:
    kind: BarKind

    def render(self) -> str:
        return BAR_TEXT[self.kind]


@dataclass(frozen=True)
class Volta:
    number: int

    def render(self) -> str:
        return f"[{self.number}"


@dataclass(frozen=True)
class Tuplet:
    n: int

    def render(self) -> str:
        return f"({self.n}"


@dataclass(frozen=True)
class SlurOpen:
    def render(self) -> str:
        return "("


@dataclass(frozen=True)
class SlurClose:
    def render(self) -> str:
        return ")"


@dataclass(frozen=True)
class GraceGroup:
    inner: Tuple["BodyToken", ...]
    acciaccatura: bool = False

    def render(self) -> str:
        return "{" + ("/" if self.acciaccatura else "") + "".join(t.render() for t in self.inner) + "}"


@dataclass(frozen=True)
class Decoration:
    # raw form, e.g. "!trill!" or "~"
    text: str

    def render(self) -> str:
        return self.text


@dataclass(frozen=True)
class BrokenRhythm:
    direction: str  # "<" or ">"
    count: int = 1

    def render(self) -> str:
        return self.direction * self.count


@dataclass(frozen=True)
class Tie:
    def render(self) -> str:
        return "-"


@dataclass(frozen=True)
class InlineField:
    field: str
    value: str

    def render(self) -> str:
        return f"[{self.field}:{self.value}]"


@dataclass(frozen=True)
class LineBreak:
    def render(self) -> str:
        return "\n"


@dataclass(frozen=True)
class Comment:
    text: str

    def render(self) -> str:
        return "%" + self.text


BodyToken = Union[
    Note, Rest, MultiNote, ChordSymbol, Barline, Volta, Tuplet, SlurOpen, SlurClose,
    GraceGroup, Decoration, BrokenRhythm, Tie, InlineField, LineBreak, Comment,
]
BodyTokenSeq = Tuple[BodyToken, ...]

TIMED_TYPES = (Note, Rest, MultiNote)


def is_repeat_bar(tok: BodyToken) -> bool:
    return isinstance(tok, Barline) and tok.kind in REPEAT_BARS


_NO_SPACE_AFTER = (SlurOpen, Tuplet, GraceGroup, Decoration, BrokenRhythm)
_NO_SPACE_BEFORE = (SlurClose, Tie, BrokenRhythm)


def render_tokens(tokens) -> str:
    """Serialize a token sequence.

    Tokens are space separated except where ABC attaches a symbol to its
    neighbour (slurs, ties, broken rhythm, graces, decorations).
    """
    out: list[str] = []
    prev = None
    for tok in tokens:
        if isinstance(tok, LineBreak):
            out.append("\n")
            prev = None
            continue
        if isinstance(prev, Comment):
            # a comment runs to end of line
            out.append("\n")
        elif prev is not None and not isinstance(prev, _NO_SPACE_AFTER) and not isinstance(tok, _NO_SPACE_BEFORE):
            out.append(" ")
        out.append(tok.render())
        prev = tok
    return "".join(out)


@dataclass(frozen=True)
class TuneDocument:
    headers: Tuple[Tuple[str, str], ...]
    body: BodyTokenSeq
    source: str = field(default="", compare=False, repr=False)

    def header(self, name: str, default: str | None = None) -> str | None:
        """Value of the first header with this field letter."""
        for key, value in self.headers:
            if key == name:
                return value
        return default

    def with_body(self, body) -> "TuneDocument":
        return TuneDocument(self.headers, tuple(body), source="")
