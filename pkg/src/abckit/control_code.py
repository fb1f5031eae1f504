"""S/B/E control codes: section count, bars per section, pairwise similarity.

``S:4 B:1 E:1 B:8 E:3 E:7 B:1 E:1 E:4 E:1 B:8`` reads as four sections of
1, 8, 1 and 8 bars. The E fields in front of the n-th B give that section's
similarity (0-10) to each earlier section, in order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

from .abc.sections import count_bars, split_sections
from .abc.tokens import ChordSymbol, Comment, LineBreak, TuneDocument
from .sequence import edit_distance

MISSING_S = "missing_S"
WRONG_E_COUNT = "wrong_E_count"
BAD_VALUE = "bad_value"
VALUE_OUT_OF_RANGE = "value_out_of_range"
SECTION_COUNT_MISMATCH = "section_count_mismatch"

_FIELD_RE = re.compile(r"^([SBE]):(\d+)$")


class MalformedControlCode(ValueError):
    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        super().__init__(reason + (f": {detail}" if detail else ""))


class EmptySection(ValueError):
    """A section holds no notes, so it has no bars or similarity."""


@dataclass(frozen=True)
class ControlCode:
    num_sections: int
    bars: Tuple[int, ...]
    # sims[k][m]: similarity of section m to section k + 1 (both 0-based)
    sims: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "bars", tuple(self.bars))
        object.__setattr__(self, "sims", tuple(tuple(row) for row in self.sims))
        if self.num_sections < 1:
            raise MalformedControlCode(VALUE_OUT_OF_RANGE, "need at least one section")
        if len(self.bars) != self.num_sections:
            raise MalformedControlCode(SECTION_COUNT_MISMATCH, f"{len(self.bars)} B fields for S:{self.num_sections}")
        if any(b < 1 for b in self.bars):
            raise MalformedControlCode(VALUE_OUT_OF_RANGE, "bar counts must be >= 1")
        if len(self.sims) != self.num_sections - 1 or any(len(row) != k + 1 for k, row in enumerate(self.sims)):
            raise MalformedControlCode(WRONG_E_COUNT, "similarity matrix is not lower triangular")
        if any(not 0 <= e <= 10 for row in self.sims for e in row):
            raise MalformedControlCode(VALUE_OUT_OF_RANGE, "similarities must be in [0, 10]")

    def __str__(self) -> str:
        return serialize_control_code(self)


def parse_control_code(text: str) -> ControlCode:
    """Parse a whitespace-separated control code.

    A trailing ``S:`` field is accepted when it repeats the section count.

    Raises:
        MalformedControlCode: ``reason`` names the problem.
    """
    fields = text.split()
    if not fields or not fields[0].startswith("S:"):
        raise MalformedControlCode(MISSING_S)
    parsed: List[Tuple[str, int]] = []
    for f in fields:
        m = _FIELD_RE.match(f)
        if not m:
            raise MalformedControlCode(BAD_VALUE, repr(f))
        parsed.append((m.group(1), int(m.group(2))))

    num_sections = parsed[0][1]
    if num_sections < 1:
        raise MalformedControlCode(VALUE_OUT_OF_RANGE, "S must be >= 1")
    body = parsed[1:]
    if body and body[-1][0] == "S":
        if body[-1][1] != num_sections:
            raise MalformedControlCode(SECTION_COUNT_MISMATCH, f"trailing S:{body[-1][1]} vs S:{num_sections}")
        body = body[:-1]

    bars: List[int] = []
    sims: List[Tuple[int, ...]] = []
    pending: List[int] = []
    for kind, value in body:
        if kind == "S":
            raise MalformedControlCode(BAD_VALUE, "S field in the middle of the code")
        if kind == "E":
            if not 0 <= value <= 10:
                raise MalformedControlCode(VALUE_OUT_OF_RANGE, f"E:{value}")
            pending.append(value)
            continue
        if value < 1:
            raise MalformedControlCode(VALUE_OUT_OF_RANGE, f"B:{value}")
        if len(pending) != len(bars):
            raise MalformedControlCode(
                WRONG_E_COUNT, f"section {len(bars) + 1} needs {len(bars)} E fields, got {len(pending)}"
            )
        if bars:
            sims.append(tuple(pending))
        bars.append(value)
        pending = []
    if pending:
        raise MalformedControlCode(WRONG_E_COUNT, "E fields after the last B")
    if len(bars) != num_sections:
        raise MalformedControlCode(SECTION_COUNT_MISMATCH, f"{len(bars)} B fields for S:{num_sections}")
    return ControlCode(num_sections, tuple(bars), tuple(sims))


def serialize_control_code(cc: ControlCode) -> str:
    parts = [f"S:{cc.num_sections}", f"B:{cc.bars[0]}"]
    for row, bars in zip(cc.sims, cc.bars[1:]):
        parts.extend(f"E:{e}" for e in row)
        parts.append(f"B:{bars}")
    return " ".join(parts)


def section_similarity(a: Sequence, b: Sequence) -> int:
    """Edit-distance similarity on a 0-10 scale, rounded half up."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 10
    ratio = 1 - Fraction(edit_distance(a, b), longest)
    value = int(ratio * 10 + Fraction(1, 2))
    return min(10, max(0, value))


def similarity_tokens(section) -> List[str]:
    """Rendered tokens of a section with chord symbols and layout removed."""
    return [t.render() for t in section if not isinstance(t, (ChordSymbol, LineBreak, Comment))]


def compute_control_code(doc: TuneDocument) -> ControlCode:
    """Derive a control code from a parsed tune.

    Raises:
        EmptySection: some section contains no notes, rests or chords.
    """
    sections = split_sections(doc)
    bars = []
    for i, sec in enumerate(sections):
        n = count_bars(sec)
        if n == 0:
            raise EmptySection(f"section {i + 1} has no timed content")
        bars.append(n)
    toks = [similarity_tokens(sec) for sec in sections]
    sims = tuple(
        tuple(section_similarity(toks[m], toks[n]) for m in range(n))
        for n in range(1, len(sections))
    )
    return ControlCode(len(sections), tuple(bars), sims)
