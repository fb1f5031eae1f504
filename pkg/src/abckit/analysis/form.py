"""Musical form from a control code: letters (``ABB'C``) and named terms."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import FrozenSet, List, Sequence, Tuple

from ..control_code import ControlCode


class SimilarityLevel(str, enum.Enum):
    IDENTICAL = "s"
    VARIATION = "v"
    DIFFERENT = "d"


def classify_similarity(e: int) -> SimilarityLevel:
    """>= 8 identical, 6-7 variation, below 6 different."""
    if not 0 <= e <= 10:
        raise ValueError(f"similarity {e} outside [0, 10]")
    if e >= 8:
        return SimilarityLevel.IDENTICAL
    if e >= 6:
        return SimilarityLevel.VARIATION
    return SimilarityLevel.DIFFERENT


def similarity_levels(cc: ControlCode) -> List[List[SimilarityLevel]]:
    return [[classify_similarity(e) for e in row] for row in cc.sims]


@dataclass(frozen=True)
class AlphabeticForm:
    letters: Tuple[Tuple[str, int], ...]

    def __str__(self) -> str:
        return "".join(letter + "'" * primes for letter, primes in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def base(self) -> str:
        return "".join(letter for letter, _ in self.letters)

    @classmethod
    def parse(cls, text: str) -> "AlphabeticForm":
        """Read ``"ABB'C"`` style text back into a form."""
        letters = []
        for m in re.finditer(r"([A-Z])('*)|(.)", text.strip()):
            if m.group(3) is not None:
                raise ValueError(f"bad character {m.group(3)!r} in form {text!r}")
            letters.append((m.group(1), len(m.group(2))))
        if not letters:
            raise ValueError("empty form")
        return cls(tuple(letters))


def alphabetic_form(cc: ControlCode) -> AlphabeticForm:
    """Letter each section from its similarity to earlier sections.

    Any identical earlier section wins (reuse the first such section's
    letter); otherwise the first variation gets its letter with one more
    prime; otherwise a fresh letter.
    """
    letters: List[Tuple[str, int]] = [("A", 0)]
    next_letter = "B"
    for row in similarity_levels(cc):
        if SimilarityLevel.IDENTICAL in row:
            letters.append(letters[row.index(SimilarityLevel.IDENTICAL)])
        elif SimilarityLevel.VARIATION in row:
            letter, primes = letters[row.index(SimilarityLevel.VARIATION)]
            letters.append((letter, primes + 1))
        else:
            letters.append((next_letter, 0))
            next_letter = chr(ord(next_letter) + 1) if next_letter != "Z" else "Z"
    return AlphabeticForm(tuple(letters))


class FormTerm(str, enum.Enum):
    OnlyOneSection = "Only One Section"
    Binary = "Binary"
    Ternary = "Ternary"
    Variational = "Variational"
    AmericanPopular = "American Popular"
    VerseChorus = "Verse/Chorus"
    VerseChorusBridge = "Verse/Chorus/Bridge"
    VerseChorusVerseBridge = "Verse/Chorus/Verse/Bridge"
    ThroughComposed = "Through Composed"
    CompoundBinary = "Compound Binary"
    CompoundTernary = "Compound Ternary"

    @property
    def category(self) -> str:
        return _CATEGORY[self]


_CATEGORY = {
    FormTerm.OnlyOneSection: "traditional",
    FormTerm.Binary: "traditional",
    FormTerm.Ternary: "traditional",
    FormTerm.Variational: "traditional",
    FormTerm.AmericanPopular: "extended",
    FormTerm.VerseChorus: "extended",
    FormTerm.VerseChorusBridge: "extended",
    FormTerm.VerseChorusVerseBridge: "extended",
    FormTerm.ThroughComposed: "extended",
    FormTerm.CompoundBinary: "compound",
    FormTerm.CompoundTernary: "compound",
}

TERM_ORDER = list(FormTerm)


def _collapse(seq: Sequence[str]) -> str:
    out: List[str] = []
    for x in seq:
        if not out or out[-1] != x:
            out.append(x)
    return "".join(out)


def _relabel(seq: Sequence[str]) -> str:
    names: dict = {}
    for x in seq:
        names.setdefault(x, chr(ord("A") + len(names)))
    return "".join(names[x] for x in seq)


def terminology_forms(form: AlphabeticForm) -> FrozenSet[FormTerm]:
    """Named forms that fit a lettered form.

    Rules work on base letters (primes dropped):

    - one section, or every section identical: Only One Section
    - repeats collapsed to ``AB``: Binary; to ``ABA``: Ternary
    - one base letter, at least one prime: Variational
    - ``AABA``: American Popular
    - two letters alternating, length >= 4: Verse/Chorus
    - ``ABCB``: Verse/Chorus/Bridge; ``ABABCB``: Verse/Chorus/Verse/Bridge
    - all letters distinct, length >= 3: Through Composed
    - even length >= 4 whose halves are each binary (ternary):
      Compound Binary (Compound Ternary)

    Through Composed is also the fallback when nothing else matches.
    """
    base = form.base
    n = len(base)
    primed = any(p for _, p in form.letters)
    collapsed = _collapse(_relabel(base))
    terms = set()

    if n == 1 or (len(set(base)) == 1 and not primed):
        terms.add(FormTerm.OnlyOneSection)
    if len(set(base)) == 1 and primed:
        terms.add(FormTerm.Variational)
    if collapsed == "AB":
        terms.add(FormTerm.Binary)
    if collapsed == "ABA":
        terms.add(FormTerm.Ternary)
    relabeled = _relabel(base)
    if relabeled == "AABA":
        terms.add(FormTerm.AmericanPopular)
    if n >= 4 and relabeled == ("AB" * n)[:n]:
        terms.add(FormTerm.VerseChorus)
    if relabeled == "ABCB":
        terms.add(FormTerm.VerseChorusBridge)
    if relabeled == "ABABCB":
        terms.add(FormTerm.VerseChorusVerseBridge)
    if n >= 3 and len(set(base)) == n:
        terms.add(FormTerm.ThroughComposed)
    if n >= 4 and n % 2 == 0:
        halves = [_collapse(_relabel(base[: n // 2])), _collapse(_relabel(base[n // 2:]))]
        if all(h == "AB" for h in halves):
            terms.add(FormTerm.CompoundBinary)
        if all(h == "ABA" for h in halves):
            terms.add(FormTerm.CompoundTernary)
    if not terms:
        terms.add(FormTerm.ThroughComposed)
    return frozenset(terms)


def sorted_terms(terms) -> List[FormTerm]:
    return sorted(terms, key=TERM_ORDER.index)


def format_terms(terms) -> str:
    return ", ".join(t.value for t in sorted_terms(terms))


def parse_terms(text: str) -> FrozenSet[FormTerm]:
    """Inverse of :func:`format_terms`; also accepts enum member names."""
    out = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if part in FormTerm.__members__:
            out.add(FormTerm[part])
        else:
            out.add(FormTerm(part))
    return frozenset(out)
