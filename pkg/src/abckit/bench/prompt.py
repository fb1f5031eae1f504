"""Prompt assembly and answer extraction."""

from __future__ import annotations

import re
from typing import Optional, Sequence

from .items import LETTERS, McqItem

PREAMBLE = (
    "Read the following questions from the four options (A, B, C and D) "
    "given in each question. Choose the best option."
)
MODES = ("zero_shot", "five_shot", "few_shot")

_CHOICE = re.compile(r"(?<![A-Za-z0-9])([ABCD])(?![A-Za-z0-9])")


def check_permutation(perm: Sequence[int]) -> None:
    if sorted(perm) != [0, 1, 2, 3]:
        raise ValueError(f"not a permutation of 4: {perm!r}")


def gold_letter(item: McqItem, perm: Sequence[int]) -> str:
    """Letter under which the gold option appears; ``perm[j]`` is the option shown at letter j."""
    return LETTERS[list(perm).index(item.answer_index)]


def question_block(item: McqItem, perm: Sequence[int] = (0, 1, 2, 3)) -> str:
    check_permutation(perm)
    lines = [item.stem]
    lines += [f"{LETTERS[j]}. {item.options[src]}" for j, src in enumerate(perm)]
    return "\n".join(lines)


def format_prompt(
    item: McqItem,
    perm: Sequence[int],
    mode: str = "zero_shot",
    exemplars: Sequence[McqItem] = (),
    prefix: Optional[str] = None,
) -> str:
    """Preamble, any exemplars with their answers, then the scored item ending in ``Answer:``.

    Exemplars keep their stored option order. ``few_shot`` takes any
    nonzero number of exemplars; ``five_shot`` needs exactly five.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "five_shot" and len(exemplars) != 5:
        raise ValueError(f"five_shot needs 5 exemplars, got {len(exemplars)}")
    if mode == "few_shot" and not exemplars:
        raise ValueError("few_shot needs at least one exemplar")
    shots = [] if mode == "zero_shot" else list(exemplars)

    parts = [prefix] if prefix else []
    parts.append(PREAMBLE)
    for ex in shots:
        parts.append(question_block(ex) + f"\nAnswer: {LETTERS[ex.answer_index]}\n")
    parts.append(question_block(item, perm) + "\nAnswer:")
    return "\n".join(parts)


def extract_choice(response: str) -> Optional[str]:
    """First uppercase A-D standing alone between non-alphanumerics."""
    m = _CHOICE.search(response or "")
    return m.group(1) if m else None
