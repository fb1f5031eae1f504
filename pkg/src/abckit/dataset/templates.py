"""Instruction tasks and the template bank that phrases them."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, FrozenSet, Mapping, Tuple

PLACEHOLDERS = ("CHORDS", "MUSICAL_FORM_A", "MUSICAL_FORM_T", "MOTIF", "MELODY", "MUSIC")
_PLACEHOLDER_RE = re.compile(r"\{([A-Z_]+)\}")


class TaskKind(str, enum.Enum):
    ChordConditioned = "ChordConditioned"
    FormConditioned = "FormConditioned"
    AlphaFormMotifConditioned = "AlphaFormMotifConditioned"
    TermFormMotifConditioned = "TermFormMotifConditioned"
    MelodyHarmonization = "MelodyHarmonization"
    BachStyle = "BachStyle"
    MotifExtraction = "MotifExtraction"
    FormExtraction = "FormExtraction"

    @property
    def kind(self) -> str:
        """``G`` for generation tasks, ``U`` for understanding tasks."""
        return "U" if self in (TaskKind.MotifExtraction, TaskKind.FormExtraction) else "G"

    @property
    def is_generation(self) -> bool:
        return self.kind == "G"

    @classmethod
    def from_name(cls, name: str) -> "TaskKind":
        key = name.strip()
        if key in cls.__members__:
            return cls[key]
        if key.lower() in TASK_ALIASES:
            return TASK_ALIASES[key.lower()]
        raise ValueError(f"unknown task {name!r}")


TASK_ALIASES = {
    "chord": TaskKind.ChordConditioned,
    "form": TaskKind.FormConditioned,
    "alpha_motif": TaskKind.AlphaFormMotifConditioned,
    "term_motif": TaskKind.TermFormMotifConditioned,
    "melody": TaskKind.MelodyHarmonization,
    "bach": TaskKind.BachStyle,
    "motif": TaskKind.MotifExtraction,
    "form_extract": TaskKind.FormExtraction,
}

# FormConditioned accepts either form rendering (or both)
_REQUIRED: Dict[TaskKind, Tuple[FrozenSet[str], ...]] = {
    TaskKind.ChordConditioned: (frozenset({"CHORDS"}),),
    TaskKind.FormConditioned: (
        frozenset({"MUSICAL_FORM_A"}),
        frozenset({"MUSICAL_FORM_T"}),
        frozenset({"MUSICAL_FORM_A", "MUSICAL_FORM_T"}),
    ),
    TaskKind.AlphaFormMotifConditioned: (frozenset({"MUSICAL_FORM_A", "MOTIF"}),),
    TaskKind.TermFormMotifConditioned: (frozenset({"MUSICAL_FORM_T", "MOTIF"}),),
    TaskKind.MelodyHarmonization: (frozenset({"MELODY"}),),
    TaskKind.BachStyle: (frozenset(),),
    TaskKind.MotifExtraction: (frozenset({"MUSIC"}),),
    TaskKind.FormExtraction: (frozenset({"MUSIC"}),),
}


class TemplateError(ValueError):
    def __init__(self, task, message: str):
        self.task = task
        super().__init__(f"{getattr(task, 'name', task)}: {message}")


def placeholders_in(template: str) -> FrozenSet[str]:
    return frozenset(_PLACEHOLDER_RE.findall(template))


def fill_template(template: str, values: Mapping[str, str]) -> str:
    return _PLACEHOLDER_RE.sub(lambda m: values[m.group(1)], template)


@dataclass(frozen=True)
class TemplateBank:
    templates: Mapping[TaskKind, Tuple[str, ...]]

    def __post_init__(self):
        for task in TaskKind:
            items = self.templates.get(task)
            if not items:
                raise TemplateError(task, "no templates")
            for tpl in items:
                found = placeholders_in(tpl)
                unknown = found - set(PLACEHOLDERS)
                if unknown:
                    raise TemplateError(task, f"unknown placeholder(s) {sorted(unknown)}")
                if found not in _REQUIRED[task]:
                    wanted = " or ".join(str(sorted(s)) for s in _REQUIRED[task])
                    raise TemplateError(task, f"template {tpl!r} uses {sorted(found)}, expected {wanted}")

    def __getitem__(self, task: TaskKind) -> Tuple[str, ...]:
        return self.templates[task]


def parse_template_bank(text: str) -> TemplateBank:
    bank: Dict[TaskKind, list] = {}
    current = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip()
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        m = re.fullmatch(r"\[(\w+)\]", line.strip())
        if m:
            try:
                current = TaskKind.from_name(m.group(1))
            except ValueError:
                raise TemplateError(m.group(1), f"line {n}: unknown task section") from None
            bank.setdefault(current, [])
            continue
        if current is None:
            raise TemplateError("?", f"line {n}: template before any [Task] header")
        bank[current].append(line.replace("\\n", "\n"))
    return TemplateBank({task: tuple(items) for task, items in bank.items()})


def load_template_bank(path=None) -> TemplateBank:
    """Load a bank from ``path``, or the packaged default bank."""
    if path is None:
        text = resources.files("abckit.dataset").joinpath("default_templates.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_template_bank(text)
