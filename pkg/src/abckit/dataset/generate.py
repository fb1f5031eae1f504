"""Turn a (control code, ABC) corpus into chat-format instruction samples."""

from __future__ import annotations

import json
import logging
import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..abc.parser import ParseError, parse_tune, serialize
from ..analysis.form import alphabetic_form, format_terms, terminology_forms
from ..analysis.motif import EmptyAfterFilter, extract_motifs_per_section
from ..analysis.signals import extract_chords, strip_chords
from ..control_code import ControlCode, EmptySection, MalformedControlCode, compute_control_code, parse_control_code
from .templates import TaskKind, TemplateBank, fill_template, placeholders_in

log = logging.getLogger(__name__)

NO_CHORDS = "no_chords"
NOT_BACH = "not_bach"
EMPTY_MOTIF = "empty_motif"
UNPARSEABLE = "parse_error"
BAD_CONTROL_CODE = "bad_control_code"
EMPTY_SECTION = "empty_section"


class SignalUnavailable(Exception):
    def __init__(self, task: TaskKind, reason: str, detail: str = ""):
        self.task = task
        self.reason = reason
        super().__init__(f"{task.value}: {reason}" + (f" ({detail})" if detail else ""))


class CorpusSchemaError(ValueError):
    """Input lines that do not match the corpus record schema."""

    def __init__(self, problems: Sequence[Tuple[int, str]]):
        self.problems = list(problems)
        super().__init__("; ".join(f"line {n}: {msg}" for n, msg in self.problems))


@dataclass(frozen=True)
class InstructionSample:
    task: TaskKind
    messages: Tuple[Tuple[str, str], ...]  # (role, content)
    source_id: str
    template_id: str

    def to_dict(self) -> dict:
        return {
            "task": self.task.value,
            "source_id": self.source_id,
            "template_id": self.template_id,
            "messages": [{"role": role, "content": content} for role, content in self.messages],
        }

    @property
    def user(self) -> str:
        return self.messages[0][1]

    @property
    def assistant(self) -> str:
        return self.messages[1][1]


def _control_code(entry: Mapping, doc, task: TaskKind) -> ControlCode:
    raw = entry.get("control_code")
    try:
        return parse_control_code(raw) if raw else compute_control_code(doc)
    except MalformedControlCode as exc:
        raise SignalUnavailable(task, BAD_CONTROL_CODE, str(exc)) from None
    except EmptySection as exc:
        raise SignalUnavailable(task, EMPTY_SECTION, str(exc)) from None


def _motif_texts(doc, task: TaskKind) -> List[str]:
    try:
        return [str(m) for m in extract_motifs_per_section(doc)]
    except EmptyAfterFilter as exc:
        raise SignalUnavailable(task, EMPTY_MOTIF, str(exc)) from None


def build_sample(entry: Mapping, task: TaskKind, bank: TemplateBank, rng_seed) -> InstructionSample:
    """One chat sample for ``task`` from a corpus record.

    The template is drawn uniformly with ``random.Random(rng_seed)``. Only
    the signals the chosen template mentions are computed.

    Raises:
        SignalUnavailable: the record cannot support this task.
    """
    abc = entry["abc"].replace("\r\n", "\n")
    source_id = str(entry.get("id", ""))
    try:
        doc = parse_tune(abc)
    except ParseError as exc:
        raise SignalUnavailable(task, UNPARSEABLE, str(exc)) from None

    if task is TaskKind.BachStyle and (entry.get("style") or "").lower() != "bach":
        raise SignalUnavailable(task, NOT_BACH)

    templates = bank[task]
    idx = random.Random(rng_seed).randrange(len(templates))
    template = templates[idx]
    needed = placeholders_in(template)

    values: Dict[str, str] = {}
    if "CHORDS" in needed:
        chords = extract_chords(doc)
        if not chords:
            raise SignalUnavailable(task, NO_CHORDS)
        values["CHORDS"] = " ".join(chords)
    if needed & {"MUSICAL_FORM_A", "MUSICAL_FORM_T"} or task is TaskKind.FormExtraction:
        form = alphabetic_form(_control_code(entry, doc, task))
        values["MUSICAL_FORM_A"] = str(form)
        values["MUSICAL_FORM_T"] = format_terms(terminology_forms(form))
    if "MOTIF" in needed or task is TaskKind.MotifExtraction:
        motifs = _motif_texts(doc, task)
        values["MOTIF"] = motifs[0]
    if "MELODY" in needed:
        values["MELODY"] = serialize(strip_chords(doc))
    if "MUSIC" in needed:
        values["MUSIC"] = abc

    if task is TaskKind.MotifExtraction:
        answer = "\n".join(f"Section {i}: {m}" for i, m in enumerate(motifs, 1))
    elif task is TaskKind.FormExtraction:
        answer = values["MUSICAL_FORM_T"]
    else:
        answer = abc

    return InstructionSample(
        task=task,
        messages=(("user", fill_template(template, values)), ("assistant", answer)),
        source_id=source_id,
        template_id=f"{task.value}/{idx}",
    )


def _validate_record(obj) -> Optional[str]:
    if not isinstance(obj, dict):
        return "record is not a JSON object"
    if not isinstance(obj.get("abc"), str):
        return "'abc' must be a string"
    if "control_code" not in obj:
        return "missing 'control_code' (use null to compute it)"
    if obj["control_code"] is not None and not isinstance(obj["control_code"], str):
        return "'control_code' must be a string or null"
    if not isinstance(obj.get("id"), str):
        return "'id' must be a string"
    if obj.get("style") is not None and not isinstance(obj["style"], str):
        return "'style' must be a string or null"
    return None


def read_corpus(path) -> List[dict]:
    """Load and validate corpus JSONL.

    Raises:
        CorpusSchemaError: every bad line, with its line number.
    """
    records = []
    problems = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                problems.append((n, f"invalid JSON: {exc.msg}"))
                continue
            err = _validate_record(obj)
            if err:
                problems.append((n, err))
            else:
                records.append(obj)
    if problems:
        raise CorpusSchemaError(problems)
    return records


@dataclass
class GenerationSummary:
    written: int
    skipped: Dict[str, int]
    attempted: int

    def to_dict(self) -> dict:
        return {"attempted": self.attempted, "written": self.written, "skipped": dict(sorted(self.skipped.items()))}


def _samples_for(record: dict, line_idx: int, tasks: Sequence[TaskKind], bank: TemplateBank, seed: int):
    out = []
    for task in tasks:
        try:
            out.append(build_sample(record, task, bank, f"{seed}:{line_idx}:{task.value}"))
        except SignalUnavailable as exc:
            out.append(exc)
    return out


def generate_corpus(
    input_path,
    tasks: Iterable[TaskKind],
    bank: TemplateBank,
    seed: int,
    output_path,
    jobs: int = 1,
) -> GenerationSummary:
    """Write one JSONL sample per (record, task) whose signals are available.

    Output order is record order, then task order, so equal inputs and seed
    give byte-identical files regardless of ``jobs``.
    """
    records = read_corpus(input_path)
    task_list = [t for t in TaskKind if t in set(tasks)]
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(lambda ir: _samples_for(ir[1], ir[0], task_list, bank, seed), enumerate(records)))

    skipped: Counter = Counter()
    written = 0
    with open(output_path, "w", encoding="utf-8", newline="\n") as out:
        for record, per_task in zip(records, results):
            for item in per_task:
                if isinstance(item, SignalUnavailable):
                    skipped[item.reason] += 1
                    log.debug("skip %s %s: %s", record["id"], item.task.value, item)
                    continue
                out.write(json.dumps(item.to_dict(), ensure_ascii=False) + "\n")
                written += 1
    return GenerationSummary(written, dict(skipped), len(records) * len(task_list))
