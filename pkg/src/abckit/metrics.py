"""Generation metrics: repetition rate, parse rate, percentile scores, memorization."""

from __future__ import annotations

import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .abc.parser import ParseError, parse_fragment, parse_tune
from .abc.tokens import Comment, LineBreak, is_repeat_bar
from .analysis.form import AlphabeticForm, alphabetic_form, parse_terms, terminology_forms
from .analysis.motif import EmptyAfterFilter, extract_motifs_per_section, filter_for_motif
from .analysis.signals import extract_chords
from .control_code import EmptySection, compute_control_code
from .dataset.templates import TaskKind
from .sequence import edit_distance, lcs_length

__all__ = [
    "EmptyPool",
    "GenerationRecord",
    "MemorizationReport",
    "PercentileReport",
    "TaskUnsupported",
    "edit_distance",
    "initial_score",
    "lcs_length",
    "memorization_report",
    "parse_success_rate",
    "percentile_report",
    "repetition_rate",
]

SCORED_TASKS = (
    TaskKind.ChordConditioned,
    TaskKind.FormConditioned,
    TaskKind.AlphaFormMotifConditioned,
    TaskKind.TermFormMotifConditioned,
    TaskKind.MelodyHarmonization,
)
_REQUIRED_SIGNALS = {
    TaskKind.ChordConditioned: ("chords",),
    TaskKind.FormConditioned: (),
    TaskKind.AlphaFormMotifConditioned: ("form_alpha", "motif"),
    TaskKind.TermFormMotifConditioned: ("form_terms", "motif"),
    TaskKind.MelodyHarmonization: ("melody",),
}
OVERLAP_THRESHOLD = Fraction(4, 5)

log = logging.getLogger(__name__)


class TaskUnsupported(ValueError):
    """No percentile metric exists for this task."""


class EmptyPool(ValueError):
    """Too few scores to rank against."""


@dataclass(frozen=True)
class GenerationRecord:
    system: str
    task: TaskKind
    prompt_signals: Mapping
    generated_text: str
    reference_text: Optional[str] = None

    @classmethod
    def from_dict(cls, obj: Mapping) -> "GenerationRecord":
        return cls(
            system=str(obj["system"]),
            task=TaskKind.from_name(obj["task"]),
            prompt_signals=dict(obj.get("prompt_signals") or {}),
            generated_text=obj["generated"],
            reference_text=obj.get("reference"),
        )


def _ratio_similarity(a: Sequence, b: Sequence) -> Fraction:
    longest = max(len(a), len(b))
    if longest == 0:
        return Fraction(1)
    return 1 - Fraction(edit_distance(a, b), longest)


def _chord_list(value) -> List[str]:
    return value.split() if isinstance(value, str) else list(value)


def _melody_tokens(text: str):
    try:
        body = parse_tune(text).body
    except ParseError:
        body = parse_fragment(text)
    return filter_for_motif(body)


def _form_similarity(doc, signals: Mapping) -> Fraction:
    try:
        gen_form = alphabetic_form(compute_control_code(doc))
    except EmptySection:
        return Fraction(0)
    alpha = signals.get("form_alpha")
    if alpha and str(gen_form) == alpha.strip():
        return Fraction(1)
    raw_terms = signals.get("form_terms")
    if raw_terms:
        want = parse_terms(raw_terms) if isinstance(raw_terms, str) else frozenset(parse_terms(",".join(raw_terms)))
    elif alpha:
        want = terminology_forms(AlphabeticForm.parse(alpha))
    else:
        raise ValueError("form-conditioned record needs form_alpha or form_terms")
    got = terminology_forms(gen_form)
    return Fraction(len(got & want), len(got | want))


def _motif_similarity(doc, motif_text: str) -> Fraction:
    want = filter_for_motif(parse_fragment(motif_text))
    if not want:
        raise ValueError("prompt motif has no notes")
    try:
        motifs = extract_motifs_per_section(doc)
    except EmptyAfterFilter:
        return Fraction(0)
    return max(Fraction(lcs_length(m.tokens, want), len(want)) for m in motifs)


def initial_score(rec: GenerationRecord) -> Fraction:
    """Similarity in [0, 1] between a generation and its prompt signals.

    Unparseable generations score 0.

    Raises:
        TaskUnsupported: Bach-style and understanding tasks.
    """
    if rec.task not in SCORED_TASKS:
        raise TaskUnsupported(rec.task.value)
    signals = rec.prompt_signals
    missing = [k for k in _REQUIRED_SIGNALS[rec.task] if not signals.get(k)]
    if missing:
        raise ValueError(f"{rec.task.value} record lacks signals {missing}")
    try:
        doc = parse_tune(rec.generated_text)
    except ParseError:
        return Fraction(0)

    if rec.task is TaskKind.ChordConditioned:
        return _ratio_similarity(extract_chords(doc), _chord_list(signals["chords"]))
    if rec.task is TaskKind.FormConditioned:
        return _form_similarity(doc, signals)
    if rec.task is TaskKind.MelodyHarmonization:
        return _ratio_similarity(filter_for_motif(doc.body), _melody_tokens(signals["melody"]))
    # form + motif composites weigh both halves equally
    return (_form_similarity(doc, signals) + _motif_similarity(doc, signals["motif"])) / 2


def percentile(score, pool: Sequence) -> Fraction:
    """Share of the other pool members scoring strictly lower."""
    if len(pool) < 2:
        raise EmptyPool("need at least two scores to rank")
    return Fraction(sum(1 for s in pool if s < score), len(pool) - 1)


@dataclass
class PercentileReport:
    # (system, task) -> initial scores / percentiles, in record order
    initial_scores: Dict[Tuple[str, TaskKind], List[Fraction]]
    percentiles: Dict[Tuple[str, TaskKind], List[Fraction]]
    average_percentile: Dict[Tuple[str, TaskKind], Fraction]
    pool_sizes: Dict[TaskKind, int]
    unparseable: Dict[Tuple[str, TaskKind], int] = field(default_factory=dict)


def percentile_report(
    records: Iterable[GenerationRecord],
    reference_pool: Optional[Mapping[TaskKind, Sequence]] = None,
) -> PercentileReport:
    """Average percentile of each system's initial scores within its task pool.

    The pool for a task is every system's scores for that task, plus any
    ``reference_pool`` scores declared for it.

    Raises:
        EmptyPool: a task has fewer than two pooled scores.
        TaskUnsupported: a record belongs to an unscored task.
    """
    scores: Dict[Tuple[str, TaskKind], List[Fraction]] = defaultdict(list)
    unparseable: Dict[Tuple[str, TaskKind], int] = defaultdict(int)
    for rec in records:
        s = initial_score(rec)
        scores[(rec.system, rec.task)].append(s)
        try:
            parse_tune(rec.generated_text)
        except ParseError:
            unparseable[(rec.system, rec.task)] += 1
    if not scores:
        raise EmptyPool("no records")

    pools: Dict[TaskKind, List] = defaultdict(list)
    for (_, task), vals in scores.items():
        pools[task].extend(vals)
    for task, extra in (reference_pool or {}).items():
        if task in pools:
            pools[task].extend(extra)

    pct = {key: [percentile(s, pools[key[1]]) for s in vals] for key, vals in scores.items()}
    avg = {key: sum(vals, Fraction(0)) / len(vals) for key, vals in pct.items()}
    return PercentileReport(
        initial_scores=dict(scores),
        percentiles=pct,
        average_percentile=avg,
        pool_sizes={task: len(p) for task, p in pools.items()},
        unparseable=dict(unparseable),
    )


def has_repeat_sign(text: str) -> bool:
    try:
        doc = parse_tune(text)
    except ParseError:
        return False
    return any(is_repeat_bar(t) for t in doc.body)


def repetition_rate(texts: Sequence[str]) -> Fraction:
    """Share of texts whose body has a ``|:``, ``:|`` or ``::``; unparseable texts count as none."""
    if not texts:
        return Fraction(0)
    return Fraction(sum(has_repeat_sign(t) for t in texts), len(texts))


@dataclass
class ParseRate:
    rate: Fraction
    failures: List[Tuple[int, ParseError]]


def parse_success_rate(texts: Sequence[str]) -> ParseRate:
    failures = []
    for i, text in enumerate(texts):
        try:
            parse_tune(text)
        except ParseError as exc:
            failures.append((i, exc))
    rate = Fraction(len(texts) - len(failures), len(texts)) if texts else Fraction(0)
    return ParseRate(rate, failures)


@dataclass(frozen=True)
class MemorizationReport:
    exact_fraction: Fraction
    overlap80_fraction: Fraction
    n: int


def overlap_ratio(generated: Sequence, reference: Sequence) -> Fraction:
    longest = max(len(generated), len(reference))
    if longest == 0:
        return Fraction(1)
    return Fraction(lcs_length(generated, reference), longest)


def memorization_report(pairs: Sequence[Tuple[Sequence, Sequence]]) -> MemorizationReport:
    """Exact-copy share and share with LCS >= 80% of the longer sequence."""
    if not pairs:
        raise ValueError("memorization needs at least one pair")
    exact = sum(1 for g, r in pairs if list(g) == list(r))
    overlap = sum(1 for g, r in pairs if overlap_ratio(g, r) >= OVERLAP_THRESHOLD)
    n = len(pairs)
    return MemorizationReport(Fraction(exact, n), Fraction(overlap, n), n)


def abc_token_strings(text: str) -> List[str]:
    """Body tokens as strings for memorization checks; characters if unparseable."""
    try:
        doc = parse_tune(text)
    except ParseError:
        return list(text)
    return [t.render() for t in doc.body if not isinstance(t, (LineBreak, Comment))]


def _num(x: Optional[Fraction]):
    return None if x is None else float(x)


def build_report(records: Sequence[GenerationRecord], reference_pool=None) -> dict:
    """Nested system -> task -> metrics dict, plus a memorization block."""
    by_key: Dict[Tuple[str, TaskKind], List[GenerationRecord]] = defaultdict(list)
    for rec in records:
        by_key[(rec.system, rec.task)].append(rec)

    averages: Dict[Tuple[str, TaskKind], Fraction] = {}
    for task in SCORED_TASKS:
        task_recs = [r for r in records if r.task is task]
        if not task_recs:
            continue
        try:
            averages.update(percentile_report(task_recs, reference_pool).average_percentile)
        except EmptyPool:
            log.warning("%s: pool too small for percentiles", task.value)

    systems: Dict[str, dict] = {}
    for (system, task), recs in by_key.items():
        texts = [r.generated_text for r in recs]
        avg = averages.get((system, task))
        systems.setdefault(system, {})[task.value] = {
            "n": len(recs),
            "avg_percentile": _num(avg),
            "repetition_rate": _num(repetition_rate(texts)),
            "parse_rate": _num(parse_success_rate(texts).rate),
        }

    memorization = {}
    by_system: Dict[str, list] = defaultdict(list)
    for rec in records:
        if rec.reference_text is not None:
            by_system[rec.system].append((abc_token_strings(rec.generated_text), abc_token_strings(rec.reference_text)))
    for system, pairs in by_system.items():
        rep = memorization_report(pairs)
        memorization[system] = {
            "n": rep.n,
            "exact_fraction": float(rep.exact_fraction),
            "overlap80_fraction": float(rep.overlap80_fraction),
        }
    return {"systems": systems, "memorization": memorization}


def dump_report(report: dict, pretty: bool = False) -> str:
    return json.dumps(report, sort_keys=True, indent=2 if pretty else None, ensure_ascii=False)
