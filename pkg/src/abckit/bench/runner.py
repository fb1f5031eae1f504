"""Shuffled multiple-choice evaluation with checkpoint and resume."""

from __future__ import annotations

import json
import logging
import random
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .items import McqItem
from .prompt import extract_choice, format_prompt, gold_letter
from .providers import TEMPERATURE, Provider, ProviderError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ShuffleProtocol:
    n_shuffles: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.n_shuffles < 1:
            raise ValueError("n_shuffles must be >= 1")

    def permutations(self, items: Sequence[McqItem]) -> List[List[Tuple[int, ...]]]:
        """``perms[round][i]`` for item i, drawn up front from one seeded stream."""
        rng = random.Random(self.seed)
        return [[tuple(rng.sample(range(4), 4)) for _ in items] for _ in range(self.n_shuffles)]


@dataclass
class SubsetResult:
    accuracy: Fraction
    n: int
    per_shuffle: List[Fraction]


@dataclass
class BenchResult:
    subsets: Dict[str, SubsetResult]
    extraction_failure_count: int
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "subsets": {
                name: {
                    "accuracy": float(r.accuracy),
                    "n": r.n,
                    "per_shuffle": [float(x) for x in r.per_shuffle],
                }
                for name, r in sorted(self.subsets.items())
            },
            "extraction_failure_count": self.extraction_failure_count,
            "metadata": self.metadata,
        }


class _Checkpoint:
    """JSONL of finished (item, round) answers; first line pins the run settings."""

    def __init__(self, path: Optional[Path], header: dict):
        self.path = Path(path) if path else None
        self.header = header
        self.done: Dict[Tuple[str, int], dict] = {}
        self._lock = threading.Lock()
        self._fh = None
        if self.path is None:
            return
        if self.path.exists() and self.path.stat().st_size:
            with open(self.path, encoding="utf-8") as fh:
                lines = [ln for ln in fh if ln.strip()]
            if json.loads(lines[0]) != header:
                raise ValueError(f"checkpoint {self.path} was written with different settings")
            for ln in lines[1:]:
                try:
                    rec = json.loads(ln)
                except json.JSONDecodeError:
                    # torn final line from a kill mid-write
                    log.warning("ignoring unreadable checkpoint line")
                    continue
                self.done[(rec["item"], rec["round"])] = rec
            self._fh = open(self.path, "a", encoding="utf-8")
            with open(self.path, "rb") as raw:
                raw.seek(-1, 2)
                if raw.read(1) != b"\n":
                    self._fh.write("\n")
        else:
            self._fh = open(self.path, "w", encoding="utf-8")
            self._fh.write(json.dumps(header, sort_keys=True) + "\n")
            self._fh.flush()

    def add(self, rec: dict) -> None:
        with self._lock:
            self.done[(rec["item"], rec["round"])] = rec
            if self._fh:
                self._fh.write(json.dumps(rec, sort_keys=True) + "\n")
                self._fh.flush()

    def close(self) -> None:
        if self._fh:
            self._fh.close()


def run_eval(
    items: Sequence[McqItem],
    provider: Provider,
    protocol: ShuffleProtocol,
    mode: str = "zero_shot",
    exemplars: Sequence[McqItem] = (),
    prefix: Optional[str] = None,
    checkpoint: Optional[Path] = None,
    jobs: int = 4,
) -> BenchResult:
    """Score every item once per shuffle round.

    Unextractable answers count as wrong. With ``checkpoint`` set, finished
    answers are appended as they arrive and a rerun skips them, so an
    interrupted run resumes to the same result.

    Raises:
        ProviderError: a request failed after its retries; finished answers
            stay in the checkpoint.
    """
    if not items:
        raise ValueError("no items to evaluate")
    perms = protocol.permutations(items)
    header = {
        "seed": protocol.seed,
        "n_shuffles": protocol.n_shuffles,
        "mode": mode,
        "items": [i.id for i in items],
        "prefix": prefix,
    }
    ckpt = _Checkpoint(checkpoint, header)

    todo = []
    for r in range(protocol.n_shuffles):
        for i, item in enumerate(items):
            if (item.id, r) not in ckpt.done:
                prompt = format_prompt(item, perms[r][i], mode, exemplars, prefix)
                todo.append((r, item, perms[r][i], prompt))

    def ask(r, item, perm, prompt):
        text = provider.complete(prompt)
        choice = extract_choice(text)
        return {
            "item": item.id,
            "round": r,
            "response": text,
            "choice": choice,
            "gold": gold_letter(item, perm),
            "correct": choice == gold_letter(item, perm),
        }

    try:
        with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
            futures = [pool.submit(ask, *job) for job in todo]
            try:
                for fut in as_completed(futures):
                    ckpt.add(fut.result())
            except BaseException:
                for f in futures:
                    f.cancel()
                raise
    except ProviderError:
        log.error("provider failed; %d of %d answers saved", len(ckpt.done), len(items) * protocol.n_shuffles)
        raise
    finally:
        ckpt.close()

    return _aggregate(items, protocol, ckpt.done, mode, getattr(provider, "model_name", ""))


def _aggregate(items, protocol, done, mode, model_name) -> BenchResult:
    by_subset: Dict[str, List[McqItem]] = {}
    for item in items:
        by_subset.setdefault(item.subset, []).append(item)
    failures = sum(1 for rec in done.values() if rec["choice"] is None)
    subsets = {}
    for name, members in by_subset.items():
        per_round = [
            Fraction(sum(done[(m.id, r)]["correct"] for m in members), len(members))
            for r in range(protocol.n_shuffles)
        ]
        subsets[name] = SubsetResult(sum(per_round, Fraction(0)) / len(per_round), len(members), per_round)
    meta = {
        "seed": protocol.seed,
        "n_shuffles": protocol.n_shuffles,
        "mode": mode,
        "model": model_name,
        "temperature": TEMPERATURE,
    }
    return BenchResult(subsets, failures, meta)
