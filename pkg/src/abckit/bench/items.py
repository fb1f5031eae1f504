"""Multiple-choice items and bench file loading."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

SUBSETS = ("knowledge", "reasoning")
LANGUAGES = ("en", "zh")
LETTERS = "ABCD"


class SchemaError(ValueError):
    def __init__(self, item_id: Optional[str], field: str, message: str):
        self.item_id = item_id
        self.field = field
        super().__init__(f"item {item_id!r}, field {field!r}: {message}")


@dataclass(frozen=True)
class McqItem:
    id: str
    subset: str
    stem: str
    options: Tuple[str, str, str, str]
    answer_index: int
    language: str = "en"

    def __post_init__(self):
        validate_item(self)

    @property
    def gold(self) -> str:
        return self.options[self.answer_index]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "subset": self.subset,
            "language": self.language,
            "stem": self.stem,
            "options": list(self.options),
            "answer_index": self.answer_index,
        }


def validate_item(item: McqItem) -> None:
    if not isinstance(item.id, str) or not item.id:
        raise SchemaError(item.id, "id", "must be a non-empty string")
    if item.subset not in SUBSETS:
        raise SchemaError(item.id, "subset", f"must be one of {SUBSETS}")
    if item.language not in LANGUAGES:
        raise SchemaError(item.id, "language", f"must be one of {LANGUAGES}")
    if not isinstance(item.stem, str) or not item.stem.strip():
        raise SchemaError(item.id, "stem", "must be a non-empty string")
    opts = item.options
    if not isinstance(opts, tuple) or len(opts) != 4:
        raise SchemaError(item.id, "options", "need exactly 4 options")
    if not all(isinstance(o, str) and o for o in opts):
        raise SchemaError(item.id, "options", "options must be non-empty strings")
    if len(set(opts)) != 4:
        raise SchemaError(item.id, "options", "options must be unique")
    if isinstance(item.answer_index, bool) or not isinstance(item.answer_index, int) or not 0 <= item.answer_index <= 3:
        raise SchemaError(item.id, "answer_index", "must be an integer 0..3")


def item_from_dict(obj) -> McqItem:
    if not isinstance(obj, dict):
        raise SchemaError(None, "<item>", "item must be a JSON object")
    item_id = obj.get("id")
    for key in ("id", "subset", "stem", "options", "answer_index"):
        if key not in obj:
            raise SchemaError(item_id, key, "missing")
    options = obj["options"]
    if not isinstance(options, list):
        raise SchemaError(item_id, "options", "must be a list")
    return McqItem(
        id=item_id,
        subset=obj["subset"],
        stem=obj["stem"],
        options=tuple(options),
        answer_index=obj["answer_index"],
        language=obj.get("language", "en"),
    )


def _read_items(path) -> List[McqItem]:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(None, "<file>", f"invalid JSON: {exc}") from None
    if not isinstance(data, list):
        raise SchemaError(None, "<file>", "bench file must be a JSON array")
    items = [item_from_dict(obj) for obj in data]
    seen = set()
    for item in items:
        if item.id in seen:
            raise SchemaError(item.id, "id", "duplicate id")
        seen.add(item.id)
    return items


def load_bench(path, exemplars_path=None) -> Tuple[List[McqItem], List[McqItem]]:
    """Scored items plus held-out exemplars (empty list when no exemplar file).

    Raises:
        SchemaError: on the first invalid item, or an exemplar that is also scored.
    """
    items = _read_items(path)
    exemplars = _read_items(exemplars_path) if exemplars_path else []
    check_disjoint(items, exemplars)
    return items, exemplars


def check_disjoint(items: Sequence[McqItem], exemplars: Sequence[McqItem]) -> None:
    ids = {i.id for i in items}
    stems = {i.stem for i in items}
    for ex in exemplars:
        if ex.id in ids:
            raise SchemaError(ex.id, "id", "exemplar also appears among scored items")
        if ex.stem in stems:
            raise SchemaError(ex.id, "stem", "exemplar stem duplicates a scored item")
