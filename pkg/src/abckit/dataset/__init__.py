from .generate import (
    CorpusSchemaError,
    GenerationSummary,
    InstructionSample,
    SignalUnavailable,
    build_sample,
    generate_corpus,
    read_corpus,
)
from .templates import TASK_ALIASES, TaskKind, TemplateBank, TemplateError, load_template_bank, parse_template_bank

__all__ = [
    "CorpusSchemaError",
    "GenerationSummary",
    "InstructionSample",
    "SignalUnavailable",
    "TASK_ALIASES",
    "TaskKind",
    "TemplateBank",
    "TemplateError",
    "build_sample",
    "generate_corpus",
    "load_template_bank",
    "parse_template_bank",
    "read_corpus",
]
