"""ABC parsing, serialization, sections, durations and token statistics."""

from .duration import DurationInfo, ZeroDuration, duration_info
from .parser import ERROR_KINDS, ParseError, parse_fragment, parse_tune, serialize, split_tunebook
from .sections import count_bars, section_documents, split_body, split_sections
from .stats import CorpusStats, EmptyCorpus, corpus_stats
from .tokenizer import TokenizerLoadError, TokenizerSpec, count_tokens, load_tokenizer_spec
from .tokens import TuneDocument, render_tokens

__all__ = [
    "CorpusStats",
    "DurationInfo",
    "ERROR_KINDS",
    "EmptyCorpus",
    "ParseError",
    "TokenizerLoadError",
    "TokenizerSpec",
    "TuneDocument",
    "ZeroDuration",
    "corpus_stats",
    "count_bars",
    "count_tokens",
    "duration_info",
    "load_tokenizer_spec",
    "parse_fragment",
    "parse_tune",
    "render_tokens",
    "section_documents",
    "serialize",
    "split_body",
    "split_sections",
    "split_tunebook",
]
