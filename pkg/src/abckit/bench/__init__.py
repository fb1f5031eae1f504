"""Multiple-choice music theory evaluation harness."""

from .items import LETTERS, McqItem, SchemaError, check_disjoint, item_from_dict, load_bench
from .prompt import PREAMBLE, extract_choice, format_prompt, gold_letter, question_block
from .providers import (
    FixedLetterProvider,
    GoldOracleProvider,
    HttpProvider,
    ProviderEndpoint,
    ProviderError,
    RandomProvider,
    load_provider_config,
    provider_from_config,
)
from .runner import BenchResult, ShuffleProtocol, SubsetResult, run_eval

__all__ = [
    "BenchResult",
    "FixedLetterProvider",
    "GoldOracleProvider",
    "HttpProvider",
    "LETTERS",
    "McqItem",
    "PREAMBLE",
    "ProviderEndpoint",
    "ProviderError",
    "RandomProvider",
    "SchemaError",
    "ShuffleProtocol",
    "SubsetResult",
    "check_disjoint",
    "extract_choice",
    "format_prompt",
    "gold_letter",
    "item_from_dict",
    "load_bench",
    "load_provider_config",
    "provider_from_config",
    "question_block",
    "run_eval",
]
