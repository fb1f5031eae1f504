from .form import (
    AlphabeticForm,
    FormTerm,
    SimilarityLevel,
    alphabetic_form,
    classify_similarity,
    format_terms,
    parse_terms,
    similarity_levels,
    terminology_forms,
)
from .motif import EmptyAfterFilter, Motif, extract_motif, extract_motifs_per_section, filter_for_motif
from .signals import extract_chords, strip_chords

__all__ = [
    "AlphabeticForm",
    "EmptyAfterFilter",
    "FormTerm",
    "Motif",
    "SimilarityLevel",
    "alphabetic_form",
    "classify_similarity",
    "extract_chords",
    "extract_motif",
    "extract_motifs_per_section",
    "filter_for_motif",
    "format_terms",
    "parse_terms",
    "similarity_levels",
    "strip_chords",
    "terminology_forms",
]
