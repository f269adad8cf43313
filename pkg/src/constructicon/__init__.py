"""Constructicon engine: constructions, matching, segmentation, meaning graphs, probes."""

__version__ = "0.1.0"

from .graphs import MeaningGraph, idiomatic_graph, literal_graph, parse_graph, serialize_graph
from .lexicon import Diagnostic, Lexicon, load_lexicon, parse_lexicon, serialize_lexicon, validate
from .matcher import Token, annotate, detect_lvc, match_construction, resolve_overlaps
from .model import Construction, Roleset, Slot, SlotPattern, classify_schematicity, resolve_mapping
from .morpho import reattach_detached, segment_verb_word, stem_analyze, strip_initial_change
from .probe import build_prompt, parse_response, run, score

__all__ = [
    "Construction",
    "Diagnostic",
    "Lexicon",
    "MeaningGraph",
    "Roleset",
    "Slot",
    "SlotPattern",
    "Token",
    "annotate",
    "build_prompt",
    "classify_schematicity",
    "detect_lvc",
    "idiomatic_graph",
    "literal_graph",
    "load_lexicon",
    "match_construction",
    "parse_graph",
    "parse_lexicon",
    "parse_response",
    "reattach_detached",
    "resolve_mapping",
    "resolve_overlaps",
    "run",
    "score",
    "segment_verb_word",
    "serialize_graph",
    "serialize_lexicon",
    "stem_analyze",
    "strip_initial_change",
    "validate",
]
