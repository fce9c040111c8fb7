"""Toolchain for computation-ready historical vocabularies.

Converts TEI-encoded printed vocabulary entries into a SKOS concept graph,
assigns ARK persistent identifiers, resolves them over HTTP, and suggests
vocabulary terms for documents via RAKE keyphrase extraction.
"""

from .ark import (
    ALPHABET,
    ArkId,
    Inflection,
    InvalidArk,
    MinterExhausted,
    MinterState,
    check_char,
    mint,
    normalize,
    parse_ark,
    render,
    validate,
)
from .indexer import (
    EmptyResults,
    IndexResult,
    InvalidEncoding,
    RakeParams,
    ScoredPhrase,
    WordStats,
    default_stoplist,
    extract_text,
    load_stoplist,
    match_vocabulary,
    rake_extract,
    tag_cloud,
)
from .model import (
    AmbiguousLabel,
    Concept,
    ConceptScheme,
    Diagnostic,
    DiagnosticCode,
    InvalidScheme,
    LabelKind,
    MalformedXml,
    SchemeBuilder,
    Severity,
    SourceRef,
    UnknownConcept,
    check_scheme,
    find_by_label,
    get_concept,
    normalize_label,
    traverse,
)
from .server import ResolverServer, ServiceConfig, build_server, load_config
from .skos import parse_skos, serialize_skos
from .tei import CrossRef, HierarchyMode, RefKind, VocabEntry, compile_scheme, parse_tei

__version__ = "0.1.0"
