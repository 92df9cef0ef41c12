"""Rule-based event extraction over pre-annotated documents."""

from .document import DependencyGraph, Document, Sentence, document_to_dict, make_sentence, parse_document
from .engine import (
    ActionRegistry,
    ExtractionResult,
    ExtractorEngine,
    NonTerminationWarning,
    default_action,
    extract_from,
    priority_admits,
    register_action,
)
from .errors import (
    ActionError,
    DocumentError,
    DocumentParseError,
    DocumentValidationError,
    GrammarError,
    MissingLayerError,
    OdinError,
    PatternSyntaxError,
    PrioritySyntaxError,
    TaxonomyError,
    UnknownLabelError,
    UnresolvedVariableError,
)
from .grammar import Grammar, Rule, load_grammar, load_grammar_file, parse_priority
from .mentions import (
    EventMention,
    Interval,
    Mention,
    RelationMention,
    TextBoundMention,
    mention_from_json,
    mention_to_json,
    mentions_equal,
)
from .state import State
from .taxonomy import Taxonomy, label_matches

__all__ = [
    "ActionError", "ActionRegistry", "DependencyGraph", "Document", "DocumentError", "DocumentParseError",
    "DocumentValidationError", "EventMention", "ExtractionResult", "ExtractorEngine", "Grammar", "GrammarError",
    "Interval", "Mention", "MissingLayerError", "NonTerminationWarning", "OdinError", "PatternSyntaxError",
    "PrioritySyntaxError", "RelationMention", "Rule", "Sentence", "State", "Taxonomy", "TaxonomyError",
    "TextBoundMention", "UnknownLabelError", "UnresolvedVariableError", "default_action", "document_to_dict",
    "extract_from", "label_matches", "load_grammar", "load_grammar_file", "make_sentence", "mention_from_json",
    "mention_to_json", "mentions_equal", "parse_document", "parse_priority", "priority_admits", "register_action",
]
