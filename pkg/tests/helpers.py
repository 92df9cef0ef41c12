from __future__ import annotations

from pathlib import Path

from odin import Document, Grammar, load_grammar_file, make_sentence, parse_document
from odin.document import Sentence

FIXTURES = Path(__file__).parent / "fixtures"


def load_fixture_doc(name: str) -> Document:
    return parse_document((FIXTURES / f"{name}.json").read_bytes())


def load_fixture_grammar(name: str) -> Grammar:
    return load_grammar_file(FIXTURES / f"{name}.yml")


def doc_of(*sentences: Sentence, doc_id: str = "test") -> Document:
    return Document(doc_id, tuple(sentences))


def words(text: str, **layers) -> Sentence:
    """Sentence from space-separated words; layers may be given as strings too."""
    fields = {k: v.split() if isinstance(v, str) else v for k, v in layers.items()}
    return make_sentence(text.split(), **fields)
