"""Pre-annotated documents: sentences, annotation layers and dependency graphs.

Documents arrive already tokenized, tagged and parsed. Every layer except
``words`` and the character offsets is optional; a missing layer is stored as
``None`` so that constraints over it can simply fail.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Sequence

from .errors import DocumentParseError, DocumentValidationError, MissingLayerError

OPTIONAL_LAYERS = ("lemmas", "tags", "chunks", "entities")

# token-constraint field name -> sentence attribute
FIELD_LAYERS = {
    "word": "words",
    "lemma": "lemmas",
    "tag": "tags",
    "chunk": "chunks",
    "entity": "entities",
}


@dataclass(frozen=True)
class DependencyGraph:
    edges: frozenset[tuple[int, int, str]]
    roots: frozenset[int] = frozenset()

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int, str]], roots: Iterable[int] = ()) -> "DependencyGraph":
        edge_list = [(int(s), int(d), str(r)) for s, d, r in edges]
        unique = frozenset(edge_list)
        if len(unique) != len(edge_list):
            raise DocumentValidationError("duplicate dependency edge", layer="graph")
        return cls(unique, frozenset(int(r) for r in roots))

    @cached_property
    def _outgoing(self) -> dict[int, tuple[tuple[str, int], ...]]:
        index: dict[int, list[tuple[str, int]]] = defaultdict(list)
        for src, dst, rel in sorted(self.edges):
            index[src].append((rel, dst))
        return {k: tuple(v) for k, v in index.items()}

    @cached_property
    def _incoming(self) -> dict[int, tuple[tuple[str, int], ...]]:
        index: dict[int, list[tuple[str, int]]] = defaultdict(list)
        for src, dst, rel in sorted(self.edges, key=lambda e: (e[1], e[0], e[2])):
            index[dst].append((rel, src))
        return {k: tuple(v) for k, v in index.items()}

    def outgoing(self, token: int) -> tuple[tuple[str, int], ...]:
        return self._outgoing.get(token, ())

    def incoming(self, token: int) -> tuple[tuple[str, int], ...]:
        return self._incoming.get(token, ())


@dataclass(frozen=True)
class Sentence:
    words: tuple[str, ...]
    start_offsets: tuple[int, ...]
    end_offsets: tuple[int, ...]
    lemmas: tuple[str, ...] | None = None
    tags: tuple[str, ...] | None = None
    chunks: tuple[str, ...] | None = None
    entities: tuple[str, ...] | None = None
    graph: DependencyGraph | None = None

    def __post_init__(self) -> None:
        n = len(self.words)
        for name in ("start_offsets", "end_offsets", *OPTIONAL_LAYERS):
            layer = getattr(self, name)
            if layer is not None and len(layer) != n:
                raise DocumentValidationError(
                    f"layer {name!r} has {len(layer)} entries for {n} words", layer=name
                )
        prev_start = prev_end = -1
        for i, (s, e) in enumerate(zip(self.start_offsets, self.end_offsets)):
            if not s < e:
                raise DocumentValidationError(f"token {i}: start offset {s} is not before end offset {e}",
                                              layer="startOffsets")
            if s < prev_start or e < prev_end:
                raise DocumentValidationError(f"token {i}: offsets decrease", layer="startOffsets")
            prev_start, prev_end = s, e
        if self.graph is not None:
            for src, dst, _ in self.graph.edges:
                if not (0 <= src < n and 0 <= dst < n):
                    raise DocumentValidationError(f"edge ({src}, {dst}) is out of range", layer="graph")
            for r in self.graph.roots:
                if not 0 <= r < n:
                    raise DocumentValidationError(f"root {r} is out of range", layer="graph")

    def __len__(self) -> int:
        return len(self.words)

    def layer(self, field_name: str) -> tuple[str, ...] | None:
        """Return the annotation layer used by a token-constraint field."""
        return getattr(self, FIELD_LAYERS[field_name])

    @cached_property
    def _value_index(self) -> dict[str, dict[str, tuple[int, ...]]]:
        index: dict[str, dict[str, tuple[int, ...]]] = {}
        for fname in FIELD_LAYERS:
            values = self.layer(fname)
            if values is None:
                index[fname] = {}
                continue
            positions: dict[str, list[int]] = defaultdict(list)
            for i, v in enumerate(values):
                positions[v].append(i)
            index[fname] = {k: tuple(v) for k, v in positions.items()}
        return index

    def positions_with(self, field_name: str, value: str) -> tuple[int, ...]:
        """Token indices whose ``field_name`` value equals ``value`` exactly."""
        return self._value_index[field_name].get(value, ())

    def outgoing_edges(self, token: int) -> set[tuple[str, int]]:
        return set(self._require_graph(token).outgoing(token))

    def incoming_edges(self, token: int) -> set[tuple[str, int]]:
        return set(self._require_graph(token).incoming(token))

    def _require_graph(self, token: int) -> DependencyGraph:
        if self.graph is None:
            raise MissingLayerError("sentence has no dependency graph")
        if not 0 <= token < len(self.words):
            raise IndexError(f"token {token} out of range")
        return self.graph


def outgoing_edges(sentence: Sentence, token: int) -> set[tuple[str, int]]:
    return sentence.outgoing_edges(token)


def incoming_edges(sentence: Sentence, token: int) -> set[tuple[str, int]]:
    return sentence.incoming_edges(token)


@dataclass(frozen=True)
class Document:
    id: str
    sentences: tuple[Sentence, ...]
    text: str | None = None

    def __post_init__(self) -> None:
        if self.text is None:
            return
        for idx, s in enumerate(self.sentences):
            if s.words and s.end_offsets[-1] > len(self.text):
                raise DocumentValidationError(
                    f"sentence {idx}: offsets exceed the document text", layer="endOffsets", sentence=idx
                )

    def span_text(self, sentence: int, start: int, end: int) -> str:
        s = self.sentences[sentence]
        if self.text is not None:
            return self.text[s.start_offsets[start]:s.end_offsets[end - 1]]
        return " ".join(s.words[start:end])


_SENTENCE_KEYS = {"words", "startOffsets", "endOffsets", "lemmas", "tags", "chunks", "entities", "graph"}


def parse_document(payload: bytes | str) -> Document:
    """Build a :class:`Document` from its JSON representation.

    Raises :class:`DocumentParseError` for malformed JSON or wrong shapes and
    :class:`DocumentValidationError` when a layer breaks a sentence invariant.
    """
    if isinstance(payload, bytes):
        try:
            payload = payload.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentParseError(f"payload is not UTF-8: {exc}") from None
    try:
        data = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise DocumentParseError(exc.msg, exc.lineno, exc.colno) from None
    return document_from_dict(data)


def document_from_dict(data: Any) -> Document:
    if not isinstance(data, dict):
        raise DocumentParseError("document must be a JSON object")
    sentences_data = data.get("sentences")
    if not isinstance(sentences_data, list):
        raise DocumentParseError("document needs a 'sentences' array")
    text = data.get("text")
    if text is not None and not isinstance(text, str):
        raise DocumentParseError("'text' must be a string")
    sentences = []
    for idx, sd in enumerate(sentences_data):
        try:
            sentences.append(_sentence_from_dict(sd, idx))
        except DocumentValidationError as exc:
            if exc.sentence is None:
                raise DocumentValidationError(f"sentence {idx}: {exc}", layer=exc.layer, sentence=idx) from None
            raise
    return Document(id=str(data.get("id", "")), sentences=tuple(sentences), text=text)


def _sentence_from_dict(sd: Any, idx: int) -> Sentence:
    if not isinstance(sd, dict):
        raise DocumentParseError(f"sentence {idx} must be an object")
    unknown = set(sd) - _SENTENCE_KEYS
    if unknown:
        raise DocumentParseError(f"sentence {idx}: unknown key(s) {sorted(unknown)}")
    for key in ("words", "startOffsets", "endOffsets"):
        if key not in sd:
            raise DocumentParseError(f"sentence {idx}: missing required '{key}'")
    words = _str_layer(sd, "words", idx)
    layers = {name: (_str_layer(sd, name, idx) if sd.get(name) is not None else None) for name in OPTIONAL_LAYERS}
    n = len(words)
    for name in ("startOffsets", "endOffsets", *OPTIONAL_LAYERS):
        value = sd.get(name)
        if value is not None and len(value) != n:
            raise DocumentValidationError(
                f"sentence {idx}: layer '{name}' has {len(value)} entries for {n} words",
                layer=name, sentence=idx,
            )
    graph = None
    if sd.get("graph") is not None:
        graph = _graph_from_dict(sd["graph"], idx)
    return Sentence(
        words=words,
        start_offsets=_int_layer(sd, "startOffsets", idx),
        end_offsets=_int_layer(sd, "endOffsets", idx),
        graph=graph,
        **layers,
    )


def _str_layer(sd: dict, key: str, idx: int) -> tuple[str, ...]:
    value = sd[key]
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise DocumentParseError(f"sentence {idx}: '{key}' must be an array of strings")
    return tuple(value)


def _int_layer(sd: dict, key: str, idx: int) -> tuple[int, ...]:
    value = sd[key]
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise DocumentParseError(f"sentence {idx}: '{key}' must be an array of integers")
    return tuple(value)


def _graph_from_dict(gd: Any, idx: int) -> DependencyGraph:
    if not isinstance(gd, dict) or not isinstance(gd.get("edges", []), list):
        raise DocumentParseError(f"sentence {idx}: 'graph' must be an object with an 'edges' array")
    edges = []
    for e in gd.get("edges", []):
        try:
            edges.append((e["source"], e["destination"], e["relation"]))
        except (KeyError, TypeError):
            raise DocumentParseError(f"sentence {idx}: edges need source, destination and relation") from None
        if not (isinstance(e["source"], int) and isinstance(e["destination"], int)
                and isinstance(e["relation"], str)):
            raise DocumentParseError(f"sentence {idx}: malformed edge {e!r}")
    roots = gd.get("roots", [])
    if not isinstance(roots, list) or not all(isinstance(r, int) for r in roots):
        raise DocumentParseError(f"sentence {idx}: 'roots' must be an array of integers")
    try:
        return DependencyGraph.from_edges(edges, roots)
    except DocumentValidationError as exc:
        raise DocumentValidationError(f"sentence {idx}: {exc}", layer="graph", sentence=idx) from None


def document_to_dict(doc: Document) -> dict[str, Any]:
    """Inverse of :func:`document_from_dict`; absent layers are omitted."""
    out: dict[str, Any] = {"id": doc.id}
    if doc.text is not None:
        out["text"] = doc.text
    sentences = []
    for s in doc.sentences:
        sd: dict[str, Any] = {
            "words": list(s.words),
            "startOffsets": list(s.start_offsets),
            "endOffsets": list(s.end_offsets),
        }
        for name in OPTIONAL_LAYERS:
            layer = getattr(s, name)
            if layer is not None:
                sd[name] = list(layer)
        if s.graph is not None:
            sd["graph"] = {
                "edges": [{"source": a, "destination": b, "relation": r} for a, b, r in sorted(s.graph.edges)],
                "roots": sorted(s.graph.roots),
            }
        sentences.append(sd)
    out["sentences"] = sentences
    return out


def make_sentence(
    words: Sequence[str],
    *,
    lemmas: Sequence[str] | None = None,
    tags: Sequence[str] | None = None,
    chunks: Sequence[str] | None = None,
    entities: Sequence[str] | None = None,
    edges: Iterable[tuple[int, int, str]] | None = None,
    roots: Iterable[int] = (),
    offset: int = 0,
) -> Sentence:
    """Convenience constructor: offsets assume single spaces between words."""
    starts, ends = [], []
    pos = offset
    for w in words:
        starts.append(pos)
        ends.append(pos + len(w))
        pos += len(w) + 1
    return Sentence(
        words=tuple(words),
        start_offsets=tuple(starts),
        end_offsets=tuple(ends),
        lemmas=tuple(lemmas) if lemmas is not None else None,
        tags=tuple(tags) if tags is not None else None,
        chunks=tuple(chunks) if chunks is not None else None,
        entities=tuple(entities) if entities is not None else None,
        graph=DependencyGraph.from_edges(edges, roots) if edges is not None else None,
    )
