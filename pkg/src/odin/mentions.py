"""Rule output: text-bound, relation and event mentions.

Mentions are immutable. Two mentions are equal when kind, labels, sentence,
token interval, trigger and arguments agree; argument lists are compared as
multisets and ``found_by``/``keep`` are ignored. Equal mentions hash equally,
so they can be deduplicated with ordinary sets and dicts.
"""

from __future__ import annotations

from collections import Counter
from typing import TYPE_CHECKING, Any, Iterable, Mapping, NamedTuple, Sequence

if TYPE_CHECKING:
    from .document import Document

TEXT_BOUND = "TextBound"
RELATION = "Relation"
EVENT = "Event"


class Interval(NamedTuple):
    """Half-open token interval ``[start, end)``."""

    start: int
    end: int

    def __contains__(self, token: object) -> bool:  # type: ignore[override]
        return isinstance(token, int) and self.start <= token < self.end

    @property
    def length(self) -> int:
        return self.end - self.start

    def tokens(self) -> range:
        return range(self.start, self.end)


class Mention:
    kind: str = ""
    __slots__ = ("labels", "sentence", "token_interval", "arguments", "trigger", "found_by", "keep",
                 "document", "_key", "_hash")

    def __init__(
        self,
        labels: Sequence[str],
        sentence: int,
        token_interval: tuple[int, int],
        arguments: Mapping[str, Sequence["Mention"]] | None = None,
        trigger: "TextBoundMention | None" = None,
        found_by: str = "",
        keep: bool = True,
        document: "Document | None" = None,
    ):
        labels = tuple(labels)
        if not labels:
            raise ValueError("a mention needs at least one label")
        start, end = token_interval
        if not 0 <= start <= end:
            raise ValueError(f"bad token interval {token_interval!r}")
        args = {name: tuple(ms) for name, ms in (arguments or {}).items() if ms}
        sa = object.__setattr__
        sa(self, "labels", labels)
        sa(self, "sentence", int(sentence))
        sa(self, "token_interval", Interval(start, end))
        sa(self, "arguments", args)
        sa(self, "trigger", trigger)
        sa(self, "found_by", found_by)
        sa(self, "keep", bool(keep))
        sa(self, "document", document)
        sa(self, "_key", None)
        sa(self, "_hash", None)

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError(f"{type(self).__name__} is immutable")

    @property
    def label(self) -> str:
        return self.labels[0]

    @property
    def start(self) -> int:
        return self.token_interval.start

    @property
    def end(self) -> int:
        return self.token_interval.end

    @property
    def text(self) -> str:
        if self.document is None:
            raise ValueError("mention is not attached to a document")
        return self.document.span_text(self.sentence, self.start, self.end)

    def matches(self, label: str, taxonomy=None) -> bool:
        from .taxonomy import label_matches

        return label_matches(self.labels, label, taxonomy)

    def key(self) -> tuple:
        """Structural identity used for equality and hashing."""
        if self._key is None:
            args = frozenset(
                (name, frozenset(Counter(m.key() for m in ms).items())) for name, ms in self.arguments.items()
            )
            trig = self.trigger.key() if self.trigger is not None else None
            object.__setattr__(self, "_key", (self.kind, self.labels, self.sentence, self.token_interval, trig, args))
        return self._key

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mention):
            return NotImplemented
        return self is other or self.key() == other.key()

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(self.key()))
        return self._hash

    def replace(self, **changes: Any) -> "Mention":
        """Copy with some constructor fields changed (for use in actions)."""
        raise NotImplementedError

    def __repr__(self) -> str:
        s, e = self.token_interval
        parts = [f"{self.labels[0]!r}", f"s={self.sentence}", f"[{s},{e})"]
        if self.trigger is not None:
            parts.append(f"trigger=[{self.trigger.start},{self.trigger.end})")
        if self.arguments:
            parts.append("args={" + ", ".join(f"{k}: {len(v)}" for k, v in self.arguments.items()) + "}")
        if self.found_by:
            parts.append(f"by={self.found_by}")
        return f"{type(self).__name__}({' '.join(parts)})"


class TextBoundMention(Mention):
    kind = TEXT_BOUND
    __slots__ = ()

    def __init__(self, labels, sentence, token_interval, found_by="", keep=True, document=None):
        super().__init__(labels, sentence, token_interval, found_by=found_by, keep=keep, document=document)

    def replace(self, **changes: Any) -> "TextBoundMention":
        fields = dict(labels=self.labels, sentence=self.sentence, token_interval=self.token_interval,
                      found_by=self.found_by, keep=self.keep, document=self.document)
        fields.update(changes)
        return TextBoundMention(**fields)


def _span(mentions: Iterable[Mention]) -> tuple[int, int]:
    ms = list(mentions)
    return min(m.start for m in ms), max(m.end for m in ms)


class RelationMention(Mention):
    kind = RELATION
    __slots__ = ()

    def __init__(self, labels, sentence, arguments, found_by="", keep=True, document=None):
        flat = [m for ms in arguments.values() for m in ms]
        if not flat:
            raise ValueError("a relation mention needs at least one argument")
        super().__init__(labels, sentence, _span(flat), arguments=arguments, found_by=found_by,
                         keep=keep, document=document)

    def replace(self, **changes: Any) -> "RelationMention":
        fields = dict(labels=self.labels, sentence=self.sentence, arguments=self.arguments,
                      found_by=self.found_by, keep=self.keep, document=self.document)
        fields.update(changes)
        return RelationMention(**fields)


class EventMention(Mention):
    kind = EVENT
    __slots__ = ()

    def __init__(self, labels, sentence, trigger, arguments=None, found_by="", keep=True, document=None):
        if not isinstance(trigger, TextBoundMention):
            raise ValueError("an event trigger must be a text-bound mention")
        arguments = arguments or {}
        flat = [trigger, *(m for ms in arguments.values() for m in ms)]
        super().__init__(labels, sentence, _span(flat), arguments=arguments, trigger=trigger,
                         found_by=found_by, keep=keep, document=document)

    def replace(self, **changes: Any) -> "EventMention":
        fields = dict(labels=self.labels, sentence=self.sentence, trigger=self.trigger,
                      arguments=self.arguments, found_by=self.found_by, keep=self.keep,
                      document=self.document)
        fields.update(changes)
        return EventMention(**fields)


def mentions_equal(a: Mention, b: Mention) -> bool:
    return a.key() == b.key()


def mention_to_json(m: Mention, doc: "Document | None" = None) -> dict[str, Any]:
    """Serialize a mention to plain JSON-compatible data.

    Character offsets are ``[startOffsets[first], endOffsets[last]]`` of the
    mention's sentence in ``doc`` (or the document the mention carries).
    """
    doc = doc if doc is not None else m.document
    out: dict[str, Any] = {
        "type": m.kind,
        "tokenInterval": [m.start, m.end],
    }
    if doc is not None:
        sent = doc.sentences[m.sentence]
        out["characterOffsets"] = [sent.start_offsets[m.start], sent.end_offsets[m.end - 1]]
    out["labels"] = list(m.labels)
    out["sentence"] = m.sentence
    out["foundBy"] = m.found_by
    if m.trigger is not None:
        out["trigger"] = mention_to_json(m.trigger, doc)
    if m.kind != TEXT_BOUND:
        out["arguments"] = {name: [mention_to_json(a, doc) for a in ms] for name, ms in m.arguments.items()}
    return out


def mention_from_json(data: Mapping[str, Any], doc: "Document | None" = None) -> Mention:
    """Rebuild a mention from :func:`mention_to_json` output."""
    kind = data["type"]
    labels = data["labels"]
    sentence = data["sentence"]
    found_by = data.get("foundBy", "")
    args = {name: [mention_from_json(a, doc) for a in ms] for name, ms in data.get("arguments", {}).items()}
    if kind == TEXT_BOUND:
        return TextBoundMention(labels, sentence, tuple(data["tokenInterval"]), found_by=found_by, document=doc)
    if kind == RELATION:
        return RelationMention(labels, sentence, args, found_by=found_by, document=doc)
    if kind == EVENT:
        trigger = mention_from_json(data["trigger"], doc)
        return EventMention(labels, sentence, trigger, args, found_by=found_by, document=doc)
    raise ValueError(f"unknown mention type {kind!r}")
