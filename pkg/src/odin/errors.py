"""Exception hierarchy shared by every part of the extractor."""

from __future__ import annotations


class OdinError(Exception):
    """Base class for all errors raised by this package."""


class DocumentError(OdinError):
    pass


class DocumentParseError(DocumentError):
    """The document payload is not well-formed."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class DocumentValidationError(DocumentError):
    """A structurally valid payload violates a document invariant."""

    def __init__(self, message: str, layer: str | None = None, sentence: int | None = None):
        self.layer = layer
        self.sentence = sentence
        super().__init__(message)


class MissingLayerError(OdinError):
    """An operation needs an annotation layer the sentence does not carry."""


class GrammarError(OdinError):
    """Any problem found while loading or validating a grammar."""

    def __init__(self, message: str, rule: str | None = None, path: str | None = None):
        self.rule = rule
        self.path = path
        prefix = []
        if path:
            prefix.append(path)
        if rule:
            prefix.append(f"rule {rule!r}")
        if prefix:
            message = f"{': '.join(prefix)}: {message}"
        super().__init__(message)


class PatternSyntaxError(GrammarError):
    """A token or dependency pattern could not be parsed."""

    def __init__(self, message: str, source: str = "", position: int = 0, rule: str | None = None,
                 path: str | None = None):
        self.source = source
        self.position = position
        self.line, self.column = _line_col(source, position)
        self.bare_message = message
        super().__init__(f"{message} at line {self.line}, column {self.column}", rule=rule, path=path)

    def for_rule(self, rule: str, path: str | None = None) -> "PatternSyntaxError":
        return PatternSyntaxError(self.bare_message, self.source, self.position, rule=rule, path=path)


class PrioritySyntaxError(GrammarError):
    pass


class UnresolvedVariableError(GrammarError):
    def __init__(self, names: list[str], rule: str | None = None, path: str | None = None):
        self.names = list(names)
        super().__init__("unresolved variable(s): " + ", ".join(self.names), rule=rule, path=path)


class TaxonomyError(GrammarError):
    pass


class UnknownLabelError(TaxonomyError):
    def __init__(self, label: str, rule: str | None = None, path: str | None = None):
        self.label = label
        super().__init__(f"label {label!r} is not declared in the taxonomy", rule=rule, path=path)


class ActionError(OdinError):
    """Action registry problems: unknown, reserved or duplicate names."""


def _line_col(source: str, position: int) -> tuple[int, int]:
    before = source[:position]
    line = before.count("\n") + 1
    column = position - (before.rfind("\n") + 1) + 1
    return line, column
