"""String matchers, token constraints and the lexer shared by both pattern languages."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

from .errors import PatternSyntaxError

if TYPE_CHECKING:
    from .document import Sentence
    from .state import State

TOKEN_FIELDS = ("word", "lemma", "tag", "chunk", "entity", "incoming", "outgoing", "mention")
LAYER_FIELDS = {"word": "words", "lemma": "lemmas", "tag": "tags", "chunk": "chunks", "entity": "entities"}

_IDENT_RE = re.compile(r"[^\W\d]\w*")
_ESCAPES = {"n": "\n", "t": "\t", "r": "\r"}


# --- string matchers -------------------------------------------------------

@dataclass(frozen=True)
class ExactMatcher:
    value: str

    def matches(self, s: str) -> bool:
        return s == self.value

    def __str__(self) -> str:
        return self.value if _IDENT_RE.fullmatch(self.value) else '"' + self.value.replace('"', '\\"') + '"'


@dataclass(frozen=True)
class RegexMatcher:
    pattern: str
    _compiled: re.Pattern = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_compiled", re.compile(self.pattern))

    def matches(self, s: str) -> bool:
        return self._compiled.search(s) is not None

    def __str__(self) -> str:
        return "/" + self.pattern.replace("/", "\\/") + "/"


StringMatcher = ExactMatcher | RegexMatcher


# --- token constraints -----------------------------------------------------

@dataclass
class MatchContext:
    """What a constraint can see while matching one sentence."""

    sentence: "Sentence"
    sentence_index: int = 0
    state: "State | None" = None


class TokenConstraint:
    def compile(self) -> Callable[[MatchContext, int], bool]:
        raise NotImplementedError

    def matches(self, ctx: MatchContext, i: int) -> bool:
        return self.compile()(ctx, i)

    def uses_state(self) -> bool:
        return False


@dataclass(frozen=True)
class TrueConstraint(TokenConstraint):
    def compile(self):
        return lambda ctx, i: True

    def __str__(self) -> str:
        return "[]"


@dataclass(frozen=True)
class FieldConstraint(TokenConstraint):
    field: str
    matcher: ExactMatcher | RegexMatcher

    def compile(self):
        m = self.matcher.matches
        name = self.field
        if name in LAYER_FIELDS:
            attr = LAYER_FIELDS[name]

            def test_layer(ctx: MatchContext, i: int) -> bool:
                values = getattr(ctx.sentence, attr)
                return values is not None and m(values[i])
            return test_layer
        if name == "incoming":
            def test_incoming(ctx: MatchContext, i: int) -> bool:
                g = ctx.sentence.graph
                return g is not None and any(m(rel) for rel, _ in g.incoming(i))
            return test_incoming
        if name == "outgoing":
            def test_outgoing(ctx: MatchContext, i: int) -> bool:
                g = ctx.sentence.graph
                return g is not None and any(m(rel) for rel, _ in g.outgoing(i))
            return test_outgoing

        def test_mention(ctx: MatchContext, i: int) -> bool:
            st = ctx.state
            if st is None:
                return False
            return any(m(label) for mention in st.mentions_at(ctx.sentence_index, i)
                       for label in st.labels_of(mention))
        return test_mention

    def uses_state(self) -> bool:
        return self.field == "mention"

    def __str__(self) -> str:
        return f"{self.field}={self.matcher}"


@dataclass(frozen=True)
class NotConstraint(TokenConstraint):
    operand: TokenConstraint

    def compile(self):
        f = self.operand.compile()
        return lambda ctx, i: not f(ctx, i)

    def uses_state(self) -> bool:
        return self.operand.uses_state()

    def __str__(self) -> str:
        return f"!{_wrap(self.operand)}"


@dataclass(frozen=True)
class AndConstraint(TokenConstraint):
    operands: tuple[TokenConstraint, ...]

    def compile(self):
        fs = [c.compile() for c in self.operands]
        return lambda ctx, i: all(f(ctx, i) for f in fs)

    def uses_state(self) -> bool:
        return any(c.uses_state() for c in self.operands)

    def __str__(self) -> str:
        return " & ".join(_wrap(c) for c in self.operands)


@dataclass(frozen=True)
class OrConstraint(TokenConstraint):
    operands: tuple[TokenConstraint, ...]

    def compile(self):
        fs = [c.compile() for c in self.operands]
        return lambda ctx, i: any(f(ctx, i) for f in fs)

    def uses_state(self) -> bool:
        return any(c.uses_state() for c in self.operands)

    def __str__(self) -> str:
        return " | ".join(_wrap(c) for c in self.operands)


def _wrap(c: TokenConstraint) -> str:
    return f"({c})" if isinstance(c, (AndConstraint, OrConstraint)) else str(c)


def eval_constraint(c: TokenConstraint, sentence: "Sentence", i: int, state: "State | None" = None,
                    sentence_index: int = 0) -> bool:
    if not 0 <= i < len(sentence.words):
        raise IndexError(f"token {i} out of range")
    return c.compile()(MatchContext(sentence, sentence_index, state), i)


def anchor_positions(c: TokenConstraint, sentence: "Sentence") -> frozenset[int] | None:
    """Superset of the tokens ``c`` can match, or None when no cheap bound exists.

    Uses exact-value atoms over annotation layers, looked up in the sentence's
    value index.
    """
    if isinstance(c, FieldConstraint):
        if c.field in LAYER_FIELDS and isinstance(c.matcher, ExactMatcher):
            return frozenset(sentence.positions_with(c.field, c.matcher.value))
        return None
    if isinstance(c, AndConstraint):
        bounds = [b for b in (anchor_positions(o, sentence) for o in c.operands) if b is not None]
        if not bounds:
            return None
        return frozenset.intersection(*bounds)
    if isinstance(c, OrConstraint):
        out: set[int] = set()
        for o in c.operands:
            b = anchor_positions(o, sentence)
            if b is None:
                return None
            out |= b
        return frozenset(out)
    return None


# --- lexing ----------------------------------------------------------------

class Scanner:
    """Character scanner that skips whitespace and ``#`` comments between tokens."""

    def __init__(self, src: str, offset: int = 0, full_source: str | None = None):
        self.src = src
        self.pos = 0
        self.offset = offset
        self.full_source = full_source if full_source is not None else src

    def error(self, message: str, pos: int | None = None) -> PatternSyntaxError:
        p = self.pos if pos is None else pos
        return PatternSyntaxError(message, self.full_source, self.offset + p)

    def skip(self) -> None:
        src, n = self.src, len(self.src)
        while self.pos < n:
            ch = src[self.pos]
            if ch.isspace():
                self.pos += 1
            elif ch == "#":
                nl = src.find("\n", self.pos)
                self.pos = n if nl < 0 else nl + 1
            else:
                break

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.src)

    def peek(self, s: str) -> bool:
        self.skip()
        return self.src.startswith(s, self.pos)

    def peek_char(self) -> str:
        self.skip()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def accept(self, s: str) -> bool:
        if self.peek(s):
            self.pos += len(s)
            return True
        return False

    def expect(self, s: str, what: str | None = None) -> None:
        if not self.accept(s):
            found = self.peek_char() or "end of pattern"
            raise self.error(f"expected {what or repr(s)}, found {found!r}")

    def read_identifier(self) -> str | None:
        self.skip()
        m = _IDENT_RE.match(self.src, self.pos)
        if m is None:
            return None
        self.pos = m.end()
        return m.group()

    def read_int(self) -> int | None:
        self.skip()
        m = re.compile(r"\d+").match(self.src, self.pos)
        if m is None:
            return None
        self.pos = m.end()
        return int(m.group())

    def starts_string_matcher(self) -> bool:
        ch = self.peek_char()
        return ch in ("'", '"', "/") or bool(ch) and bool(_IDENT_RE.match(ch))

    def read_string_matcher(self) -> ExactMatcher | RegexMatcher:
        self.skip()
        start = self.pos
        ch = self.peek_char()
        if ch in ("'", '"'):
            return ExactMatcher(self.read_quoted())
        if ch == "/":
            pattern = self.read_regex()
            try:
                return RegexMatcher(pattern)
            except re.error as exc:
                raise self.error(f"invalid regular expression: {exc}", start) from None
        ident = self.read_identifier()
        if ident is None:
            raise self.error("expected a string, identifier or /regex/")
        return ExactMatcher(ident)

    def read_quoted(self) -> str:
        src = self.src
        quote = src[self.pos]
        start = self.pos
        self.pos += 1
        out = []
        while self.pos < len(src):
            ch = src[self.pos]
            if ch == "\\" and self.pos + 1 < len(src):
                nxt = src[self.pos + 1]
                out.append(_ESCAPES.get(nxt, nxt))
                self.pos += 2
            elif ch == quote:
                self.pos += 1
                return "".join(out)
            else:
                out.append(ch)
                self.pos += 1
        raise self.error("unterminated string literal", start)

    def read_regex(self) -> str:
        src = self.src
        start = self.pos
        self.pos += 1
        out = []
        while self.pos < len(src):
            ch = src[self.pos]
            if ch == "\\" and self.pos + 1 < len(src):
                if src[self.pos + 1] == "/":
                    out.append("/")
                else:
                    out.append(src[self.pos:self.pos + 2])
                self.pos += 2
            elif ch == "/":
                self.pos += 1
                return "".join(out)
            else:
                out.append(ch)
                self.pos += 1
        raise self.error("unterminated regular expression", start)


def parse_constraint_body(sc: Scanner) -> TokenConstraint:
    """Parse a token constraint; the opening ``[`` has been consumed."""
    if sc.accept("]"):
        return TrueConstraint()
    expr = _parse_or(sc)
    sc.expect("]", "']' closing the token constraint")
    return expr


def parse_constraint(src: str) -> TokenConstraint:
    """Parse a bracketed constraint such as ``[lemma=inhibit & tag=/^V/]``."""
    sc = Scanner(src)
    sc.expect("[")
    c = parse_constraint_body(sc)
    if not sc.at_end():
        raise sc.error("unexpected text after token constraint")
    return c


def _parse_or(sc: Scanner) -> TokenConstraint:
    items = [_parse_and(sc)]
    while sc.accept("|"):
        items.append(_parse_and(sc))
    return items[0] if len(items) == 1 else OrConstraint(tuple(items))


def _parse_and(sc: Scanner) -> TokenConstraint:
    items = [_parse_not(sc)]
    while sc.accept("&"):
        items.append(_parse_not(sc))
    return items[0] if len(items) == 1 else AndConstraint(tuple(items))


def _parse_not(sc: Scanner) -> TokenConstraint:
    if sc.accept("!"):
        return NotConstraint(_parse_not(sc))
    if sc.accept("("):
        inner = _parse_or(sc)
        sc.expect(")")
        return inner
    sc.skip()
    start = sc.pos
    name = sc.read_identifier()
    if name is None:
        raise sc.error("expected a token field name")
    if name not in TOKEN_FIELDS:
        raise sc.error(f"unknown token field {name!r}", start)
    sc.expect("=", "'=' after field name")
    return FieldConstraint(name, sc.read_string_matcher())
