"""Dependency patterns: a trigger (or anchor argument) plus argument paths.

Each argument line ``name:Label<quantifier> = path`` describes a walk over the
sentence's dependency graph starting from the trigger tokens (or from the
anchor mention). Paths are regular expressions over hops and node filters and
are evaluated on token sets, which keeps unbounded repetition finite on cyclic
graphs.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Callable, Iterable

from .errors import PatternSyntaxError
from .matchers import ExactMatcher, MatchContext, RegexMatcher, Scanner, TokenConstraint, parse_constraint_body
from .mentions import EventMention, Mention, RelationMention, TextBoundMention
from .state import State, state_lookup
from .taxonomy import Taxonomy, label_matches
from .token_pattern import (
    Alternation,
    Concat,
    Group,
    Node,
    Quantified,
    TokenPattern,
    _TokenParser,
    parse_range,
    referenced_labels,
)

if TYPE_CHECKING:
    from .document import Document, Sentence

OUTGOING, INCOMING = "outgoing", "incoming"


# --- path AST --------------------------------------------------------------

@dataclass(frozen=True)
class Hop(Node):
    direction: str
    matcher: ExactMatcher | RegexMatcher


@dataclass(frozen=True)
class WildcardHop(Node):
    direction: str


@dataclass(frozen=True)
class NodeFilter(Node):
    constraint: TokenConstraint


@dataclass(frozen=True)
class Lookaround(Node):
    positive: bool
    sub: Node


@dataclass(frozen=True)
class ArgQuantifier:
    kind: str  # one | optional | one_or_more | zero_or_more | exactly
    k: int = 1

    def __str__(self) -> str:
        return {"one": "", "optional": "?", "one_or_more": "+", "zero_or_more": "*"}.get(self.kind, f"{{{self.k}}}")


ONE = ArgQuantifier("one")
OPTIONAL = ArgQuantifier("optional")
ONE_OR_MORE = ArgQuantifier("one_or_more")
ZERO_OR_MORE = ArgQuantifier("zero_or_more")


def exactly(k: int) -> ArgQuantifier:
    if k < 1:
        raise ValueError("exact argument count must be at least 1")
    return ArgQuantifier("exactly", k)


@dataclass(frozen=True)
class ArgPattern:
    name: str
    label: str
    quantifier: ArgQuantifier
    path: Node | None

    @property
    def required(self) -> bool:
        return self.quantifier.kind in ("one", "one_or_more", "exactly")


# --- parsing ---------------------------------------------------------------

_TRIGGER_RE = re.compile(r"[ \t]*trigger[ \t]*=")
_ARG_RE = re.compile(
    r"""[ \t]*(?P<name>[^\W\d]\w*)[ \t]*:[ \t]*
        (?P<label>[^\W\d]\w*|"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')[ \t]*
        (?P<quant>\?|\*|\+|\{[ \t]*\d+[ \t]*\})?[ \t]*
        (?P<eq>=)?""",
    re.VERBOSE,
)


def _blank_comments(src: str) -> str:
    """Replace ``#`` comments with spaces, leaving quoted strings and regexes alone."""
    out = list(src)
    i, n = 0, len(src)
    while i < n:
        ch = src[i]
        if ch in ("'", '"', "/"):
            j = i + 1
            while j < n and src[j] != ch and src[j] != "\n":
                j += 2 if src[j] == "\\" else 1
            i = j + 1
        elif ch == "#":
            while i < n and src[i] != "\n":
                out[i] = " "
                i += 1
        else:
            i += 1
    return "".join(out)


@dataclass
class _Field:
    kind: str  # trigger | arg
    start: int  # offset of the line in the source
    body_start: int
    body_end: int
    match: re.Match | None = None


def parse_dep_pattern(src: str, unit: str = "word") -> "DependencyPattern":
    """Parse dependency-pattern source.

    Lines that do not start a new field continue the previous one. Omitted
    ``>`` defaults hops to outgoing.
    """
    clean = _blank_comments(src)
    fields: list[_Field] = []
    offset = 0
    for line in clean.split("\n"):
        line_start = offset
        offset += len(line) + 1
        if not line.strip():
            continue
        m = _TRIGGER_RE.match(line)
        if m:
            fields.append(_Field("trigger", line_start, line_start + m.end(), line_start + len(line)))
            continue
        m = _ARG_RE.match(line)
        if m:
            fields.append(_Field("arg", line_start, line_start + m.end(), line_start + len(line), m))
            continue
        if not fields:
            raise PatternSyntaxError("expected 'trigger = ...' or 'name:Label = path'", src,
                                     line_start + len(line) - len(line.lstrip()))
        fields[-1].body_end = line_start + len(line)
    if not fields:
        raise PatternSyntaxError("empty dependency pattern", src, 0)

    trigger: TokenPattern | None = None
    anchor: ArgPattern | None = None
    args: list[ArgPattern] = []
    names: set[str] = set()
    for i, f in enumerate(fields):
        body = clean[f.body_start:f.body_end]
        if f.kind == "trigger":
            if trigger is not None:
                raise PatternSyntaxError("duplicate trigger", src, f.start)
            if i != 0:
                raise PatternSyntaxError("the trigger must be the first field", src, f.start)
            sc = Scanner(body, f.body_start, src)
            ast = _TokenParser(sc, unit).parse()
            trigger = TokenPattern(body, unit, ast=ast)
            continue
        m = f.match
        name = m.group("name")
        if name in names:
            raise PatternSyntaxError(f"duplicate argument name {name!r}", src, f.start + m.start("name"))
        names.add(name)
        label = m.group("label")
        if label[0] in "'\"":
            label = Scanner(label).read_quoted()
        try:
            quant = _arg_quantifier(m.group("quant"))
        except ValueError as exc:
            raise PatternSyntaxError(str(exc), src, f.start + m.start("quant")) from None
        if not body.strip():
            if i == 0 and trigger is None:
                anchor = ArgPattern(name, label, ONE, None)
                continue
            raise PatternSyntaxError(f"argument {name!r} needs a path", src, f.start)
        if i == 0:
            raise PatternSyntaxError("a pattern without trigger must start with an anchor 'name:Label'",
                                     src, f.start)
        path = _PathParser(Scanner(body, f.body_start, src)).parse()
        args.append(ArgPattern(name, label, quant, path))
    return DependencyPattern(src, trigger, anchor, tuple(args))


def _arg_quantifier(q: str | None) -> ArgQuantifier:
    if not q:
        return ONE
    if q == "?":
        return OPTIONAL
    if q == "+":
        return ONE_OR_MORE
    if q == "*":
        return ZERO_OR_MORE
    return exactly(int(q.strip("{} \t")))


def parse_path(src: str) -> Node:
    return _PathParser(Scanner(src)).parse()


class _PathParser:
    def __init__(self, sc: Scanner):
        self.sc = sc

    def parse(self) -> Node:
        sc = self.sc
        if sc.at_end():
            raise sc.error("empty path")
        node = self.alternation()
        if not sc.at_end():
            raise sc.error(f"unexpected {sc.peek_char()!r}")
        return node

    def alternation(self) -> Node:
        alts = [self.concat()]
        while self.sc.accept("|"):
            alts.append(self.concat())
        return alts[0] if len(alts) == 1 else Alternation(tuple(alts))

    def concat(self) -> Node:
        sc = self.sc
        items = []
        while not sc.at_end() and sc.peek_char() not in ("|", ")"):
            items.append(self.quantified())
        if not items:
            raise sc.error("empty path or alternative")
        return items[0] if len(items) == 1 else Concat(tuple(items))

    def quantified(self) -> Node:
        sc = self.sc
        atom = self.atom()
        ch = sc.peek_char()
        if ch == "?":
            sc.pos += 1
            lo, hi = 0, 1
        elif ch == "*":
            sc.pos += 1
            lo, hi = 0, None
        elif ch == "+":
            sc.pos += 1
            lo, hi = 1, None
        elif ch == "{":
            lo, hi = parse_range(sc)
        else:
            return atom
        if sc.src.startswith("?", sc.pos):
            raise sc.error("dependency paths have no lazy quantifiers")
        if sc.peek_char() in ("?", "*", "+", "{"):
            raise sc.error("stacked quantifiers; use parentheses")
        return Quantified(atom, lo, hi, False)

    def atom(self) -> Node:
        sc = self.sc
        sc.skip()
        start = sc.pos
        if sc.accept(">>"):
            return WildcardHop(OUTGOING)
        if sc.accept("<<"):
            return WildcardHop(INCOMING)
        if sc.accept(">"):
            return Hop(OUTGOING, sc.read_string_matcher())
        if sc.accept("<"):
            return Hop(INCOMING, sc.read_string_matcher())
        if sc.accept("["):
            return NodeFilter(parse_constraint_body(sc))
        if sc.accept("("):
            src = sc.src
            if src.startswith("?=", sc.pos):
                sc.pos += 2
                sub = self.alternation()
                sc.expect(")")
                return Lookaround(True, sub)
            if src.startswith("?!", sc.pos):
                sc.pos += 2
                sub = self.alternation()
                sc.expect(")")
                return Lookaround(False, sub)
            if src.startswith("?", sc.pos):
                raise sc.error("only (?= ...) and (?! ...) assertions are allowed in paths", start)
            sub = self.alternation()
            sc.expect(")")
            return Group(sub)
        if sc.starts_string_matcher():
            return Hop(OUTGOING, sc.read_string_matcher())
        ch = sc.peek_char()
        raise sc.error(f"unexpected {ch!r}" if ch else "unexpected end of path", start)


# --- traversal -------------------------------------------------------------

PathFn = Callable[[frozenset, MatchContext], frozenset]


def compile_path(node: Node) -> PathFn:
    """Compile a path AST into a function from start-token sets to end-token sets."""
    if isinstance(node, Hop):
        matches = node.matcher.matches
        outgoing = node.direction == OUTGOING

        def hop(tokens, ctx):
            g = ctx.sentence.graph
            if g is None:
                return frozenset()
            step = g.outgoing if outgoing else g.incoming
            return frozenset(d for t in tokens for rel, d in step(t) if matches(rel))
        return hop
    if isinstance(node, WildcardHop):
        outgoing = node.direction == OUTGOING

        def wildcard(tokens, ctx):
            g = ctx.sentence.graph
            if g is None:
                return frozenset()
            step = g.outgoing if outgoing else g.incoming
            return frozenset(d for t in tokens for _, d in step(t))
        return wildcard
    if isinstance(node, NodeFilter):
        test = node.constraint.compile()
        return lambda tokens, ctx: frozenset(t for t in tokens if test(ctx, t))
    if isinstance(node, Group):
        return compile_path(node.sub)
    if isinstance(node, Concat):
        parts = [compile_path(i) for i in node.items]

        def concat(tokens, ctx):
            for p in parts:
                if not tokens:
                    break
                tokens = p(tokens, ctx)
            return tokens
        return concat
    if isinstance(node, Alternation):
        alts = [compile_path(a) for a in node.alternatives]
        return lambda tokens, ctx: frozenset().union(*(a(tokens, ctx) for a in alts))
    if isinstance(node, Lookaround):
        sub = compile_path(node.sub)
        want = node.positive
        return lambda tokens, ctx: frozenset(t for t in tokens if bool(sub(frozenset((t,)), ctx)) == want)
    if isinstance(node, Quantified):
        return _compile_repeat(compile_path(node.sub), node.min, node.max)
    raise TypeError(f"not a path node: {node!r}")


def _compile_repeat(sub: PathFn, lo: int, hi: int | None) -> PathFn:
    def repeat(tokens, ctx):
        cur = tokens
        for _ in range(lo):
            cur = sub(cur, ctx)
        acc = set(cur)
        frontier = cur
        steps = 0
        while frontier and (hi is None or steps < hi - lo):
            nxt = sub(frontier, ctx)
            steps += 1
            if hi is None:
                # closure: revisiting a token adds nothing new
                nxt = nxt - acc
            acc |= nxt
            frontier = nxt
        return frozenset(acc)
    return repeat


def traverse(path: Node | PathFn, start: Iterable[int], sentence: "Sentence", state: State | None = None,
             sentence_index: int = 0) -> frozenset[int]:
    fn = path if callable(path) else compile_path(path)
    if sentence.graph is None:
        return frozenset()
    return fn(frozenset(start), MatchContext(sentence, sentence_index, state))


# --- arguments -------------------------------------------------------------

def resolve_argument(arg: ArgPattern, end_tokens: Iterable[int], sentence_index: int, state: State,
                     taxonomy: Taxonomy | None = None) -> list[Mention]:
    """Mentions labeled ``arg.label`` covering any end token, in state order."""
    found: dict[Mention, None] = {}
    for t in end_tokens:
        for m in state_lookup(state, sentence_index, t, arg.label, taxonomy):
            found.setdefault(m, None)
    return sorted(found, key=state.order_of)


def expand_arguments(candidates: dict[str, tuple[ArgQuantifier, list[Mention]]]) -> list[dict[str, list[Mention]]]:
    """Cartesian product of per-argument alternatives (see ``ArgQuantifier``)."""
    per_arg: list[tuple[str, list[list[Mention] | None]]] = []
    for name, (q, ms) in candidates.items():
        ms = list(ms)
        if q.kind == "one":
            alts: list[list[Mention] | None] = [[m] for m in ms]
        elif q.kind == "optional":
            alts = [[m] for m in ms] or [None]
        elif q.kind == "one_or_more":
            alts = [ms] if ms else []
        elif q.kind == "zero_or_more":
            alts = [ms] if ms else [None]
        elif q.kind == "exactly":
            alts = [list(c) for c in itertools.combinations(ms, q.k)]
        else:
            raise ValueError(f"unknown argument quantifier {q!r}")
        if not alts:
            return []
        per_arg.append((name, alts))
    out = []
    for combo in itertools.product(*(alts for _, alts in per_arg)):
        out.append({name: chosen for (name, _), chosen in zip(per_arg, combo) if chosen is not None})
    return out


class DependencyPattern:
    """A compiled dependency pattern."""

    def __init__(self, source: str, trigger: TokenPattern | None, anchor: ArgPattern | None,
                 args: tuple[ArgPattern, ...]):
        if (trigger is None) == (anchor is None):
            raise ValueError("exactly one of trigger and anchor must be given")
        self.source = source
        self.trigger = trigger
        self.anchor = anchor
        self.args = args
        self._paths = [compile_path(a.path) for a in args]

    def referenced_labels(self) -> list[str]:
        labels = [a.label for a in self.args]
        if self.anchor is not None:
            labels.insert(0, self.anchor.label)
        if self.trigger is not None:
            labels.extend(referenced_labels(self.trigger.ast))
        return labels

    def _candidates(self, starts: frozenset, ctx: MatchContext, state: State, taxonomy: Taxonomy | None):
        cands: dict[str, tuple[ArgQuantifier, list[Mention]]] = {}
        for arg, path in zip(self.args, self._paths):
            ends = path(starts, ctx) if ctx.sentence.graph is not None else frozenset()
            found = resolve_argument(arg, ends, ctx.sentence_index, state, taxonomy)
            if not found and arg.required:
                return None
            cands[arg.name] = (arg.quantifier, found)
        return cands

    def match(self, rule: Any, sentence: "Sentence", sentence_index: int, state: State,
              taxonomy: Taxonomy | None = None, document: "Document | None" = None) -> list[Mention]:
        labels, name, keep = rule.labels, rule.name, rule.keep
        if taxonomy is None:
            taxonomy = state.taxonomy
        ctx = MatchContext(sentence, sentence_index, state)
        out: list[Mention] = []
        if self.trigger is not None:
            for tm in self.trigger.find_all(sentence, state, sentence_index):
                if tm.end <= tm.start:
                    continue
                cands = self._candidates(frozenset(range(tm.start, tm.end)), ctx, state, taxonomy)
                if cands is None:
                    continue
                trig = TextBoundMention(labels, sentence_index, (tm.start, tm.end), found_by=name, keep=keep,
                                        document=document)
                for args in expand_arguments(cands):
                    out.append(EventMention(labels, sentence_index, trig, args, found_by=name, keep=keep,
                                            document=document))
            return out
        anchor = self.anchor
        for am in state.mentions_in_sentence(sentence_index):
            if not label_matches(am.labels, anchor.label, taxonomy):
                continue
            cands = self._candidates(frozenset(am.token_interval.tokens()), ctx, state, taxonomy)
            if cands is None:
                continue
            for args in expand_arguments(cands):
                out.append(RelationMention(labels, sentence_index, {anchor.name: [am], **args}, found_by=name,
                                           keep=keep, document=document))
        return out

    def __repr__(self) -> str:
        return f"DependencyPattern({self.source.strip()!r})"


def match_dep_pattern(pattern: DependencyPattern, rule: Any, sentence: "Sentence", sentence_index: int,
                      state: State, taxonomy: Taxonomy | None = None,
                      document: "Document | None" = None) -> list[Mention]:
    return pattern.match(rule, sentence, sentence_index, state, taxonomy, document)
