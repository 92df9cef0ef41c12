"""Surface (token) patterns: parsing, NFA compilation and matching.

A token pattern is a regular expression whose symbols are token constraints.
It compiles to a Thompson-style NFA whose split states list their successors
in priority order (greedy quantifiers prefer another iteration, lazy ones
prefer to stop). Matching explores the NFA depth first in that order, so the
first accepting path is the same one a backtracking regex engine would pick.
Each (state, position) pair is expanded at most once per search: a revisit
means the earlier expansion already failed, or that an unbounded loop went
round without consuming a token. Loops whose body can match the empty
sequence also record where their current iteration started, and that
register is part of the visited key, so nested loop instances stay distinct.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, NamedTuple

from .errors import PatternSyntaxError
from .matchers import (
    ExactMatcher,
    FieldConstraint,
    MatchContext,
    RegexMatcher,
    Scanner,
    TokenConstraint,
    anchor_positions,
    parse_constraint_body,
)
from .mentions import EventMention, Mention, RelationMention, TextBoundMention

if TYPE_CHECKING:
    from .document import Document, Sentence
    from .state import State

UNITS = ("word", "tag")


# --- AST -------------------------------------------------------------------

class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Constraint(Node):
    constraint: TokenConstraint


@dataclass(frozen=True)
class Concat(Node):
    items: tuple[Node, ...]


@dataclass(frozen=True)
class Alternation(Node):
    alternatives: tuple[Node, ...]


@dataclass(frozen=True)
class Group(Node):
    sub: Node


@dataclass(frozen=True)
class NamedCapture(Node):
    name: str
    sub: Node


@dataclass(frozen=True)
class MentionMatcher(Node):
    name: str | None
    label: ExactMatcher | RegexMatcher


@dataclass(frozen=True)
class Quantified(Node):
    sub: Node
    min: int
    max: int | None  # None = unbounded
    lazy: bool = False


BOS, EOS = "BOS", "EOS"
LOOKAHEAD, NEG_LOOKAHEAD = "LOOKAHEAD", "NEG_LOOKAHEAD"
LOOKBEHIND, NEG_LOOKBEHIND = "LOOKBEHIND", "NEG_LOOKBEHIND"


@dataclass(frozen=True)
class Assertion(Node):
    kind: str
    sub: Node | None = None


# --- parser ----------------------------------------------------------------

def parse_token_pattern(src: str, unit: str = "word") -> Node:
    """Parse token-pattern source into an AST.

    Bare strings and regexes outside brackets test the ``unit`` field.
    Raises :class:`PatternSyntaxError` with the offending position.
    """
    if unit not in UNITS:
        raise ValueError(f"unit must be one of {UNITS}, got {unit!r}")
    return _TokenParser(Scanner(src), unit).parse()


class _TokenParser:
    def __init__(self, sc: Scanner, unit: str):
        self.sc = sc
        self.unit = unit

    def parse(self) -> Node:
        sc = self.sc
        if sc.at_end():
            raise sc.error("empty pattern")
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
            raise sc.error("empty pattern or alternative")
        return items[0] if len(items) == 1 else Concat(tuple(items))

    def quantified(self) -> Node:
        sc = self.sc
        atom = self.atom()
        q = self.quantifier()
        if q is None:
            return atom
        lo, hi, lazy = q
        if isinstance(atom, Assertion) and atom.kind in (BOS, EOS):
            raise sc.error("anchors cannot be quantified")
        if sc.peek_char() in ("?", "*", "+", "{"):
            raise sc.error("stacked quantifiers; use parentheses")
        return Quantified(atom, lo, hi, lazy)

    def quantifier(self) -> tuple[int, int | None, bool] | None:
        sc = self.sc
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
            return None
        lazy = sc.accept("?")
        return lo, hi, lazy

    def atom(self) -> Node:
        sc = self.sc
        sc.skip()
        start = sc.pos
        ch = sc.peek_char()
        if ch == "[":
            sc.pos += 1
            return Constraint(parse_constraint_body(sc))
        if ch == "(":
            sc.pos += 1
            return self.group(start)
        if ch == "@":
            sc.pos += 1
            return self.mention()
        if ch == "^":
            sc.pos += 1
            return Assertion(BOS)
        if ch == "$":
            sc.pos += 1
            return Assertion(EOS)
        if sc.starts_string_matcher():
            return Constraint(FieldConstraint(self.unit, sc.read_string_matcher()))
        raise sc.error(f"unexpected {ch!r}" if ch else "unexpected end of pattern", start)

    def group(self, start: int) -> Node:
        sc = self.sc
        src = sc.src
        kind = None
        name = None
        if src.startswith("?<=", sc.pos):
            kind, sc.pos = LOOKBEHIND, sc.pos + 3
        elif src.startswith("?<!", sc.pos):
            kind, sc.pos = NEG_LOOKBEHIND, sc.pos + 3
        elif src.startswith("?=", sc.pos):
            kind, sc.pos = LOOKAHEAD, sc.pos + 2
        elif src.startswith("?!", sc.pos):
            kind, sc.pos = NEG_LOOKAHEAD, sc.pos + 2
        elif src.startswith("?:", sc.pos):
            sc.pos += 2
        elif src.startswith("?<", sc.pos):
            sc.pos += 2
            name = sc.read_identifier()
            if name is None:
                raise sc.error("expected a capture name after '(?<'")
            sc.expect(">", "'>' closing the capture name")
        elif src.startswith("?", sc.pos):
            raise sc.error("unknown group construct")
        sub = self.alternation()
        sc.expect(")", "')'")
        if kind is None:
            return NamedCapture(name, sub) if name is not None else Group(sub)
        if kind in (LOOKBEHIND, NEG_LOOKBEHIND) and fixed_lengths(sub) is None:
            raise sc.error("lookbehind patterns must have a length known at compile time", start)
        return Assertion(kind, sub)

    def mention(self) -> Node:
        sc = self.sc
        save = sc.pos
        ident = sc.read_identifier()
        if ident is not None and sc.accept(":"):
            return MentionMatcher(ident, sc.read_string_matcher())
        sc.pos = save
        return MentionMatcher(None, sc.read_string_matcher())


def parse_range(sc: Scanner) -> tuple[int, int | None]:
    """Parse ``{n}``, ``{n,m}``, ``{,m}`` or ``{n,}``; the scanner sits on ``{``."""
    start = sc.pos
    sc.expect("{")
    lo = sc.read_int()
    if sc.accept(","):
        hi = sc.read_int()
        if lo is None and hi is None:
            raise sc.error("empty repetition range", start)
        lo = lo or 0
    else:
        if lo is None:
            raise sc.error("expected a repetition count", start)
        hi = lo
    sc.expect("}", "'}' closing the repetition range")
    if hi is not None and (hi < lo or hi == 0 and lo != hi):
        raise sc.error(f"invalid repetition range {{{lo},{hi}}}", start)
    if hi == 0 and "," in sc.src[start:sc.pos]:
        raise sc.error("repetition range upper bound must be positive", start)
    return lo, hi


def fixed_lengths(node: Node) -> frozenset[int] | None:
    """All token lengths ``node`` can match, or None if not statically fixed."""
    if isinstance(node, Constraint):
        return frozenset({1})
    if isinstance(node, Assertion):
        return frozenset({0})
    if isinstance(node, (Group, NamedCapture)):
        return fixed_lengths(node.sub)
    if isinstance(node, Concat):
        acc = frozenset({0})
        for item in node.items:
            ls = fixed_lengths(item)
            if ls is None:
                return None
            acc = frozenset(a + b for a in acc for b in ls)
        return acc
    if isinstance(node, Alternation):
        out: set[int] = set()
        for alt in node.alternatives:
            ls = fixed_lengths(alt)
            if ls is None:
                return None
            out |= ls
        return frozenset(out)
    if isinstance(node, Quantified) and node.max == node.min:
        ls = fixed_lengths(node.sub)
        if ls is None:
            return None
        acc = frozenset({0})
        for _ in range(node.min):
            acc = frozenset(a + b for a in acc for b in ls)
        return acc
    return None


def nullable(node: Node) -> bool:
    """Whether ``node`` can match without consuming a token."""
    if isinstance(node, Constraint):
        return False
    if isinstance(node, (MentionMatcher, Assertion)):
        return True  # mentions may be empty
    if isinstance(node, (Group, NamedCapture)):
        return nullable(node.sub)
    if isinstance(node, Concat):
        return all(nullable(i) for i in node.items)
    if isinstance(node, Alternation):
        return any(nullable(a) for a in node.alternatives)
    if isinstance(node, Quantified):
        return node.min == 0 or nullable(node.sub)
    raise TypeError(f"unknown pattern node {node!r}")


def _max_trigger_captures(node: Node) -> float:
    if isinstance(node, NamedCapture):
        own = 1 if node.name.lower() == "trigger" else 0
        return own + _max_trigger_captures(node.sub)
    if isinstance(node, MentionMatcher):
        return 1 if node.name is not None and node.name.lower() == "trigger" else 0
    if isinstance(node, Group):
        return _max_trigger_captures(node.sub)
    if isinstance(node, Concat):
        return sum(_max_trigger_captures(i) for i in node.items)
    if isinstance(node, Alternation):
        return max(_max_trigger_captures(a) for a in node.alternatives)
    if isinstance(node, Quantified):
        inner = _max_trigger_captures(node.sub)
        if inner == 0:
            return 0
        return float("inf") if node.max is None else inner * node.max
    return 0


def _walk(node: Node):
    yield node
    if isinstance(node, (Group, NamedCapture, Quantified)):
        yield from _walk(node.sub)
    elif isinstance(node, Assertion) and node.sub is not None:
        yield from _walk(node.sub)
    elif isinstance(node, Concat):
        for i in node.items:
            yield from _walk(i)
    elif isinstance(node, Alternation):
        for a in node.alternatives:
            yield from _walk(a)


def referenced_labels(node: Node) -> list[str]:
    """Exact mention labels a pattern refers to (``@Label`` and ``mention=Label``)."""
    from .matchers import AndConstraint, NotConstraint, OrConstraint

    def constraint_labels(c: TokenConstraint):
        if isinstance(c, FieldConstraint):
            if c.field == "mention" and isinstance(c.matcher, ExactMatcher):
                yield c.matcher.value
        elif isinstance(c, NotConstraint):
            yield from constraint_labels(c.operand)
        elif isinstance(c, (AndConstraint, OrConstraint)):
            for o in c.operands:
                yield from constraint_labels(o)

    out: list[str] = []
    for n in _walk(node):
        if isinstance(n, MentionMatcher) and isinstance(n.label, ExactMatcher):
            out.append(n.label.value)
        elif isinstance(n, Constraint):
            out.extend(constraint_labels(n.constraint))
    return out


# --- NFA -------------------------------------------------------------------

CONSUME, MENTION, SPLIT, OPEN, CLOSE, ASSERT, ACCEPT, LOOP_ENTER, LOOP_BACK, LOOP_LEAVE = range(10)


class TokenNFA:
    """Flat NFA: ``ops[i] = [opcode, argument, next]``; SPLIT's next is a priority-ordered list."""

    def __init__(self) -> None:
        self.ops: list[list[Any]] = []
        self.start = -1
        self.accept = -1
        self.loops = 0  # loops tracked with an iteration-start register

    def add(self, op: int, arg: Any = None, nxt: Any = None) -> int:
        self.ops.append([op, arg, nxt])
        return len(self.ops) - 1

    def __len__(self) -> int:
        return len(self.ops)


def compile_nfa(node: Node) -> TokenNFA:
    nfa = TokenNFA()
    nfa.accept = nfa.add(ACCEPT)
    nfa.start = _emit(nfa, node, nfa.accept)
    return nfa


def _emit(nfa: TokenNFA, node: Node, nxt: int) -> int:
    if isinstance(node, Constraint):
        return nfa.add(CONSUME, node.constraint.compile(), nxt)
    if isinstance(node, Concat):
        for item in reversed(node.items):
            nxt = _emit(nfa, item, nxt)
        return nxt
    if isinstance(node, Alternation):
        return nfa.add(SPLIT, None, [_emit(nfa, a, nxt) for a in node.alternatives])
    if isinstance(node, Group):
        return _emit(nfa, node.sub, nxt)
    if isinstance(node, NamedCapture):
        close = nfa.add(CLOSE, node.name, nxt)
        body = _emit(nfa, node.sub, close)
        return nfa.add(OPEN, node.name, body)
    if isinstance(node, MentionMatcher):
        return nfa.add(MENTION, (node.name, node.label.matches), nxt)
    if isinstance(node, Quantified):
        return _emit_quantified(nfa, node, nxt)
    if isinstance(node, Assertion):
        if node.sub is None:
            return nfa.add(ASSERT, (node.kind, None, None), nxt)
        sub = compile_nfa(node.sub)
        lengths = None
        if node.kind in (LOOKBEHIND, NEG_LOOKBEHIND):
            lengths = tuple(sorted(fixed_lengths(node.sub) or ()))
        return nfa.add(ASSERT, (node.kind, sub, lengths), nxt)
    raise TypeError(f"unknown pattern node {node!r}")


def _emit_quantified(nfa: TokenNFA, q: Quantified, exit_: int) -> int:
    def choice(body: int, skip: int) -> list[int]:
        return [skip, body] if q.lazy else [body, skip]

    if q.max is None and nullable(q.sub):
        # an iteration that consumed nothing is rejected at the back edge
        reg = nfa.loops
        nfa.loops += 1
        leave = nfa.add(LOOP_LEAVE, reg, exit_)
        head = nfa.add(SPLIT, None, None)
        back = nfa.add(LOOP_BACK, reg, head)
        body = _emit(nfa, q.sub, back)
        nfa.ops[head][2] = choice(body, leave)
        tail = nfa.add(LOOP_ENTER, reg, head)
    elif q.max is None:
        loop = nfa.add(SPLIT, None, None)
        body = _emit(nfa, q.sub, loop)
        nfa.ops[loop][2] = choice(body, exit_)
        tail = loop
    else:
        # optional copies nest: skipping one skips all later ones
        tail = exit_
        for _ in range(q.max - q.min):
            body = _emit(nfa, q.sub, tail)
            tail = nfa.add(SPLIT, None, choice(body, exit_))
    for _ in range(q.min):
        tail = _emit(nfa, q.sub, tail)
    return tail


class Capture(NamedTuple):
    start: int
    end: int
    mention: Mention | None = None


@dataclass(frozen=True)
class TokenMatch:
    start: int
    end: int
    captures: dict[str, tuple[Capture, ...]] = field(default_factory=dict)

    @property
    def interval(self) -> tuple[int, int]:
        return (self.start, self.end)


def _mention_candidates(ctx: MatchContext, pos: int, label_ok) -> list[Mention]:
    st = ctx.state
    if st is None:
        return []
    found = [m for m in st.mentions_starting_at(ctx.sentence_index, pos)
             if m.end <= len(ctx.sentence.words) and any(label_ok(lb) for lb in st.labels_of(m))]
    found.sort(key=lambda m: -m.token_interval.length)
    return found


def _check_assertion(arg: tuple, ctx: MatchContext, pos: int) -> bool:
    kind, sub, lengths = arg
    if kind == BOS:
        return pos == 0
    if kind == EOS:
        return pos == len(ctx.sentence.words)
    if kind in (LOOKAHEAD, NEG_LOOKAHEAD):
        found = _search(sub, ctx, pos) is not None
        return found if kind == LOOKAHEAD else not found
    found = any(pos - n >= 0 and _search(sub, ctx, pos - n, pos) is not None for n in lengths)
    return found if kind == LOOKBEHIND else not found


def _search(nfa: TokenNFA, ctx: MatchContext, start: int, required_end: int | None = None):
    """Highest-priority match of ``nfa`` anchored at ``start``: ``(end, log)`` or None."""
    ops = nfa.ops
    n = len(ctx.sentence.words)
    width = n + 1
    visited: set = set()
    regs: tuple = (None,) * nfa.loops
    stack: list[tuple[int, int, Any, tuple]] = [(nfa.start, start, None, regs)]
    while stack:
        st, pos, log, regs = stack.pop()
        while True:
            key = (st * width + pos, regs) if regs else st * width + pos
            if key in visited:
                break
            visited.add(key)
            op, arg, nxt = ops[st]
            if op == CONSUME:
                if pos < n and arg(ctx, pos):
                    st = nxt
                    pos += 1
                    continue
                break
            if op == SPLIT:
                for alt in reversed(nxt[1:]):
                    stack.append((alt, pos, log, regs))
                st = nxt[0]
                continue
            if op == OPEN or op == CLOSE:
                log = (log, op, arg, pos, None)
                st = nxt
                continue
            if op == MENTION:
                name, label_ok = arg
                cands = _mention_candidates(ctx, pos, label_ok)
                if not cands:
                    break
                for m in reversed(cands[1:]):
                    stack.append((nxt, m.end, (log, MENTION, name, m.start, m) if name else log, regs))
                m = cands[0]
                if name:
                    log = (log, MENTION, name, m.start, m)
                pos = m.end
                st = nxt
                continue
            if op == ASSERT:
                if _check_assertion(arg, ctx, pos):
                    st = nxt
                    continue
                break
            if op == LOOP_ENTER or op == LOOP_BACK:
                if op == LOOP_BACK and regs[arg] == pos:
                    break
                regs = regs[:arg] + (pos,) + regs[arg + 1:]
                st = nxt
                continue
            if op == LOOP_LEAVE:
                regs = regs[:arg] + (None,) + regs[arg + 1:]
                st = nxt
                continue
            # ACCEPT
            if required_end is None or pos == required_end:
                return pos, log
            break
    return None


def _captures_from_log(log) -> dict[str, tuple[Capture, ...]]:
    events = []
    while log is not None:
        log, op, name, pos, mention = log
        events.append((op, name, pos, mention))
    events.reverse()
    open_stack: dict[str, list[int]] = {}
    caps: dict[str, list[Capture]] = {}
    for op, name, pos, mention in events:
        if op == OPEN:
            open_stack.setdefault(name, []).append(pos)
        elif op == CLOSE:
            start = open_stack[name].pop()
            caps.setdefault(name, []).append(Capture(start, pos))
        else:
            caps.setdefault(name, []).append(Capture(mention.start, mention.end, mention))
    return {k: tuple(v) for k, v in caps.items()}


class TokenPattern:
    """A compiled token pattern."""

    def __init__(self, source: str, unit: str = "word", ast: Node | None = None):
        self.source = source
        self.unit = unit
        self.ast = ast if ast is not None else parse_token_pattern(source, unit)
        if _max_trigger_captures(self.ast) > 1:
            raise PatternSyntaxError("a pattern may capture at most one trigger per match", source, 0)
        self.nfa = compile_nfa(self.ast)
        self.uses_state = any(
            isinstance(n, MentionMatcher) or isinstance(n, Constraint) and n.constraint.uses_state()
            for n in _walk(self.ast)
        )
        self._first = _first_set(self.ast)

    def start_positions(self, sentence: "Sentence", state: "State | None" = None,
                        sentence_index: int = 0) -> list[int] | None:
        """Sorted superset of the positions where a match can start, or None for all of them."""
        if self._first is None:
            return None
        out: set[int] = set()
        for item in self._first:
            if isinstance(item, MentionMatcher):
                if state is not None:
                    ok = item.label.matches
                    out.update(m.start for m in state.mentions_in_sentence(sentence_index)
                               if any(ok(lb) for lb in state.labels_of(m)))
                continue
            b = anchor_positions(item, sentence)
            if b is None:
                return None
            out |= b
        return sorted(out)

    def match_at(self, sentence: "Sentence", start: int, state: "State | None" = None,
                 sentence_index: int = 0) -> TokenMatch | None:
        ctx = MatchContext(sentence, sentence_index, state)
        r = _search(self.nfa, ctx, start)
        if r is None:
            return None
        end, log = r
        return TokenMatch(start, end, _captures_from_log(log))

    def find_all(self, sentence: "Sentence", state: "State | None" = None,
                 sentence_index: int = 0) -> list[TokenMatch]:
        return find_all(self, sentence, state, sentence_index)

    def __repr__(self) -> str:
        return f"TokenPattern({self.source.strip()!r})"


def _first_set(node: Node) -> list[TokenConstraint | MentionMatcher] | None:
    """Constraints or mention matchers one of which must start every match, or None when
    matches may be empty."""
    first, empty = _first(node)
    return None if first is None or empty else first


def _first(node: Node) -> tuple[list[Any] | None, bool]:
    """(what can consume the first token, whether ``node`` can match empty)."""
    if isinstance(node, Constraint):
        return [node.constraint], False
    if isinstance(node, MentionMatcher):
        return [node], True  # mentions may be empty
    if isinstance(node, Assertion):
        return [], True
    if isinstance(node, (Group, NamedCapture)):
        return _first(node.sub)
    if isinstance(node, Alternation):
        out: list[Any] = []
        empty = False
        for a in node.alternatives:
            f, e = _first(a)
            if f is None:
                return None, True
            out.extend(f)
            empty = empty or e
        return out, empty
    if isinstance(node, Concat):
        out = []
        for item in node.items:
            f, e = _first(item)
            if f is None:
                return None, True
            out.extend(f)
            if not e:
                return out, False
        return out, True
    if isinstance(node, Quantified):
        f, e = _first(node.sub)
        return f, e or node.min == 0
    return None, True


def find_all(pattern: TokenPattern, sentence: "Sentence", state: "State | None" = None,
             sentence_index: int = 0) -> list[TokenMatch]:
    """Left-to-right, non-overlapping scan for the best match at each start position."""
    ctx = MatchContext(sentence, sentence_index, state)
    n = len(sentence.words)
    nfa = pattern.nfa
    starts = pattern.start_positions(sentence, state, sentence_index)
    positions = iter(range(n + 1)) if starts is None else iter(starts)
    out = []
    resume = 0
    for i in positions:
        if i < resume:
            continue
        r = _search(nfa, ctx, i)
        if r is None:
            continue
        end, log = r
        out.append(TokenMatch(i, end, _captures_from_log(log)))
        resume = end if end > i else i + 1
    return out


def match_to_mentions(match: TokenMatch, rule: Any, sentence_index: int,
                      document: "Document | None" = None) -> list[Mention]:
    """Turn one match into mentions labeled and attributed per ``rule``.

    ``rule`` needs ``name``, ``labels`` and ``keep`` attributes. Zero-width
    matches and empty captures produce nothing.
    """
    if match.end <= match.start:
        return []
    labels, name, keep = rule.labels, rule.name, rule.keep

    def span(start: int, end: int) -> TextBoundMention:
        return TextBoundMention(labels, sentence_index, (start, end), found_by=name, keep=keep, document=document)

    caps = {k: [c for c in cs if c.end > c.start] for k, cs in match.captures.items()}
    caps = {k: cs for k, cs in caps.items() if cs}
    if not caps:
        return [span(match.start, match.end)]
    args = {}
    trigger = None
    for cname, cs in caps.items():
        if cname.lower() == "trigger":
            trigger = span(cs[0].start, cs[0].end)
        else:
            args[cname] = [c.mention if c.mention is not None else span(c.start, c.end) for c in cs]
    if trigger is not None:
        return [EventMention(labels, sentence_index, trigger, args, found_by=name, keep=keep, document=document)]
    return [RelationMention(labels, sentence_index, args, found_by=name, keep=keep, document=document)]
