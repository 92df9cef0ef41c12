"""Reference implementations used to cross-check the real matchers.

These are deliberately naive: a backtracking enumerator over a tiny tuple
AST for token patterns, a per-token set walk for dependency paths and a
closed-form count for argument expansion. Each comes with a random
generator and a renderer to pattern source, so the real parser sees the
same pattern the oracle evaluates.
"""

from __future__ import annotations

import math
import random

# --- token patterns --------------------------------------------------------
#
# ("tok", kind, value)        kind: word | any | notword | regex
# ("seq", items) / ("alt", alts)
# ("rep", sub, lo, hi, lazy)  hi None means unbounded
# ("cap", name, sub)
# ("men", name | None, label)
# ("look", kind, sub)         kind: ahead | nahead | behind | nbehind
# ("bos",) / ("eos",)

WORDS = ("a", "b", "c")
LABELS = ("X", "Y")


def tok_test(node, word: str) -> bool:
    _, kind, value = node
    if kind == "word":
        return word == value
    if kind == "any":
        return True
    if kind == "notword":
        return word != value
    return word in value  # regex over a small alphabet, stored as the accepted set


def token_gen(node, pos, caps, ctx):
    """Yield ``(end, caps)`` for every way ``node`` matches at ``pos``, best first."""
    words, mentions = ctx
    n = len(words)
    tag = node[0]
    if tag == "tok":
        if pos < n and tok_test(node, words[pos]):
            yield pos + 1, caps
    elif tag == "seq":
        yield from _seq(node[1], pos, caps, ctx)
    elif tag == "alt":
        for alt in node[1]:
            yield from token_gen(alt, pos, caps, ctx)
    elif tag == "rep":
        _, sub, lo, hi, lazy = node
        yield from _mandatory(sub, lo, hi, lazy, 0, pos, caps, ctx)
    elif tag == "cap":
        _, name, sub = node
        for end, c in token_gen(sub, pos, caps, ctx):
            yield end, c + ((name, pos, end, None),)
    elif tag == "men":
        _, name, label = node
        found = [m for m in mentions if m.start == pos and label in m.labels]
        found.sort(key=lambda m: -(m.end - m.start))
        for m in found:
            yield m.end, (caps + ((name, m.start, m.end, m),) if name else caps)
    elif tag == "look":
        _, kind, sub = node
        if kind in ("ahead", "nahead"):
            ok = next(token_gen(sub, pos, (), ctx), None) is not None
        else:
            ok = any(end == pos for s in range(pos + 1) for end, _ in token_gen(sub, s, (), ctx))
        if ok == (kind in ("ahead", "behind")):
            yield pos, caps
    elif tag == "bos":
        if pos == 0:
            yield pos, caps
    elif tag == "eos":
        if pos == n:
            yield pos, caps
    else:
        raise ValueError(node)


def _seq(items, pos, caps, ctx):
    if not items:
        yield pos, caps
        return
    for end, c in token_gen(items[0], pos, caps, ctx):
        yield from _seq(items[1:], end, c, ctx)


def _mandatory(sub, lo, hi, lazy, k, pos, caps, ctx):
    if k == lo:
        if hi is None:
            yield from _loop(sub, lazy, pos, caps, ctx)
        else:
            yield from _optional(sub, hi - lo, lazy, pos, caps, ctx)
        return
    for end, c in token_gen(sub, pos, caps, ctx):
        yield from _mandatory(sub, lo, hi, lazy, k + 1, end, c, ctx)


def _optional(sub, remaining, lazy, pos, caps, ctx):
    if remaining == 0:
        yield pos, caps
        return

    def take():
        for end, c in token_gen(sub, pos, caps, ctx):
            yield from _optional(sub, remaining - 1, lazy, end, c, ctx)

    if lazy:
        yield pos, caps
        yield from take()
    else:
        yield from take()
        yield pos, caps


def _loop(sub, lazy, pos, caps, ctx):
    def take():
        for end, c in token_gen(sub, pos, caps, ctx):
            if end == pos:
                continue  # an unbounded iteration must consume something
            yield from _loop(sub, lazy, end, c, ctx)

    if lazy:
        yield pos, caps
        yield from take()
    else:
        yield from take()
        yield pos, caps


def oracle_find_all(node, words, mentions):
    """Left-to-right scan taking the first enumerated match at each start."""
    ctx = (list(words), list(mentions))
    out = []
    i = 0
    while i <= len(words):
        first = next(token_gen(node, i, (), ctx), None)
        if first is None:
            i += 1
            continue
        end, caps = first
        grouped: dict[str, list] = {}
        for name, s, e, m in caps:
            grouped.setdefault(name, []).append((s, e, m))
        out.append((i, end, grouped))
        i = end if end > i else i + 1
    return out


def render_token(node) -> str:
    tag = node[0]
    if tag == "tok":
        _, kind, value = node
        if kind == "word":
            return value
        if kind == "any":
            return "[]"
        if kind == "notword":
            return f"[!word={value}]"
        return "/^(" + "|".join(sorted(value)) + ")$/"
    if tag == "seq":
        return " ".join(_atomic(i) if i[0] == "alt" else render_token(i) for i in node[1])
    if tag == "alt":
        return " | ".join(render_token(a) for a in node[1])
    if tag == "rep":
        _, sub, lo, hi, lazy = node
        if (lo, hi) == (0, None):
            q = "*"
        elif (lo, hi) == (1, None):
            q = "+"
        elif (lo, hi) == (0, 1):
            q = "?"
        elif hi is None:
            q = f"{{{lo},}}"
        elif lo == hi:
            q = f"{{{lo}}}"
        elif lo == 0:
            q = f"{{,{hi}}}"
        else:
            q = f"{{{lo},{hi}}}"
        return _atomic(sub) + q + ("?" if lazy else "")
    if tag == "cap":
        return f"(?<{node[1]}> {render_token(node[2])})"
    if tag == "men":
        return f"@{node[1]}:{node[2]}" if node[1] else f"@{node[2]}"
    if tag == "look":
        op = {"ahead": "?=", "nahead": "?!", "behind": "?<=", "nbehind": "?<!"}[node[1]]
        return f"({op} {render_token(node[2])})"
    return "^" if tag == "bos" else "$"


def _atomic(node) -> str:
    if node[0] in ("tok", "men", "cap", "look", "bos", "eos"):
        return render_token(node)
    return f"({render_token(node)})"


def random_token_pattern(rng: random.Random, budget: int = 6):
    """A random pattern with at most ``budget`` nodes."""
    node, _ = _rand_token(rng, budget)
    return node


def _rand_tok(rng):
    kind = rng.choice(["word", "word", "word", "any", "notword", "regex"])
    if kind == "any":
        return ("tok", "any", None)
    if kind == "regex":
        return ("tok", "regex", frozenset(rng.sample(WORDS, 2)))
    return ("tok", kind, rng.choice(WORDS))


def _rand_token(rng, budget):
    """Return ``(node, nodes_used)``."""
    if budget <= 1:
        r = rng.random()
        if r < 0.12:
            return ("men", rng.choice([None, "m"]), rng.choice(LABELS)), 1
        if r < 0.16:
            return (rng.choice([("bos",), ("eos",)])), 1
        return _rand_tok(rng), 1
    r = rng.random()
    if r < 0.25:
        return _rand_token(rng, 1)
    if r < 0.45:
        items, used = [], 1
        for _ in range(rng.randint(2, 3)):
            if budget - used < 1:
                break
            item, u = _rand_token(rng, rng.randint(1, max(1, (budget - used) // 2 + 1)))
            items.append(item)
            used += u
        if len(items) == 1:
            return items[0], used
        return ("seq", tuple(items)), used
    if r < 0.60:
        alts, used = [], 1
        for _ in range(2):
            if budget - used < 1:
                break
            alt, u = _rand_token(rng, max(1, (budget - used) // 2))
            alts.append(alt)
            used += u
        if len(alts) == 1:
            return alts[0], used
        return ("alt", tuple(alts)), used
    if r < 0.80:
        sub, u = _rand_token(rng, budget - 1)
        if sub[0] in ("bos", "eos"):
            sub = _rand_tok(rng)  # anchors cannot be quantified
        lo, hi = rng.choice([(0, None), (1, None), (0, 1), (2, None), (1, 2), (0, 2), (2, 2), (1, 3)])
        return ("rep", sub, lo, hi, rng.random() < 0.4), u + 1
    if r < 0.90:
        sub, u = _rand_token(rng, budget - 1)
        return ("cap", rng.choice(["x", "y"]), sub), u + 1
    kind = rng.choice(["ahead", "nahead", "behind", "nbehind"])
    if kind in ("behind", "nbehind"):
        # fixed-length body: one or two plain tokens, or an alternation of them
        if budget >= 3 and rng.random() < 0.5:
            return ("look", kind, ("alt", (_rand_tok(rng), ("seq", (_rand_tok(rng), _rand_tok(rng)))))), 4
        return ("look", kind, _rand_tok(rng)), 2
    sub, u = _rand_token(rng, budget - 1)
    return ("look", kind, sub), u + 1


def count_nodes(node) -> int:
    tag = node[0]
    if tag in ("seq", "alt"):
        return 1 + sum(count_nodes(i) for i in node[1])
    if tag in ("rep", "cap"):
        return 1 + count_nodes(node[2] if tag == "cap" else node[1])
    if tag == "look":
        return 1 + count_nodes(node[2])
    return 1


# --- dependency paths ------------------------------------------------------
#
# ("out", rel | None) / ("in", rel | None)   None is a wildcard hop
# ("rx", direction, rels)                     regex hop accepting a set of relations
# ("filt", word) / ("seq", items) / ("alt", alts)
# ("rep", sub, lo, hi) / ("look", positive, sub)

RELS = ("r", "s", "t")


def path_ends(node, token, words, edges) -> set[int]:
    """Tokens reachable from ``token`` along ``node``."""
    tag = node[0]
    if tag in ("out", "in"):
        rel = node[1]
        if tag == "out":
            return {d for s, d, r in edges if s == token and (rel is None or r == rel)}
        return {s for s, d, r in edges if d == token and (rel is None or r == rel)}
    if tag == "rx":
        _, direction, rels = node
        if direction == "out":
            return {d for s, d, r in edges if s == token and r in rels}
        return {s for s, d, r in edges if d == token and r in rels}
    if tag == "filt":
        return {token} if words[token] == node[1] else set()
    if tag == "seq":
        current = {token}
        for item in node[1]:
            current = {e for t in current for e in path_ends(item, t, words, edges)}
        return current
    if tag == "alt":
        return {e for alt in node[1] for e in path_ends(alt, token, words, edges)}
    if tag == "rep":
        _, sub, lo, hi = node
        # walks longer than lo + n + 1 iterations reach nothing new
        limit = hi if hi is not None else lo + len(words) + 1
        result: set[int] = set()
        current = {token}
        for k in range(limit + 1):
            if k >= lo:
                result |= current
            current = {e for t in current for e in path_ends(sub, t, words, edges)}
        return result
    if tag == "look":
        _, positive, sub = node
        hit = bool(path_ends(sub, token, words, edges))
        return {token} if hit == positive else set()
    raise ValueError(node)


def render_path(node) -> str:
    tag = node[0]
    if tag == "out":
        if node[1] is None:
            return ">>"
        return node[1] if node[1] == "r" else f">{node[1]}"  # bare relation means outgoing
    if tag == "in":
        return "<<" if node[1] is None else f"<{node[1]}"
    if tag == "rx":
        arrow = ">" if node[1] == "out" else "<"
        return arrow + "/^(" + "|".join(sorted(node[2])) + ")$/"
    if tag == "filt":
        return f"[word={node[1]}]"
    if tag == "seq":
        return " ".join(f"({render_path(i)})" if i[0] == "alt" else render_path(i) for i in node[1])
    if tag == "alt":
        return " | ".join(render_path(a) for a in node[1])
    if tag == "rep":
        _, sub, lo, hi = node
        if (lo, hi) == (0, None):
            q = "*"
        elif (lo, hi) == (1, None):
            q = "+"
        elif (lo, hi) == (0, 1):
            q = "?"
        elif hi is None:
            q = f"{{{lo},}}"
        elif lo == hi:
            q = f"{{{lo}}}"
        else:
            q = f"{{{lo},{hi}}}"
        inner = render_path(sub)
        if sub[0] in ("seq", "alt", "rep"):
            inner = f"({inner})"
        return inner + q
    if tag == "look":
        return f"({'?=' if node[1] else '?!'} {render_path(node[2])})"
    raise ValueError(node)


def random_path(rng: random.Random, budget: int = 6):
    node, _ = _rand_path(rng, budget)
    return node


def _rand_hop(rng):
    r = rng.random()
    direction = rng.choice(["out", "out", "in"])
    if r < 0.15:
        return (direction, None)
    if r < 0.3:
        return ("rx", direction, frozenset(rng.sample(RELS, 2)))
    if r < 0.42:
        return ("filt", rng.choice(WORDS))
    return (direction, rng.choice(RELS))


def _rand_path(rng, budget):
    if budget <= 1 or rng.random() < 0.3:
        return _rand_hop(rng), 1
    r = rng.random()
    if r < 0.4:
        items, used = [], 1
        for _ in range(rng.randint(2, 3)):
            if budget - used < 1:
                break
            item, u = _rand_path(rng, max(1, (budget - used) // 2))
            items.append(item)
            used += u
        return (("seq", tuple(items)) if len(items) > 1 else items[0]), used
    if r < 0.6:
        a, ua = _rand_path(rng, max(1, (budget - 1) // 2))
        b, ub = _rand_path(rng, max(1, budget - 1 - ua))
        return ("alt", (a, b)), 1 + ua + ub
    if r < 0.85:
        sub, u = _rand_path(rng, budget - 1)
        lo, hi = rng.choice([(0, None), (1, None), (0, 1), (2, None), (1, 2), (2, 3), (2, 2)])
        return ("rep", sub, lo, hi), u + 1
    sub, u = _rand_path(rng, budget - 1)
    return ("look", rng.random() < 0.6, sub), u + 1


def random_graph(rng: random.Random, max_tokens: int = 8):
    n = rng.randint(1, max_tokens)
    words = [rng.choice(WORDS) for _ in range(n)]
    edges = set()
    for _ in range(rng.randint(0, 2 * n)):
        s, d = rng.randrange(n), rng.randrange(n)
        edges.add((s, d, rng.choice(RELS)))
    return words, sorted(edges)


# --- argument expansion ----------------------------------------------------

def expected_expansions(config: list[tuple[str, int, int]]) -> int:
    """Closed-form count for ``(kind, n, k)`` argument configurations.

    Required arguments without candidates are handled by the caller; here an
    empty required argument contributes a zero factor.
    """
    total = 1
    for kind, n, k in config:
        if kind == "one":
            total *= n
        elif kind == "optional":
            total *= n + (1 if n == 0 else 0)
        elif kind == "one_or_more":
            total *= 1 if n >= 1 else 0
        elif kind == "zero_or_more":
            total *= 1
        else:
            total *= math.comb(n, k)
    return total
