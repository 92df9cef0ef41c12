"""Random annotated documents and layered grammars for the property and throughput checks."""

from __future__ import annotations

import random

from odin import Document, make_sentence

NOUNS = ("cell", "gene", "dog", "city", "river", "plan", "drug", "team")
VERBS = ("bind", "eat", "see", "fund", "move", "block", "meet", "cut")
NAMES = ("Ada", "Bo", "Cy", "Di", "Ed", "Flo")
ORGS = ("Acme", "Initech", "Hooli")
RELATIONS = ("nsubj", "dobj", "prep_of", "conj_and", "amod")


def random_sentence(rng: random.Random, n_tokens: int):
    words, lemmas, tags, entities = [], [], [], []
    for _ in range(n_tokens):
        kind = rng.random()
        if kind < 0.2:
            w = rng.choice(NAMES)
            words.append(w), lemmas.append(w), tags.append("NNP"), entities.append("PERSON")
        elif kind < 0.3:
            w = rng.choice(ORGS)
            words.append(w), lemmas.append(w), tags.append("NNP"), entities.append("ORG")
        elif kind < 0.55:
            w = rng.choice(VERBS)
            words.append(w + "s"), lemmas.append(w), tags.append("VBZ"), entities.append("O")
        elif kind < 0.85:
            w = rng.choice(NOUNS)
            words.append(w), lemmas.append(w), tags.append("NN"), entities.append("O")
        else:
            words.append("the"), lemmas.append("the"), tags.append("DT"), entities.append("O")
    edges = set()
    for t in range(1, n_tokens):
        edges.add((rng.randrange(t), t, rng.choice(RELATIONS)))
    for _ in range(n_tokens // 4):
        a, b = rng.randrange(n_tokens), rng.randrange(n_tokens)
        if a != b:
            edges.add((a, b, rng.choice(RELATIONS)))
    return make_sentence(words, lemmas=lemmas, tags=tags, entities=entities, edges=edges, roots=[0])


def random_document(rng: random.Random, n_sentences: int, min_tokens: int = 5, max_tokens: int = 12,
                    doc_id: str = "synthetic") -> Document:
    sentences = [random_sentence(rng, rng.randint(min_tokens, max_tokens)) for _ in range(n_sentences)]
    return Document(doc_id, tuple(sentences))


def _rule(name: str, label: str, pattern: str, priority: str | None = None, rtype: str = "dependency") -> str:
    lines = [f"- name: {name}", f"  label: {label}", f"  type: {rtype}"]
    if priority is not None:
        lines.append(f"  priority: {priority!r}")
    lines.append("  pattern: |")
    lines.extend("    " + line for line in pattern.strip().splitlines())
    return "\n".join(lines) + "\n"


def _path(rng: random.Random) -> str:
    return rng.choice([">>", "<<", ">> >>?", "nsubj", "dobj | prep_of", "<< >>", ">>{1,2}", "(>> | <<) [tag=/^N/]"])


def _quant(rng: random.Random) -> str:
    return rng.choice(["", "", "?", "+", "*"])


def layered_grammar(rng: random.Random, stages: int) -> str:
    """A grammar whose stage k+1 rules consume labels produced at stage k."""
    assert stages in (2, 3)
    prio = rng.choice([None, "1+", None])
    parts = [
        _rule("people", "Person", "[entity=PERSON]+", prio, "token"),
        _rule("orgs", "Org", "[entity=ORG]", prio, "token"),
        _rule("things", "Thing", "[tag=NN]", rng.choice([None, "1", "1-2"]), "token"),
    ]
    verb = rng.choice(VERBS)
    parts.append(_rule("act", "Action", f"""
trigger = [lemma={verb}] | [tag=VBZ & !lemma={rng.choice(VERBS)}]
agent:Person{_quant(rng)} = {_path(rng)}
patient:Thing{rng.choice(["?", "*", ""])} = {_path(rng)}
""", rng.choice([None, "2+", None])))
    parts.append(_rule("pair", "Pair", "@a:Person [tag=VBZ] @b:/Org|Thing/", None, "token"))
    if stages == 3:
        parts.append(_rule("meta", "Meta", f"""
trigger = [tag=VBZ]
inner:Action{rng.choice(["", "+"])} = {_path(rng)}
""", rng.choice([None, "3+"])))
        parts.append(_rule("link", "Link", f"""
first:Pair
second:Action = {_path(rng)}
"""))
    return "".join(parts)


def throughput_grammar(n_rules: int = 200) -> str:
    """Many small rules of the kinds a domain grammar tends to contain."""
    parts = [
        _rule("people", "Person", "[entity=PERSON]+", "1", "token"),
        _rule("orgs", "Org", "[entity=ORG]", "1", "token"),
    ]
    i = 0
    while len(parts) < n_rules:
        noun, verb = NOUNS[i % len(NOUNS)], VERBS[(i // len(NOUNS)) % len(VERBS)]
        kind = i % 4
        if kind == 0:
            parts.append(_rule(f"np{i}", f"NP{i % 16}", f"[tag=DT]? [lemma={noun}] ([tag=NN])*", "1", "token"))
        elif kind == 1:
            parts.append(_rule(f"ev{i}", f"Event{i % 16}", f"""
trigger = [lemma={verb}]
agent:Person = nsubj | <<
theme:NP{(i - 1) % 16}? = dobj | prep_of
""", "2"))
        elif kind == 2:
            parts.append(_rule(f"rel{i}", f"Rel{i % 16}", f"@a:Person [lemma={verb}] [tag=DT]? @b:/NP|Org/", "2",
                               "token"))
        else:
            parts.append(_rule(f"nest{i}", f"Nest{i % 16}", f"""
trigger = [lemma={verb}]
inner:Event{(i - 2) % 16}+ = >> | <<
""", "3"))
        i += 1
    return "".join(parts)
