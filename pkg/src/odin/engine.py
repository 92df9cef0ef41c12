"""The extraction loop: iterate the grammar over a document until fixpoint."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from .document import Document
from .errors import ActionError
from .grammar import Grammar, Priority, Rule, load_grammar
from .mentions import Mention
from .state import State, StateView

Action = Callable[[list[Mention], Any], Iterable[Mention]]

DEFAULT_MAX_ITERATIONS = 100


class NonTerminationWarning(UserWarning):
    """The iteration cap was hit while rules were still adding mentions."""


def default_action(mentions: Sequence[Mention], state: Any = None) -> list[Mention]:
    """Identity action: return the input mentions unchanged, in order."""
    return list(mentions)


def priority_admits(priority: Priority, iteration: int) -> bool:
    if iteration < 1:
        raise ValueError("iterations are numbered from 1")
    return priority.admits(iteration)


class ActionRegistry:
    """Named actions; ``default`` is always present and cannot be replaced."""

    def __init__(self, actions: Mapping[str, Action] | None = None):
        self._actions: dict[str, Action] = {"default": default_action}
        for name, fn in (actions or {}).items():
            self.register(name, fn)

    def register(self, name: str, action: Action) -> "ActionRegistry":
        if not isinstance(name, str) or not name:
            raise ActionError("action names must be non-empty strings")
        if name == "default":
            raise ActionError("'default' is reserved for the identity action")
        if name in self._actions:
            raise ActionError(f"action {name!r} is already registered")
        if not callable(action):
            raise ActionError(f"action {name!r} is not callable")
        self._actions[name] = action
        return self

    def __contains__(self, name: object) -> bool:
        return name in self._actions

    def __getitem__(self, name: str) -> Action:
        return self._actions[name]

    def names(self) -> list[str]:
        return list(self._actions)


@dataclass
class RuleTrace:
    rule: str
    action: str
    matches: dict[int, int]  # sentence index -> raw match count
    emitted: int  # mentions returned by the rule's action


@dataclass
class IterationTrace:
    iteration: int
    rules: list[RuleTrace] = field(default_factory=list)
    submitted: int = 0  # mentions handed to the global action
    survived: int = 0  # mentions returned by the global action
    added: int = 0
    deduplicated: int = 0


@dataclass
class ExtractionResult:
    mentions: list[Mention]
    state: State
    iterations: int
    fixpoint: bool
    warnings: list[str] = field(default_factory=list)
    trace: list[IterationTrace] = field(default_factory=list)


class ExtractorEngine:
    """Applies a grammar to documents.

    ``actions`` may be a mapping, an ``ActionRegistry`` or any object whose
    attributes implement the named actions. Every action named by a rule must
    resolve when the engine is built.
    """

    def __init__(
        self,
        grammar: Grammar | str | Sequence[Rule],
        actions: Mapping[str, Action] | ActionRegistry | object | None = None,
        global_action: Action | None = None,
        *,
        max_iterations: int = DEFAULT_MAX_ITERATIONS,
    ):
        if isinstance(grammar, str):
            grammar = load_grammar(grammar)
        elif not isinstance(grammar, Grammar):
            grammar = Grammar(tuple(grammar))
        if not isinstance(max_iterations, int) or max_iterations < 1:
            raise ValueError("max_iterations must be a positive integer")
        self.grammar = grammar
        self.global_action: Action = global_action or default_action
        self.max_iterations = max_iterations
        self.registry = self._build_registry(actions)
        missing = [r for r in grammar.rules if r.action not in self.registry]
        if missing:
            r = missing[0]
            raise ActionError(f"rule {r.name!r} names action {r.action!r}, which is not registered")

    def _build_registry(self, actions: Any) -> ActionRegistry:
        if actions is None:
            return ActionRegistry()
        if isinstance(actions, ActionRegistry):
            return actions
        if isinstance(actions, Mapping):
            return ActionRegistry(actions)
        registry = ActionRegistry()
        for name in dict.fromkeys(r.action for r in self.grammar.rules):
            fn = getattr(actions, name, None)
            if name != "default" and callable(fn):
                registry.register(name, fn)
        return registry

    def register_action(self, name: str, action: Action) -> "ExtractorEngine":
        self.registry.register(name, action)
        return self

    def run(self, doc: Document, trace: bool = False) -> ExtractionResult:
        """Run to fixpoint (or the iteration cap) and report what happened."""
        rules = self.grammar.rules
        state = State(self.grammar.taxonomy, doc)
        view = StateView(state)
        bound = self.grammar.max_priority_bound
        # raw matches per (rule, sentence), valid while the sentence's state version is unchanged
        cache: dict[tuple[int, int], tuple[int, list[Mention]]] = {}
        records: list[IterationTrace] = []
        notes: list[str] = []
        fixpoint = False
        i = 0
        while True:
            i += 1
            record = IterationTrace(i)
            # every rule sees the state as of the start of the iteration
            versions = [state.version(s) for s in range(len(doc.sentences))]
            outputs: list[Mention] = []
            for ri, rule in enumerate(rules):
                if not rule.priority.admits(i):
                    continue
                raw: list[Mention] = []
                per_sentence: dict[int, int] = {}
                for s_idx, sentence in enumerate(doc.sentences):
                    version = versions[s_idx] if rule.uses_state else -1
                    hit = cache.get((ri, s_idx))
                    if hit is not None and hit[0] == version:
                        found = hit[1]
                    else:
                        found = rule.apply(sentence, s_idx, state, doc)
                        cache[ri, s_idx] = (version, found)
                    raw.extend(found)
                    if found:
                        per_sentence[s_idx] = len(found)
                emitted = self._call(self.registry[rule.action], rule.action, raw, view)
                outputs.extend(emitted)
                if trace:
                    record.rules.append(RuleTrace(rule.name, rule.action, per_sentence, len(emitted)))
            survivors = self._call(self.global_action, "global", outputs, view)
            added = sum(1 for m in survivors if state.add(m, i))
            record.submitted, record.survived = len(outputs), len(survivors)
            record.added, record.deduplicated = added, len(survivors) - added
            if trace:
                records.append(record)
            if added == 0 and i >= bound:
                fixpoint = True
                break
            if i >= self.max_iterations:
                if added:
                    notes.append(f"stopped after {i} iterations with new mentions still appearing")
                break
        kept = [m for m in state if m.keep]
        return ExtractionResult(kept, state, i, fixpoint, notes, records)

    @staticmethod
    def _call(action: Action, name: str, mentions: list[Mention], view: StateView) -> list[Mention]:
        out = action(list(mentions), view)
        if out is None:
            raise ActionError(f"action {name!r} returned None instead of a mention sequence")
        out = list(out)
        for m in out:
            if not isinstance(m, Mention):
                raise ActionError(f"action {name!r} returned a non-mention: {m!r}")
        return out

    def extract_from(self, doc: Document) -> list[Mention]:
        """Kept mentions in insertion order; warns if the iteration cap was hit."""
        result = self.run(doc)
        for note in result.warnings:
            warnings.warn(note, NonTerminationWarning, stacklevel=2)
        return result.mentions


def extract_from(engine: ExtractorEngine, doc: Document) -> list[Mention]:
    return engine.extract_from(doc)


def register_action(engine: ExtractorEngine, name: str, action: Action) -> ExtractorEngine:
    return engine.register_action(name, action)
