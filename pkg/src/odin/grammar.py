"""Grammar loading: rules, priorities, taxonomy, variables and imports.

A master file is either a bare list of rules or a map with a required
``rules`` list and optional ``taxonomy`` and ``vars`` sections. Entries of a
rules list are rules or ``import`` directives (with optional ``vars``).
Variables are substituted textually in the ``pattern``, ``label`` and ``unit``
fields; import-site vars beat master vars, which beat the imported file's own.
"""

from __future__ import annotations

import posixpath
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, Callable, Mapping, Union

import yaml

from .dep_pattern import DependencyPattern, parse_dep_pattern
from .errors import (
    GrammarError,
    PatternSyntaxError,
    PrioritySyntaxError,
    TaxonomyError,
    UnknownLabelError,
    UnresolvedVariableError,
)
from .taxonomy import Taxonomy, expand_labels
from .token_pattern import TokenPattern, match_to_mentions, referenced_labels

if TYPE_CHECKING:
    from .document import Document, Sentence
    from .mentions import Mention
    from .state import State

RULE_KEYS = {"name", "label", "priority", "action", "keep", "type", "unit", "pattern", "example"}
RULE_TYPES = ("token", "dependency")
UNITS = ("word", "tag")
_VAR_RE = re.compile(r"\$\{([^}]*)\}")
_VAR_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

FileResolver = Callable[[str], str]


# --- priorities ------------------------------------------------------------

@dataclass(frozen=True)
class Exact:
    n: int

    def admits(self, iteration: int) -> bool:
        return iteration == self.n

    @property
    def bound(self) -> int:
        return self.n

    def __str__(self) -> str:
        return str(self.n)


@dataclass(frozen=True)
class Range:
    lo: int
    hi: int

    def admits(self, iteration: int) -> bool:
        return self.lo <= iteration <= self.hi

    @property
    def bound(self) -> int:
        return self.hi

    def __str__(self) -> str:
        return f"{self.lo}-{self.hi}"


@dataclass(frozen=True)
class OpenRange:
    lo: int

    def admits(self, iteration: int) -> bool:
        return iteration >= self.lo

    @property
    def bound(self) -> int:
        return self.lo

    def __str__(self) -> str:
        return f"{self.lo}+"


@dataclass(frozen=True)
class PriorityList:
    values: tuple[int, ...]

    def admits(self, iteration: int) -> bool:
        return iteration in self.values

    @property
    def bound(self) -> int:
        return max(self.values)

    def __str__(self) -> str:
        return "[" + ", ".join(map(str, self.values)) + "]"


Priority = Union[Exact, Range, OpenRange, PriorityList]
DEFAULT_PRIORITY = OpenRange(1)


def parse_priority(value: Any) -> Priority:
    """Parse ``3``, ``"2-5"``, ``"2+"``, ``"[1, 3, 5]"`` (or a YAML list); None gives ``1+``."""
    if value is None:
        return DEFAULT_PRIORITY
    if isinstance(value, bool):
        raise PrioritySyntaxError(f"invalid priority {value!r}")
    if isinstance(value, int):
        return Exact(_positive(value, value))
    if isinstance(value, list):
        if not value:
            raise PrioritySyntaxError("empty priority list")
        nums = []
        for v in value:
            if isinstance(v, bool) or not isinstance(v, (int, str)) or not str(v).strip().isdigit():
                raise PrioritySyntaxError(f"invalid priority list {value!r}")
            nums.append(_positive(int(v), value))
        return PriorityList(tuple(nums))
    if not isinstance(value, str):
        raise PrioritySyntaxError(f"invalid priority {value!r}")
    text = value.strip()
    if m := re.fullmatch(r"\d+", text):
        return Exact(_positive(int(text), value))
    if m := re.fullmatch(r"(\d+)\s*-\s*(\d+)", text):
        lo, hi = _positive(int(m.group(1)), value), _positive(int(m.group(2)), value)
        if lo > hi:
            raise PrioritySyntaxError(f"inverted priority range {value!r}")
        return Range(lo, hi)
    if m := re.fullmatch(r"(\d+)\s*\+", text):
        return OpenRange(_positive(int(m.group(1)), value))
    if m := re.fullmatch(r"\[(.*)\]", text, re.S):
        items = [p.strip() for p in m.group(1).split(",")]
        if not items or items == [""] or not all(p.isdigit() for p in items):
            raise PrioritySyntaxError(f"invalid priority list {value!r}")
        return PriorityList(tuple(_positive(int(p), value) for p in items))
    raise PrioritySyntaxError(f"invalid priority {value!r}")


def _positive(n: int, original: Any) -> int:
    if n < 1:
        raise PrioritySyntaxError(f"priorities start at 1, got {original!r}")
    return n


# --- variables -------------------------------------------------------------

def substitute_vars(text: str, bindings: Mapping[str, str]) -> str:
    """Replace every ``${name}`` in one pass; substituted text is not re-expanded."""
    missing = [name for name in _VAR_RE.findall(text) if name not in bindings]
    if missing:
        raise UnresolvedVariableError(list(dict.fromkeys(missing)))
    return _VAR_RE.sub(lambda m: bindings[m.group(1)], text)


def resolve_bindings(file_vars: Mapping[str, str] | None, master_vars: Mapping[str, str] | None,
                     import_vars: Mapping[str, str] | None) -> dict[str, str]:
    return {**(file_vars or {}), **(master_vars or {}), **(import_vars or {})}


# --- rules -----------------------------------------------------------------

@dataclass(frozen=True)
class Rule:
    name: str
    labels: tuple[str, ...]
    pattern: str
    matcher: TokenPattern | DependencyPattern = field(repr=False, compare=False)
    priority: Priority = DEFAULT_PRIORITY
    action: str = "default"
    keep: bool = True
    type: str = "dependency"
    unit: str = "word"
    source: str = ""

    @property
    def uses_state(self) -> bool:
        return self.type == "dependency" or self.matcher.uses_state

    def apply(self, sentence: "Sentence", sentence_index: int, state: "State",
              document: "Document | None" = None) -> list["Mention"]:
        """Match this rule's pattern against one sentence."""
        if self.type == "token":
            out = []
            for m in self.matcher.find_all(sentence, state, sentence_index):
                out.extend(match_to_mentions(m, self, sentence_index, document))
            return out
        return self.matcher.match(self, sentence, sentence_index, state, state.taxonomy, document)


@dataclass(frozen=True)
class Grammar:
    rules: tuple[Rule, ...]
    taxonomy: Taxonomy | None = None

    def __len__(self) -> int:
        return len(self.rules)

    def rule(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def max_priority_bound(self) -> int:
        return max((r.priority.bound for r in self.rules), default=1)


# --- loading ---------------------------------------------------------------

class _GrammarYamlLoader(yaml.SafeLoader):
    """Safe loader that refuses anchors and aliases."""

    def compose_node(self, parent, index):
        event = self.peek_event()
        if isinstance(event, yaml.AliasEvent) or getattr(event, "anchor", None):
            raise GrammarError(f"YAML anchors and aliases are not supported (line {event.start_mark.line + 1})")
        return super().compose_node(parent, index)


def _read_yaml(text: str, path: str) -> Any:
    try:
        return yaml.load(text, Loader=_GrammarYamlLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise GrammarError(f"invalid YAML: {exc.problem}{where}", path=path or None) from None
    except yaml.YAMLError as exc:
        raise GrammarError(f"invalid YAML: {exc}", path=path or None) from None


def _filesystem_resolver(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def load_grammar(source: str, file_resolver: FileResolver | None = None, path: str = "") -> Grammar:
    """Load and compile a grammar from master-file text.

    ``file_resolver`` maps import and taxonomy paths (relative paths are
    joined to the importing file's directory) to file contents; it defaults
    to reading the filesystem.
    """
    return _Loader(file_resolver or _filesystem_resolver).load_master(source, path)


def load_grammar_file(path: str | Path) -> Grammar:
    path = str(path)
    return load_grammar(_filesystem_resolver(path), _filesystem_resolver, path)


def _scalar(value: Any, what: str, rule: str | None, path: str) -> str:
    if isinstance(value, (str, int, float)) and not isinstance(value, bool):
        return str(value)
    raise GrammarError(f"{what} must be a string, got {value!r}", rule=rule, path=path or None)


class _Loader:
    def __init__(self, resolver: FileResolver):
        self.resolver = resolver
        self.rules: list[Rule] = []
        self.sites: dict[str, tuple[str, int]] = {}
        self.taxonomy: Taxonomy | None = None
        self.stack: list[str] = []

    def load_master(self, text: str, path: str) -> Grammar:
        data = _read_yaml(text, path)
        self.stack.append(path)
        if isinstance(data, list):
            self._load_rule_list(data, {}, path)
        elif isinstance(data, dict):
            unknown = set(data) - {"rules", "taxonomy", "vars"}
            if unknown:
                raise GrammarError(f"unknown top-level key(s): {', '.join(sorted(map(str, unknown)))}",
                                   path=path or None)
            if "rules" not in data:
                raise GrammarError("master file needs a 'rules' section", path=path or None)
            if data.get("taxonomy") is not None:
                self.taxonomy = self._load_taxonomy(data["taxonomy"], path)
            master_vars = self._vars(data.get("vars"), path)
            self._load_rule_list(data["rules"] if data["rules"] is not None else [], master_vars, path)
        else:
            raise GrammarError("a grammar must be a list of rules or a map with a 'rules' section",
                               path=path or None)
        return Grammar(tuple(self.rules), self.taxonomy)

    def _resolve_path(self, current: str, target: str) -> str:
        if posixpath.isabs(target) or not current:
            return posixpath.normpath(target)
        return posixpath.normpath(posixpath.join(posixpath.dirname(current), target))

    def _read(self, path: str, importer: str) -> str:
        try:
            return self.resolver(path)
        except (OSError, KeyError) as exc:
            raise GrammarError(f"cannot read {path!r}: {exc}", path=importer or None) from None

    def _load_taxonomy(self, value: Any, path: str) -> Taxonomy:
        if isinstance(value, str):
            tpath = self._resolve_path(path, value)
            text = self._read(tpath, path)
            if "${" in text:
                raise GrammarError("variables are not allowed in taxonomy files", path=tpath)
            value = _read_yaml(text, tpath)
            path = tpath
        try:
            return Taxonomy.from_data(value)
        except TaxonomyError as exc:
            raise TaxonomyError(str(exc), path=path or None) from None

    def _vars(self, value: Any, path: str) -> dict[str, str]:
        if value is None:
            return {}
        if not isinstance(value, dict):
            raise GrammarError("'vars' must be a map", path=path or None)
        out = {}
        for k, v in value.items():
            if not isinstance(k, str) or not _VAR_NAME_RE.match(k):
                raise GrammarError(f"invalid variable name {k!r}", path=path or None)
            out[k] = _scalar(v, f"variable {k!r}", None, path)
        return out

    def _load_rule_list(self, items: Any, bindings: dict[str, str], path: str) -> None:
        if not isinstance(items, list):
            raise GrammarError("'rules' must be a list", path=path or None)
        for index, item in enumerate(items):
            if not isinstance(item, dict):
                raise GrammarError(f"rule #{index + 1} must be a map", path=path or None)
            if "import" in item:
                self._import(item, bindings, path)
            else:
                self._add_rule(item, bindings, path, index)

    def _import(self, item: dict, bindings: dict[str, str], path: str) -> None:
        unknown = set(item) - {"import", "vars"}
        if unknown:
            raise GrammarError(f"unknown import key(s): {', '.join(sorted(map(str, unknown)))}", path=path or None)
        target = self._resolve_path(path, _scalar(item["import"], "import path", None, path))
        if target in self.stack:
            visited = self.stack[1:] if self.stack[0] == "" else self.stack
            chain = " -> ".join([*visited, target])
            raise GrammarError(f"import cycle: {chain}", path=path or None)
        context = {**bindings, **self._vars(item.get("vars"), path)}
        data = _read_yaml(self._read(target, path), target)
        self.stack.append(target)
        if isinstance(data, list):
            self._load_rule_list(data, context, target)
        elif isinstance(data, dict):
            if "taxonomy" in data:
                raise GrammarError("a taxonomy may only be declared in the master file", path=target)
            unknown = set(data) - {"rules", "vars"}
            if unknown:
                raise GrammarError(f"unknown top-level key(s): {', '.join(sorted(map(str, unknown)))}", path=target)
            own = self._vars(data.get("vars"), target)
            self._load_rule_list(data.get("rules") or [], resolve_bindings(own, context, None), target)
        else:
            raise GrammarError("an imported file must be a list of rules or a map with 'rules'", path=target)
        self.stack.pop()

    def _add_rule(self, data: dict, bindings: dict[str, str], path: str, index: int) -> None:
        name = data.get("name")
        if name is None:
            raise GrammarError(f"rule #{index + 1} has no name", path=path or None)
        name = _scalar(name, "name", None, path)
        unknown = set(data) - RULE_KEYS
        if unknown:
            raise GrammarError(f"unknown field(s): {', '.join(sorted(map(str, unknown)))}", rule=name,
                               path=path or None)
        site = (path, index)
        if name in self.sites and self.sites[name] != site:
            raise GrammarError(f"duplicate rule name {name!r}", rule=name, path=path or None)
        self.sites[name] = site

        def subst(text: str) -> str:
            try:
                return substitute_vars(text, bindings)
            except UnresolvedVariableError as exc:
                raise UnresolvedVariableError(exc.names, rule=name, path=path or None) from None

        for required in ("label", "pattern"):
            if data.get(required) is None:
                raise GrammarError(f"missing required field {required!r}", rule=name, path=path or None)
        raw_labels = data["label"] if isinstance(data["label"], list) else [data["label"]]
        labels = [subst(_scalar(lb, "label", name, path)) for lb in raw_labels]
        if not labels or not all(labels):
            raise GrammarError("labels must be non-empty", rule=name, path=path or None)
        pattern = subst(_scalar(data["pattern"], "pattern", name, path))
        unit = subst(_scalar(data.get("unit", "word"), "unit", name, path))
        if unit not in UNITS:
            raise GrammarError(f"unit must be 'word' or 'tag', got {unit!r}", rule=name, path=path or None)
        rtype = _scalar(data.get("type", "dependency"), "type", name, path)
        if rtype not in RULE_TYPES:
            raise GrammarError(f"type must be 'token' or 'dependency', got {rtype!r}", rule=name,
                               path=path or None)
        action = _scalar(data.get("action", "default"), "action", name, path)
        keep = data.get("keep", True)
        if not isinstance(keep, bool):
            raise GrammarError(f"keep must be true or false, got {keep!r}", rule=name, path=path or None)
        try:
            priority = parse_priority(data.get("priority"))
        except PrioritySyntaxError as exc:
            raise PrioritySyntaxError(str(exc), rule=name, path=path or None) from None

        try:
            if rtype == "token":
                matcher: TokenPattern | DependencyPattern = TokenPattern(pattern, unit)
                referenced = referenced_labels(matcher.ast)
            else:
                matcher = parse_dep_pattern(pattern, unit)
                referenced = matcher.referenced_labels()
        except PatternSyntaxError as exc:
            raise exc.for_rule(name, path or None) from None

        tax = self.taxonomy
        if tax is not None:
            for label in [*labels, *referenced]:
                if label not in tax:
                    raise UnknownLabelError(label, rule=name, path=path or None)
        self.rules.append(Rule(
            name=name,
            labels=tuple(expand_labels(labels, tax)),
            pattern=pattern,
            matcher=matcher,
            priority=priority,
            action=action,
            keep=keep,
            type=rtype,
            unit=unit,
            source=path,
        ))
