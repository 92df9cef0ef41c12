"""Document-wide store of the mentions found so far."""

from __future__ import annotations

from collections import defaultdict
from typing import TYPE_CHECKING, Callable, Iterator

from .mentions import Mention
from .taxonomy import Taxonomy, label_matches

if TYPE_CHECKING:
    from .document import Document


class State:
    """Insertion-ordered mention store indexed by token and by label.

    Only the engine adds mentions; actions and patterns get read access.
    """

    def __init__(self, taxonomy: Taxonomy | None = None, document: "Document | None" = None):
        self.taxonomy = taxonomy
        self.document = document
        self._mentions: list[Mention] = []
        self._order: dict[Mention, int] = {}
        self._iteration: dict[Mention, int] = {}
        self._by_token: dict[tuple[int, int], list[Mention]] = defaultdict(list)
        self._by_start: dict[tuple[int, int], list[Mention]] = defaultdict(list)
        self._by_label: dict[str, list[Mention]] = defaultdict(list)
        self._by_sentence: dict[int, list[Mention]] = defaultdict(list)
        self._versions: dict[int, int] = defaultdict(int)

    def add(self, mention: Mention, iteration: int = 0) -> bool:
        """Store ``mention`` unless an equal one is present; report whether it was new."""
        if mention in self._order:
            return False
        self._order[mention] = len(self._mentions)
        self._iteration[mention] = iteration
        self._mentions.append(mention)
        s = mention.sentence
        for tok in mention.token_interval.tokens():
            self._by_token[s, tok].append(mention)
        self._by_start[s, mention.start].append(mention)
        for label in mention.labels:
            self._by_label[label].append(mention)
        self._by_sentence[s].append(mention)
        self._versions[s] += 1
        return True

    def __contains__(self, mention: object) -> bool:
        return mention in self._order

    def __len__(self) -> int:
        return len(self._mentions)

    def __iter__(self) -> Iterator[Mention]:
        return iter(self._mentions)

    def all_mentions(self) -> list[Mention]:
        return list(self._mentions)

    def order_of(self, mention: Mention) -> int:
        return self._order[mention]

    def iteration_of(self, mention: Mention) -> int:
        """Iteration in which ``mention`` (or an equal mention) was first added."""
        return self._iteration[mention]

    def version(self, sentence: int) -> int:
        """Counter bumped whenever a mention is added to ``sentence``."""
        return self._versions[sentence]

    def mentions_in_sentence(self, sentence: int) -> list[Mention]:
        return list(self._by_sentence.get(sentence, ()))

    def mentions_at(self, sentence: int, token: int) -> list[Mention]:
        return self._by_token.get((sentence, token), [])

    def mentions_starting_at(self, sentence: int, token: int) -> list[Mention]:
        return self._by_start.get((sentence, token), [])

    def with_label(self, label: str) -> list[Mention]:
        if self.taxonomy is None:
            return list(self._by_label.get(label, ()))
        return [m for m in self._mentions if label_matches(m.labels, label, self.taxonomy)]

    def labels_of(self, mention: Mention) -> list[str]:
        """Labels of ``mention`` closed under taxonomy ancestry."""
        labels = list(mention.labels)
        tax = self.taxonomy
        if tax is not None and labels[0] in tax:
            for label in tax.hierarchy(labels[0]):
                if label not in labels:
                    labels.append(label)
        return labels

    def lookup(self, sentence: int, token: int, query: str | Callable[[str], bool]) -> list[Mention]:
        """Mentions covering ``token`` whose labels satisfy ``query``.

        ``query`` is either a label (matched with taxonomy subsumption) or a
        predicate applied to each of the mention's labels.
        """
        found = self._by_token.get((sentence, token), ())
        if isinstance(query, str):
            return [m for m in found if label_matches(m.labels, query, self.taxonomy)]
        return [m for m in found if any(query(label) for label in self.labels_of(m))]


def state_lookup(state: State, sentence: int, token: int, query: str,
                 taxonomy: Taxonomy | None = None) -> list[Mention]:
    if taxonomy is None or taxonomy is state.taxonomy:
        return state.lookup(sentence, token, query)
    return [m for m in state.mentions_at(sentence, token) if label_matches(m.labels, query, taxonomy)]


class StateView:
    """Read-only view of a State, handed to actions."""

    __slots__ = ("_state",)

    def __init__(self, state: State):
        object.__setattr__(self, "_state", state)

    def __getattr__(self, name: str):
        if name == "add":
            raise AttributeError("actions get read-only access to the state")
        return getattr(self._state, name)

    def __setattr__(self, name: str, value) -> None:
        raise AttributeError("actions get read-only access to the state")

    def __contains__(self, mention: object) -> bool:
        return mention in self._state

    def __len__(self) -> int:
        return len(self._state)

    def __iter__(self) -> Iterator[Mention]:
        return iter(self._state)
