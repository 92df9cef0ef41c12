"""Label forests used for hyponym/hypernym matching of mention labels."""

from __future__ import annotations

from typing import Any

from .errors import TaxonomyError, UnknownLabelError


class Taxonomy:
    """A forest of labels; each label appears exactly once.

    Built from the nested list/map structure of a grammar's ``taxonomy``
    section, e.g. ``[{"organism": [{"eukaryotic": [...]}]}, "robot"]``.
    """

    def __init__(self, parents: dict[str, str | None]):
        self._parents = dict(parents)

    @classmethod
    def from_data(cls, data: Any) -> "Taxonomy":
        parents: dict[str, str | None] = {}

        def add(label: Any, parent: str | None) -> str:
            if not isinstance(label, str) or not label:
                raise TaxonomyError(f"taxonomy labels must be non-empty strings, got {label!r}")
            if "${" in label:
                raise TaxonomyError(f"variables are not allowed in taxonomy labels: {label!r}")
            if label in parents:
                raise TaxonomyError(f"label {label!r} is declared more than once in the taxonomy")
            parents[label] = parent
            return label

        def walk(nodes: Any, parent: str | None) -> None:
            if not isinstance(nodes, list):
                raise TaxonomyError("taxonomy nodes must be given as a list")
            for node in nodes:
                if isinstance(node, dict):
                    if len(node) != 1:
                        raise TaxonomyError(f"taxonomy node must have exactly one label: {node!r}")
                    (label, children), = node.items()
                    add(label, parent)
                    if children is not None:
                        walk(children, label)
                else:
                    add(node, parent)

        walk(data, None)
        return cls(parents)

    def __contains__(self, label: object) -> bool:
        return label in self._parents

    def __len__(self) -> int:
        return len(self._parents)

    @property
    def labels(self) -> list[str]:
        return list(self._parents)

    def parent(self, label: str) -> str | None:
        self._check(label)
        return self._parents[label]

    def hierarchy(self, label: str) -> list[str]:
        """``[label, parent, grandparent, ..., root]``."""
        self._check(label)
        chain = []
        current: str | None = label
        while current is not None:
            chain.append(current)
            current = self._parents[current]
        return chain

    def is_a(self, label: str, ancestor: str) -> bool:
        return label in self._parents and ancestor in self.hierarchy(label)

    def _check(self, label: str) -> None:
        if label not in self._parents:
            raise UnknownLabelError(label)


def label_hierarchy(taxonomy: Taxonomy, label: str) -> list[str]:
    return taxonomy.hierarchy(label)


def expand_labels(labels: list[str] | tuple[str, ...], taxonomy: Taxonomy | None) -> list[str]:
    """Close a label list under ancestry of its first label.

    Without a taxonomy the list is taken as already expanded.
    """
    if taxonomy is None or not labels or labels[0] not in taxonomy:
        return list(labels)
    out = taxonomy.hierarchy(labels[0])
    for extra in labels[1:]:
        if extra not in out:
            out.append(extra)
    return out


def label_matches(mention_labels, query: str, taxonomy: Taxonomy | None = None) -> bool:
    if query in mention_labels:
        return True
    if taxonomy is not None and mention_labels and mention_labels[0] in taxonomy:
        return query in taxonomy.hierarchy(mention_labels[0])
    return False
