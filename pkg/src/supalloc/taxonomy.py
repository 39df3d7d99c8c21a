"""Hierarchical topic taxonomy and path-overlap similarity between topics."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

TopicPath = Tuple[str, ...]


class TaxonomyError(ValueError):
    """Base class for malformed taxonomies."""


class DuplicateTopicError(TaxonomyError):
    pass


class RootError(TaxonomyError):
    """No root, or more than one root."""


class CycleError(TaxonomyError):
    pass


class DanglingParentError(TaxonomyError):
    pass


class UnknownTopicError(KeyError):
    pass


@dataclass(frozen=True)
class TopicTree:
    """A rooted topic tree.

    ``parents`` maps every node to its parent; the root maps to ``None``.
    Paths from the root are precomputed on construction, which also
    validates the tree.
    """

    parents: Mapping[str, Optional[str]]
    root: str = field(init=False)
    _paths: Mapping[str, TopicPath] = field(init=False, repr=False, compare=False)
    _path_sets: Mapping[str, frozenset] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        parents = dict(self.parents)
        roots = [node for node, parent in parents.items() if parent is None]
        if len(roots) != 1:
            raise RootError(f"expected exactly one root, found {len(roots)}: {sorted(roots)}")
        for node, parent in parents.items():
            if parent is not None and parent not in parents:
                raise DanglingParentError(f"node {node!r} references unknown parent {parent!r}")

        paths: dict = {roots[0]: (roots[0],)}
        for start in parents:
            chain = []
            seen = set()
            node = start
            while node not in paths:
                if node in seen:
                    raise CycleError(f"cycle through node {node!r}")
                seen.add(node)
                chain.append(node)
                node = parents[node]
            prefix = paths[node]
            for child in reversed(chain):
                prefix = prefix + (child,)
                paths[child] = prefix

        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "root", roots[0])
        object.__setattr__(self, "_paths", paths)
        object.__setattr__(self, "_path_sets", {k: frozenset(v) for k, v in paths.items()})

    @classmethod
    def from_records(cls, records: Iterable[Tuple[str, Optional[str]]]) -> "TopicTree":
        """Build a tree from ``(node, parent)`` pairs; an empty or None parent marks the root."""
        parents: dict = {}
        for node, parent in records:
            if node in parents:
                raise DuplicateTopicError(f"duplicate topic identifier {node!r}")
            parents[node] = parent or None
        return cls(parents)

    @classmethod
    def from_edges(cls, root: str, edges: Iterable[Tuple[str, str]]) -> "TopicTree":
        """Build a tree from a root and ``(parent, child)`` edges."""
        return cls.from_records([(root, None)] + [(child, parent) for parent, child in edges])

    def __contains__(self, topic: object) -> bool:
        return topic in self._paths

    def __len__(self) -> int:
        return len(self._paths)

    @property
    def nodes(self) -> frozenset:
        return frozenset(self._paths)

    def depth(self, topic: str) -> int:
        """Number of nodes on the root-to-topic path (the root has depth 1)."""
        return len(self.path(topic))

    def path(self, topic: str) -> TopicPath:
        try:
            return self._paths[topic]
        except KeyError:
            raise UnknownTopicError(topic) from None

    def path_set(self, topic: str) -> frozenset:
        try:
            return self._path_sets[topic]
        except KeyError:
            raise UnknownTopicError(topic) from None

    def children(self) -> dict:
        out: dict = {node: [] for node in self._paths}
        for node, parent in self.parents.items():
            if parent is not None:
                out[parent].append(node)
        return out

    def to_records(self) -> list:
        """``(node, parent)`` records, parents before children."""
        order = sorted(self._paths, key=lambda n: (len(self._paths[n]), self._paths[n]))
        return [(node, self.parents[node] or "") for node in order]


def path_to(topic: str, tree: TopicTree) -> TopicPath:
    """Root-to-topic path, both endpoints included."""
    return tree.path(topic)


def topic_similarity(kw_i: str, kw_j: str, tree: TopicTree) -> float:
    """Similarity of ``kw_j`` to ``kw_i``: shared path nodes over the length of ``kw_i``'s path.

    Not symmetric: an ancestor fully matches its descendants from the
    descendant's side only partially.
    """
    pi = tree.path_set(kw_i)
    pj = tree.path_set(kw_j)
    return len(pi & pj) / len(pi)


# -- file format -------------------------------------------------------------

TAXONOMY_HEADER = ("node", "parent")


def load_taxonomy(source: Union[str, Path, io.TextIOBase, Sequence[str]]) -> TopicTree:
    """Read a ``node,parent`` CSV document (root has an empty parent field).

    ``source`` may be a path, an open text stream or a list of lines.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return _parse_taxonomy(fh.read().splitlines(), str(source))
    if isinstance(source, io.TextIOBase):
        return _parse_taxonomy(source.read().splitlines(), "<stream>")
    return _parse_taxonomy(list(source), "<lines>")


def _parse_taxonomy(lines: Sequence[str], origin: str) -> TopicTree:
    records = []
    seen: dict = {}
    for lineno, row in enumerate(csv.reader(lines), start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if lineno == 1 and tuple(c.strip() for c in row) == TAXONOMY_HEADER:
            continue
        if len(row) != 2:
            raise TaxonomyError(f"{origin}:{lineno}: expected 'node,parent', got {row!r}")
        node, parent = row[0].strip(), row[1].strip()
        if not node:
            raise TaxonomyError(f"{origin}:{lineno}: empty node identifier")
        if node in seen:
            raise DuplicateTopicError(
                f"{origin}:{lineno}: duplicate topic {node!r} (first on line {seen[node]})"
            )
        seen[node] = lineno
        records.append((node, parent or None))
    return TopicTree.from_records(records)


def dump_taxonomy(tree: TopicTree, path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TAXONOMY_HEADER)
        writer.writerows(tree.to_records())
