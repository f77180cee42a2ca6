"""Character-level prefix tree over the biasing vocabulary.

Each node carries the minimum edge count to a terminal node, which the
decoder's lookahead pruning turns into its "nodes to leaf" statistic.
Tries are immutable after construction; context updates build a fresh one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import EmptyWord

INF = math.inf


class TrieNode:
    __slots__ = ("children", "terminal", "min_to_leaf")

    def __init__(self):
        self.children: dict[str, TrieNode] = {}
        self.terminal = False
        self.min_to_leaf: float = INF

    def __eq__(self, other):
        if not isinstance(other, TrieNode):
            return NotImplemented
        return (
            self.terminal == other.terminal
            and self.min_to_leaf == other.min_to_leaf
            and self.children == other.children
        )


@dataclass(frozen=True)
class TrieCursor:
    """Position reached while matching the current partial word.

    A failed match is the absorbing dead state (``node is None``).
    """

    node: TrieNode | None
    depth: int = 0

    @property
    def alive(self) -> bool:
        return self.node is not None


DEAD_CURSOR = TrieCursor(node=None, depth=0)


@dataclass(frozen=True)
class BiasTrie:
    root: TrieNode
    word_count: int
    words: frozenset[str] = field(repr=False)

    def start(self) -> TrieCursor:
        return TrieCursor(self.root, 0)

    def advance(self, cursor: TrieCursor, ch: str) -> TrieCursor:
        """Follow one character edge; any mismatch is absorbing."""
        if cursor.node is None:
            return DEAD_CURSOR
        child = cursor.node.children.get(ch.lower())
        if child is None:
            return DEAD_CURSOR
        return TrieCursor(child, cursor.depth + 1)

    def stats(self, cursor: TrieCursor) -> tuple[int, float, bool]:
        """(traversed nodes, min nodes to leaf, complete-word flag)."""
        if cursor.node is None:
            return 0, INF, False
        return cursor.depth, cursor.node.min_to_leaf, cursor.node.terminal

    def contains_word(self, word: str) -> bool:
        return word.lower() in self.words

    def node_count(self) -> int:
        """Number of nodes below the root."""
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            for child in node.children.values():
                count += 1
                stack.append(child)
        return count


def build_trie(words) -> BiasTrie:
    """Compile a biasing vocabulary into a trie.

    Multi-word phrases are split into their constituent words; matching is
    case-insensitive via lowercase normalization here and in advance().
    """
    root = TrieNode()
    inserted: set[str] = set()
    for raw in words:
        for word in raw.lower().split():
            if not word:
                continue
            inserted.add(word)
            node = root
            for ch in word:
                node = node.children.setdefault(ch, TrieNode())
            node.terminal = True
        if not raw.strip():
            raise EmptyWord(f"blank biasing entry {raw!r}")
    _compute_min_to_leaf(root)
    return BiasTrie(root=root, word_count=len(inserted), words=frozenset(inserted))


def _compute_min_to_leaf(root: TrieNode) -> None:
    # post-order: terminal nodes are their own nearest leaf
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if not expanded:
            stack.append((node, True))
            for child in node.children.values():
                stack.append((child, False))
        else:
            if node.terminal:
                node.min_to_leaf = 0
            else:
                node.min_to_leaf = min(
                    (child.min_to_leaf + 1 for child in node.children.values()),
                    default=INF,
                )
