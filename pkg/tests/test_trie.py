"""Prefix trie construction, traversal and lookahead statistics."""

import math

import pytest
from hypothesis import given, strategies as st

from biasdec import build_trie
from biasdec.errors import EmptyWord

INF = math.inf

words_strategy = st.lists(
    st.text(alphabet="abcdef", min_size=1, max_size=6), min_size=0, max_size=8
)


class TestBuild:
    def test_two_words(self):
        trie = build_trie(["book", "red"])
        assert trie.node_count() == 7
        assert trie.word_count == 2

    def test_empty_vocabulary(self):
        trie = build_trie([])
        cursor = trie.advance(trie.start(), "a")
        assert not cursor.alive
        assert trie.stats(trie.start()) == (0, INF, False)

    def test_prefix_word_is_terminal(self):
        trie = build_trie(["book", "books"])
        cursor = trie.start()
        for ch in "book":
            cursor = trie.advance(cursor, ch)
        tn, nl, complete = trie.stats(cursor)
        assert (tn, nl, complete) == (4, 0, True)

    def test_blank_entry_rejected(self):
        with pytest.raises(EmptyWord):
            build_trie(["book", "   "])

    def test_phrases_split_into_words(self):
        trie = build_trie(["red book"])
        assert trie.word_count == 2
        assert trie.contains_word("red")
        assert trie.contains_word("book")

    def test_duplicates_collapse(self):
        trie = build_trie(["red", "red", "Red"])
        assert trie.word_count == 1

    @given(words_strategy)
    def test_insertion_order_invariant(self, words):
        trie_a = build_trie(words)
        trie_b = build_trie(list(reversed(words)))
        assert trie_a.root == trie_b.root
        assert trie_a.word_count == trie_b.word_count


class TestAdvance:
    def test_live_edge(self):
        trie = build_trie(["book"])
        cursor = trie.advance(trie.start(), "b")
        assert cursor.alive
        assert cursor.depth == 1

    def test_missing_edge_is_dead(self):
        trie = build_trie(["book"])
        assert not trie.advance(trie.start(), "z").alive

    def test_dead_state_absorbs(self):
        trie = build_trie(["book"])
        dead = trie.advance(trie.start(), "z")
        for ch in "book":
            dead = trie.advance(dead, ch)
            assert not dead.alive

    def test_case_insensitive(self):
        trie = build_trie(["Book"])
        cursor = trie.start()
        for ch in "BOOK":
            cursor = trie.advance(cursor, ch)
        assert trie.stats(cursor)[2]


class TestStats:
    def test_partial_path(self):
        trie = build_trie(["book", "red"])
        cursor = trie.start()
        for ch in "bo":
            cursor = trie.advance(cursor, ch)
        assert trie.stats(cursor) == (2, 2, False)

    def test_complete_word(self):
        trie = build_trie(["book", "red"])
        cursor = trie.start()
        for ch in "red":
            cursor = trie.advance(cursor, ch)
        assert trie.stats(cursor) == (3, 0, True)

    def test_dead_cursor(self):
        trie = build_trie(["book"])
        dead = trie.advance(trie.start(), "q")
        assert trie.stats(dead) == (0, INF, False)

    @given(words_strategy.filter(lambda ws: len(ws) > 0))
    def test_depth_plus_leaf_bounds_shortest_completion(self, words):
        """tn + nl equals the length of the shortest word extending the prefix."""
        trie = build_trie(words)
        vocab = {w.lower() for w in words}
        for word in vocab:
            cursor = trie.start()
            for i, ch in enumerate(word, start=1):
                cursor = trie.advance(cursor, ch)
                tn, nl, _ = trie.stats(cursor)
                assert tn == i
                shortest = min(
                    len(w) for w in vocab if w.startswith(word[:i])
                )
                assert tn + nl == shortest

    @given(words_strategy.filter(lambda ws: len(ws) > 0))
    def test_full_walk_ends_complete(self, words):
        trie = build_trie(words)
        for word in words:
            cursor = trie.start()
            for ch in word.lower():
                cursor = trie.advance(cursor, ch)
            assert trie.stats(cursor)[2]

    def test_min_to_leaf_parent_child_inequality(self):
        trie = build_trie(["book", "books", "bot", "red"])
        stack = [trie.root]
        while stack:
            node = stack.pop()
            for child in node.children.values():
                assert node.min_to_leaf <= child.min_to_leaf + 1
                stack.append(child)
            if node.terminal:
                assert node.min_to_leaf == 0


class TestContains:
    def test_member(self):
        trie = build_trie(["book", "red"])
        assert trie.contains_word("book")

    def test_prefix_is_not_member(self):
        trie = build_trie(["book", "red"])
        assert not trie.contains_word("boo")

    def test_empty_string(self):
        trie = build_trie(["book"])
        assert not trie.contains_word("")
