"""WER alignment counts, relative reduction, exact-match accuracy."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from biasdec import ta, wer, werr
from biasdec.errors import BaseZero, EmptyCorpus
from biasdec.metrics import (
    EditCounts,
    corpus_report,
    edit_counts,
    format_csv,
    format_kv,
)


def oracle_distance(ref, hyp):
    """Independent two-row Levenshtein distance."""
    prev = list(range(len(hyp) + 1))
    for i, r in enumerate(ref, start=1):
        cur = [i]
        for j, h in enumerate(hyp, start=1):
            cur.append(min(prev[j - 1] + (r != h), prev[j] + 1, cur[j - 1] + 1))
        prev = cur
    return prev[-1]


class TestWer:
    def test_identical(self):
        rate, counts = wer("take the book", "take the book")
        assert rate == 0.0
        assert counts.errors == 0

    def test_single_substitution(self):
        rate, counts = wer("bring me the red book", "bring me the read book")
        assert rate == pytest.approx(0.2)
        assert (counts.substitutions, counts.insertions, counts.deletions) == (
            1, 0, 0)

    def test_full_deletion(self):
        rate, counts = wer("move", "")
        assert rate == 1.0
        assert counts.deletions == 1

    def test_case_and_whitespace_normalized(self):
        rate, _ = wer("Take  the BOOK", "take the book")
        assert rate == 0.0

    def test_empty_reference_warns(self):
        with pytest.warns(UserWarning):
            rate, counts = wer("", "one two")
        assert rate == 2.0
        assert counts.insertions == 2

    def test_identity_is_zero_for_any_text(self):
        for text in ("", "a", "a b c d"):
            if text:
                assert wer(text, text)[0] == 0.0

    @given(
        st.lists(st.sampled_from("abcde"), max_size=8),
        st.lists(st.sampled_from("abcde"), max_size=8),
    )
    def test_counts_sum_to_levenshtein(self, ref, hyp):
        counts = edit_counts(ref, hyp)
        assert counts.errors == oracle_distance(ref, hyp)

    def test_random_pairs_match_oracle(self):
        rng = np.random.default_rng(1234)
        vocab = ["red", "book", "take", "the", "on", "move", "box"]
        for _ in range(500):
            ref = [vocab[i] for i in rng.integers(len(vocab),
                                                  size=rng.integers(0, 10))]
            hyp = [vocab[i] for i in rng.integers(len(vocab),
                                                  size=rng.integers(0, 10))]
            assert edit_counts(ref, hyp).errors == oracle_distance(ref, hyp)

    def test_upper_bound(self):
        rate, _ = wer("a b", "c d e f")
        assert rate <= max(2, 4) / 2


class TestWerr:
    def test_headline_reduction(self):
        assert werr(20.83, 8.48) == pytest.approx(59.28, abs=0.01)

    def test_lm_reduction(self):
        assert werr(20.83, 18.29) == pytest.approx(12.19, abs=0.01)

    def test_equal_inputs(self):
        assert werr(5.0, 5.0) == 0.0

    def test_zero_base_rejected(self):
        with pytest.raises(BaseZero):
            werr(0.0, 1.0)

    def test_negative_when_worse(self):
        assert werr(10.0, 13.0) == pytest.approx(-30.0)


class TestTa:
    def test_all_match(self):
        assert ta([("a b", "a b"), ("c", "c")]) == 100.0

    def test_none_match(self):
        assert ta([("a", "b"), ("c", "d")]) == 0.0

    def test_half_match(self):
        pairs = [("a", "a"), ("b", "b"), ("c", "x"), ("d", "y")]
        assert ta(pairs) == 50.0

    def test_whitespace_normalized(self):
        assert ta([("a  b", "a b")]) == 100.0

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            ta([])


class TestReports:
    def test_corpus_aggregation(self):
        pairs = [("a b", "a b"), ("c d", "c x")]
        report = corpus_report(pairs)
        assert report.wer == pytest.approx(0.25)
        assert report.ta == 50.0
        assert report.counts == EditCounts(1, 0, 0, 4)

    def test_csv_fixed_header(self):
        rep = corpus_report([("a", "a")])
        text = format_csv({"base": rep})
        lines = text.strip().split("\n")
        assert lines[0] == "model,wer,werr,ta"
        assert lines[1].startswith("base,0.000000,,100.0000")

    def test_csv_with_werr(self):
        base = corpus_report([("a b c d", "a b x y")])
        full = corpus_report([("a b c d", "a b c y")], base_wer=base.wer)
        text = format_csv({"base": base, "full": full})
        assert ",50.0000," in text

    def test_kv_format(self):
        rep = corpus_report([("a", "b")])
        text = format_kv({"full": rep})
        assert "model=full" in text
        assert "wer=1.000000" in text
        assert "counts=S:1,I:0,D:0,N:1" in text
