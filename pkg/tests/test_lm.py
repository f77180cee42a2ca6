"""ARPA parsing and backoff scoring against hand-computed fixture values."""

import math
import pathlib

import numpy as np
import pytest

from biasdec import dump_arpa, parse_arpa
from biasdec.errors import BadRecord, CountMismatch, SectionMissing
from biasdec.lm import LN10, LmState

DATA = pathlib.Path(__file__).parent / "data"


def state_for(model, *words):
    st = model.start_state()
    for w in words:
        st = model.extend_state(st, w)
    return st


class TestParse:
    def test_declared_counts_match(self, toy_lm):
        assert toy_lm.order == 3
        assert len(toy_lm.tables[0]) == 7
        assert len(toy_lm.tables[1]) == 5
        assert len(toy_lm.tables[2]) == 2

    def test_missing_end_section(self):
        with pytest.raises(SectionMissing):
            parse_arpa(DATA / "toy_noend.arpa")

    def test_count_mismatch(self):
        with pytest.raises(CountMismatch) as err:
            parse_arpa(DATA / "toy_badcount.arpa")
        assert err.value.order == 2
        assert (err.value.declared, err.value.parsed) == (5, 4)

    def test_bad_record_reports_line(self):
        with pytest.raises(BadRecord) as err:
            parse_arpa(DATA / "toy_badrecord.arpa")
        assert err.value.line_no > 0

    def test_gzip_variant(self, tmp_path, toy_arpa_path):
        import gzip

        gz = tmp_path / "toy.arpa.gz"
        gz.write_bytes(gzip.compress(toy_arpa_path.read_bytes()))
        model = parse_arpa(gz)
        assert model.order == 3


class TestQueries:
    def test_explicit_trigram(self, toy_lm):
        st = state_for(toy_lm, "take", "the")
        assert toy_lm.cond_logprob("book", st) == pytest.approx(
            -0.1 * LN10, abs=1e-12
        )

    def test_backoff_chain_through_bigram(self, toy_lm):
        # (red, the, book) is absent and (red, the) carries no weight:
        # falls straight to the (the, book) bigram
        st = state_for(toy_lm, "red", "the")
        assert toy_lm.cond_logprob("book", st) == pytest.approx(
            -0.3 * LN10, abs=1e-12
        )

    def test_unseen_word_accumulates_backoffs(self, toy_lm):
        st = state_for(toy_lm, "the")
        expected = (-0.2 + math.log10(0.3 - math.exp(-8.0))) * LN10
        assert toy_lm.cond_logprob("zzz", st) == pytest.approx(expected, abs=1e-12)

    def test_double_backoff(self, toy_lm):
        # (<s>, take, book) missing; bow(<s>, take) then bow(take) then unigram
        st = state_for(toy_lm, "<s>", "take")
        expected = (-0.1 - 0.05 - 8.0 / LN10) * LN10
        assert toy_lm.cond_logprob("book", st) == pytest.approx(expected, abs=1e-9)

    def test_empty_history_equals_unigram(self, toy_lm):
        for word in ("the", "red", "take", "book"):
            assert toy_lm.cond_logprob(word, LmState()) == toy_lm.unigram_logprob(
                word
            )

    def test_designed_unigram(self, toy_lm):
        assert toy_lm.unigram_logprob("book") == pytest.approx(-8.0, abs=1e-9)

    def test_oov_unigram_is_unk(self, toy_lm):
        assert toy_lm.unigram_logprob("frisbee") == toy_lm.unigram_logprob("<unk>")

    def test_case_folded_lookup(self, toy_lm):
        assert toy_lm.unigram_logprob("BOOK") == toy_lm.unigram_logprob("book")
        st = state_for(toy_lm, "Take", "THE")
        assert toy_lm.cond_logprob("Book", st) == toy_lm.cond_logprob(
            "book", state_for(toy_lm, "take", "the")
        )

    def test_in_vocab(self, toy_lm):
        assert toy_lm.in_vocab("book")
        assert toy_lm.in_vocab("BOOK")
        assert not toy_lm.in_vocab("zzzq")
        assert not toy_lm.in_vocab("<unk>")

    def test_history_longer_than_order(self, toy_lm):
        st = state_for(toy_lm, "red", "take", "the")
        assert st.history == state_for(toy_lm, "take", "the").history


class TestModelInvariants:
    def test_unigram_mass_sums_to_one(self, toy_lm):
        total = sum(math.exp(toy_lm.unigram_logprob(w)) for w in toy_lm.vocab)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_serialize_reparse_identical_scores(self, toy_lm, tmp_path):
        path = tmp_path / "again.arpa"
        dump_arpa(toy_lm, path)
        again = parse_arpa(path)
        rng = np.random.default_rng(3)
        words = sorted(toy_lm.vocab) + ["zzz", "frisbee"]
        for _ in range(1000):
            w = words[rng.integers(len(words))]
            hist = [words[rng.integers(len(words))] for _ in range(rng.integers(3))]
            st1 = state_for(toy_lm, *hist)
            st2 = state_for(again, *hist)
            assert toy_lm.cond_logprob(w, st1) == again.cond_logprob(w, st2)

    def test_backoff_reference_recursion(self, toy_lm):
        """1000 random queries against an independent log10-domain recursion."""
        raw = {}  # independent tables keyed by word strings
        for n, table in enumerate(toy_lm.tables, start=1):
            for ids, entry in table.items():
                raw[tuple(toy_lm.words[i] for i in ids)] = entry

        def reference(words):
            words = tuple(
                w if (w,) in raw else "<unk>" for w in words
            )
            def rec(gram):
                if gram in raw:
                    return raw[gram][0]
                if len(gram) == 1:
                    return raw[("<unk>",)][0]
                bow = raw[gram[:-1]][1] if gram[:-1] in raw else 0.0
                return bow + rec(gram[1:])
            return rec(words) * LN10

        rng = np.random.default_rng(11)
        pool = sorted(toy_lm.vocab) + ["zzz", "qqq", "frisbee"]
        for _ in range(1000):
            n = int(rng.integers(1, 4))
            words = [pool[rng.integers(len(pool))] for _ in range(n)]
            st = state_for(toy_lm, *words[:-1])
            got = toy_lm.cond_logprob(words[-1], st)
            assert got == pytest.approx(reference(words), abs=1e-12)
