"""Command-line interface: exit codes, flags, end-to-end flows."""

import numpy as np
import pytest

from biasdec import Alphabet, save_alphabet, save_logits
from biasdec.cli import main
from biasdec.harness import default_lm_text
from biasdec.logits import LogitMatrix


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Vocabulary, LM, posterior file and corpus shared by the CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    alphabet = Alphabet.default_graphemes()
    save_alphabet(alphabet, root / "chars.txt")
    (root / "lm.arpa").write_text(default_lm_text())

    rows = []
    prev = None
    for ch in "red book":
        idx = alphabet.delimiter_index if ch == " " else alphabet.index_of(ch)
        if idx == prev:
            sep = np.zeros(28, dtype=np.float32)
            sep[alphabet.blank_index] = 1.0
            rows.append(sep)
        row = np.zeros(28, dtype=np.float32)
        row[idx] = 1.0
        rows.append(row)
        prev = idx
    save_logits(LogitMatrix(np.array(rows)), root / "u.ctcp")

    assert main(["gen", "--out", str(root / "corpus.tsv"), "--size", "8",
                 "--seed", "5"]) == 0
    return root


class TestDecodeCommand:
    def test_end_to_end_transcript(self, workdir, capsys):
        code = main([
            "decode", "--logits", str(workdir / "u.ctcp"),
            "--vocab", str(workdir / "chars.txt"),
            "--lm", str(workdir / "lm.arpa"),
            "--bias", "red,book", "--mode", "full",
        ])
        assert code == 0
        assert capsys.readouterr().out == "red book\n"

    def test_missing_logits_is_usage_error(self, workdir, capsys):
        code = main(["decode", "--vocab", str(workdir / "chars.txt")])
        assert code == 1
        assert "usage error" in capsys.readouterr().err

    def test_missing_lm_for_fusion_mode(self, workdir, capsys):
        code = main([
            "decode", "--logits", str(workdir / "u.ctcp"),
            "--vocab", str(workdir / "chars.txt"), "--mode", "full",
        ])
        assert code == 1

    def test_base_mode_needs_no_lm(self, workdir, capsys):
        code = main([
            "decode", "--logits", str(workdir / "u.ctcp"),
            "--vocab", str(workdir / "chars.txt"), "--mode", "base",
        ])
        assert code == 0
        assert capsys.readouterr().out == "red book\n"

    def test_data_error_exit_code(self, workdir, tmp_path, capsys):
        bad = tmp_path / "bad.ctcp"
        bad.write_bytes(b"nope")
        code = main([
            "decode", "--logits", str(bad),
            "--vocab", str(workdir / "chars.txt"), "--mode", "base",
        ])
        assert code == 2

    def test_lm_from_environment(self, workdir, capsys, monkeypatch):
        monkeypatch.setenv("BIASDEC_LM", str(workdir / "lm.arpa"))
        code = main([
            "decode", "--logits", str(workdir / "u.ctcp"),
            "--vocab", str(workdir / "chars.txt"), "--mode", "full",
        ])
        assert code == 0

    def test_print_config_defaults(self, workdir, capsys):
        code = main([
            "decode", "--logits", str(workdir / "u.ctcp"),
            "--vocab", str(workdir / "chars.txt"), "--print-config",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "N=100" in out
        assert "C=0.991" in out
        assert "lambda=1.424" in out
        assert "delta=10.33" in out
        assert "gamma=13.31" in out
        assert "alpha=0.788" in out
        assert "beta=0.119" in out
        assert "sigma=10.91" in out
        assert "K=24.0" in out

    def test_mode_specific_defaults(self, workdir, capsys):
        code = main([
            "decode", "--logits", str(workdir / "u.ctcp"),
            "--vocab", str(workdir / "chars.txt"),
            "--mode", "wb", "--print-config",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "gamma=7.09" in out
        assert "alpha=0.29" in out

    def test_flag_overrides_mode_default(self, workdir, capsys):
        code = main([
            "decode", "--logits", str(workdir / "u.ctcp"),
            "--vocab", str(workdir / "chars.txt"),
            "--mode", "wb", "--gamma", "5.5", "--print-config",
        ])
        assert code == 0
        assert "gamma=5.5" in capsys.readouterr().out

    def test_nbest_and_out_file(self, workdir, tmp_path, capsys):
        out = tmp_path / "trans.txt"
        code = main([
            "decode", "--logits", str(workdir / "u.ctcp"),
            "--vocab", str(workdir / "chars.txt"), "--mode", "base",
            "--nbest", "3", "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0].split("\t")[1] == "red book"

    def test_captions_route(self, workdir, tmp_path, capsys):
        caps = tmp_path / "caps.txt"
        caps.write_text("a red book on the shelf\n")
        code = main([
            "decode", "--logits", str(workdir / "u.ctcp"),
            "--vocab", str(workdir / "chars.txt"),
            "--lm", str(workdir / "lm.arpa"),
            "--captions", str(caps), "--mode", "full",
        ])
        assert code == 0
        assert capsys.readouterr().out == "red book\n"


class TestEvalCommand:
    def test_csv_report(self, workdir, capsys):
        code = main([
            "eval", "--corpus", str(workdir / "corpus.tsv"),
            "--lm", str(workdir / "lm.arpa"),
            "--modes", "base,full", "--noise", "0.5", "--seed", "5",
            "--N", "40",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "model,wer,werr,ta"
        assert out.splitlines()[1].startswith("base,")
        assert out.splitlines()[2].startswith("full,")

    def test_deterministic_output(self, workdir, capsys):
        argv = [
            "eval", "--corpus", str(workdir / "corpus.tsv"),
            "--lm", str(workdir / "lm.arpa"), "--modes", "full",
            "--noise", "0.4", "--seed", "5", "--N", "40",
        ]
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        assert capsys.readouterr().out == first

    def test_anti_flag_and_figures(self, workdir, tmp_path, capsys):
        figures = tmp_path / "figs"
        out = tmp_path / "report.csv"
        code = main([
            "eval", "--corpus", str(workdir / "corpus.tsv"),
            "--lm", str(workdir / "lm.arpa"), "--modes", "base,full",
            "--anti", "--noise", "0.5", "--seed", "5", "--N", "40",
            "--out", str(out), "--figures", str(figures),
            "--manifest", str(tmp_path / "manifest.txt"),
        ])
        assert code == 0
        assert out.exists()
        assert (figures / "wer_ta.png").stat().st_size > 0
        assert (figures / "candidates.png").stat().st_size > 0
        manifest = (tmp_path / "manifest.txt").read_text()
        assert "anti=true" in manifest
        assert "config.N=40" in manifest


class TestGenCommand:
    def test_writes_corpus_lm_alphabet(self, tmp_path, capsys):
        code = main([
            "gen", "--out", str(tmp_path / "c.tsv"), "--size", "10",
            "--seed", "3", "--arpa", str(tmp_path / "g.arpa"),
            "--alphabet-out", str(tmp_path / "chars.txt"),
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "utterances=10" in out
        assert "mean_bias_words=" in out
        assert (tmp_path / "c.tsv").read_text().count("\n") == 10
        assert (tmp_path / "g.arpa").read_text().startswith("\\data\\")
        assert (tmp_path / "chars.txt").read_text().startswith("<blank>")


class TestTrieCommand:
    def test_stats_output(self, capsys):
        code = main(["trie", "--bias", "red,book", "--word", "boo",
                     "--prefix", "bo"])
        assert code == 0
        out = capsys.readouterr().out
        assert "words=2" in out
        assert "nodes=7" in out
        assert "contains[boo]=false" in out
        assert "prefix[bo] alive=true tn=2 nl=2 complete=false" in out

    def test_requires_some_bias_source(self, capsys):
        assert main(["trie"]) == 1


class TestSearchCommand:
    def test_prints_best_config(self, workdir, capsys):
        code = main([
            "search", "--corpus", str(workdir / "corpus.tsv"),
            "--lm", str(workdir / "lm.arpa"), "--trials", "2",
            "--search-seed", "1", "--noise", "0.3", "--seed", "5",
            "--N", "8",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "mode=full" in out
        assert "wer=" in out
