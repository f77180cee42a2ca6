"""Command-line front end: decode, eval, gen, trie, search."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .alphabet import Alphabet, load_alphabet, packaged_alphabet_path, save_alphabet
from .config import (
    ABLATIONS,
    MODES,
    DecodeConfig,
    baseline_config,
    format_config,
    load_config,
    resolve_mode,
)
from .context import CaptionSet, extract_bias_words, load_stopwords
from .decoder import decode
from .errors import BiasdecError
from .harness import (
    CorpusSpec,
    build_corpus,
    default_confusions,
    default_lm_text,
    random_search,
    read_confusions_text,
    read_corpus,
    run_experiment,
    write_corpus,
)
from .lm import parse_arpa
from .logits import load_logits
from .metrics import format_csv, format_kv
from .trie import build_trie

LM_ENV = "BIASDEC_LM"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems instead of exiting itself."""

    def error(self, message):
        raise _UsageError(message)


_CONFIG_FLAGS = (
    ("--N", "N", int, "beam width"),
    ("--C", "C", float, "cumulative-mass sampling threshold"),
    ("--lambda", "lam", float, "unigram bias scale"),
    ("--delta", "delta", float, "out-of-vocabulary penalty"),
    ("--gamma", "gamma", float, "out-of-vocabulary bias boost"),
    ("--alpha", "alpha", float, "language model weight"),
    ("--beta", "beta", float, "word-count bonus"),
    ("--sigma", "sigma", float, "rescoring-likelihood scale"),
    ("--K", "K", float, "prunable-swap percentage of N"),
)


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--mode", choices=MODES + tuple(ABLATIONS),
                   help="decoder mode (default: full)")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--lm-boundaries", action="store_true",
                   help="score sentence boundary tokens around the utterance")
    p.add_argument("--print-config", action="store_true",
                   help="echo the effective configuration and exit")
    for flag, dest, typ, help_text in _CONFIG_FLAGS:
        p.add_argument(flag, dest=dest, type=typ, default=None, help=help_text)


def _build_config(args) -> DecodeConfig:
    """Per-mode defaults, then the config file, then explicit flags."""
    mode_name = args.mode
    if mode_name is None and args.config:
        mode_name = load_config(args.config).mode
    mode_name = mode_name or "full"
    mode, ablation = resolve_mode(mode_name)
    cfg = baseline_config(mode_name) if mode != "full" else DecodeConfig(mode="full")
    if args.config:
        cfg = load_config(args.config)
        cfg = replace(cfg, mode=mode)
    overrides = dict(ablation)
    for _, dest, _, _ in _CONFIG_FLAGS:
        value = getattr(args, dest)
        if value is not None:
            overrides[dest] = value
    if args.lm_boundaries:
        overrides["lm_boundaries"] = True
    return replace(cfg, **overrides)


def _load_lm(args, required: bool):
    path = getattr(args, "lm", None) or os.environ.get(LM_ENV)
    if path:
        return parse_arpa(path)
    if required:
        raise _UsageError(f"--lm is required (or set {LM_ENV})")
    return None


def _bias_words(args) -> list[str]:
    words: list[str] = []
    if getattr(args, "bias", None):
        words.extend(w.strip() for w in args.bias.split(",") if w.strip())
    if getattr(args, "bias_file", None):
        with open(args.bias_file, encoding="utf-8") as fh:
            words.extend(line.strip() for line in fh if line.strip())
    if getattr(args, "captions", None):
        stopwords = load_stopwords(getattr(args, "stopwords", None))
        captions = CaptionSet.from_file(args.captions)
        words.extend(extract_bias_words(captions, stopwords).words)
    return words


def _write_out(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _corpus_spec(args) -> CorpusSpec:
    utterances = read_corpus(args.corpus)
    if args.confusions:
        with open(args.confusions, encoding="utf-8") as fh:
            pairs = read_confusions_text(fh.read())
    else:
        pairs = default_confusions()
    return CorpusSpec(
        utterances=tuple(utterances),
        noise=args.noise,
        confusion_pairs=tuple(pairs),
        seed=args.seed,
        frames_per_char=args.frames_per_char,
    )


def _add_channel_flags(p):
    p.add_argument("--noise", type=float, default=0.5,
                   help="per-word corruption probability")
    p.add_argument("--frames-per-char", type=int, default=3)
    p.add_argument("--confusions", help="word<TAB>twin confusion-pair file")
    p.add_argument("--seed", type=int, default=0)


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------


def _cmd_decode(args) -> int:
    cfg = _build_config(args)
    if args.print_config:
        sys.stdout.write(format_config(cfg.effective()))
        return 0
    alphabet = load_alphabet(args.vocab)
    eff = cfg.effective()
    lm = _load_lm(args, required=(eff.alpha or eff.lam or eff.delta) != 0.0)
    trie = build_trie(_bias_words(args))
    matrix = load_logits(args.logits)
    result = decode(matrix, alphabet, lm, trie, cfg)
    if args.nbest > 1:
        lines = [
            f"{s:.6f}\t{t}" for s, t in zip(result.scores, result.transcripts)
        ]
        text = "\n".join(lines[: args.nbest]) + "\n"
    else:
        text = (result.transcripts[0] if result.transcripts else "") + "\n"
    _write_out(text, args.out)
    print(
        f"frames={result.stats.frames} candidates={result.stats.candidates} "
        f"time={result.stats.wall_time * 1000:.1f}ms",
        file=sys.stderr,
    )
    return 0


def _cmd_eval(args) -> int:
    cfg = _build_config(args)
    if args.print_config:
        sys.stdout.write(format_config(cfg))
        return 0
    alphabet = load_alphabet(args.vocab) if args.vocab else Alphabet.default_graphemes()
    lm = _load_lm(args, required=True)
    spec = _corpus_spec(args)
    modes = tuple(m.strip() for m in args.modes.split(",") if m.strip())
    result = run_experiment(
        spec, cfg, modes, anti=args.anti, lm=lm, alphabet=alphabet, jobs=args.jobs
    )
    text = format_kv(result.reports) if args.format == "kv" else format_csv(
        result.reports
    )
    _write_out(text, args.out)
    if args.figures:
        from .plots import save_report_figures

        for path in save_report_figures(result, args.figures):
            print(f"figure: {path}", file=sys.stderr)
    if args.manifest:
        _write_manifest(args.manifest, cfg, args, modes)
    for mode in modes:
        mean_ms = 1000.0 * float(np.mean(result.wall_times[mode]))
        mean_cand = float(np.mean(result.candidates[mode]))
        print(f"{mode}: {mean_ms:.1f} ms/utt, {mean_cand:.0f} candidates/utt",
              file=sys.stderr)
    return 0


def _write_manifest(path, cfg, args, modes):
    from . import __version__

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"biasdec={__version__}\n")
        fh.write(f"corpus={args.corpus}\n")
        fh.write(f"modes={','.join(modes)}\n")
        fh.write(f"anti={str(args.anti).lower()}\n")
        fh.write(f"noise={args.noise}\n")
        fh.write(f"frames_per_char={args.frames_per_char}\n")
        fh.write(f"seed={args.seed}\n")
        for line in format_config(cfg).splitlines():
            fh.write(f"config.{line}\n")


def _cmd_gen(args) -> int:
    spec = build_corpus(
        args.size,
        seed=args.seed,
        noise=args.noise,
        frames_per_char=args.frames_per_char,
        miss_rate=args.miss_rate,
    )
    write_corpus(spec.utterances, args.out)
    if args.arpa:
        with open(args.arpa, "w", encoding="utf-8") as fh:
            fh.write(default_lm_text())
    if args.alphabet_out:
        save_alphabet(Alphabet.default_graphemes(), args.alphabet_out)
    sizes = [len(b) for _, b in spec.utterances]
    print(f"utterances={len(spec.utterances)}")
    print(f"mean_bias_words={sum(sizes) / len(sizes):.2f}")
    return 0


def _cmd_trie(args) -> int:
    words = _bias_words(args)
    if not words:
        raise _UsageError("trie needs --bias, --bias-file or --captions")
    trie = build_trie(words)
    print(f"words={trie.word_count}")
    print(f"nodes={trie.node_count()}")
    if args.word:
        print(f"contains[{args.word}]={str(trie.contains_word(args.word)).lower()}")
    if args.prefix:
        cursor = trie.start()
        for ch in args.prefix:
            cursor = trie.advance(cursor, ch)
        tn, nl, complete = trie.stats(cursor)
        nl_text = "inf" if nl == float("inf") else str(int(nl))
        print(f"prefix[{args.prefix}] alive={str(cursor.alive).lower()} "
              f"tn={tn} nl={nl_text} complete={str(complete).lower()}")
    return 0


def _cmd_search(args) -> int:
    alphabet = load_alphabet(args.vocab) if args.vocab else Alphabet.default_graphemes()
    lm = _load_lm(args, required=True)
    spec = _corpus_spec(args)
    best, best_wer = random_search(
        spec, trials=args.trials, seed=args.search_seed, lm=lm, alphabet=alphabet,
        N=args.N or 100,
    )
    sys.stdout.write(format_config(best))
    sys.stdout.write(f"wer={best_wer:.6f}\n")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="biasdec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decode", help="decode one posterior file")
    p.add_argument("--logits", required=True, help="posterior (.ctcp) file")
    p.add_argument("--vocab", required=True, help="character vocabulary file")
    p.add_argument("--lm", help=f"ARPA model (or ${LM_ENV})")
    p.add_argument("--bias", help="inline comma-separated biasing words")
    p.add_argument("--bias-file", help="biasing vocabulary file, one entry per line")
    p.add_argument("--captions", help="caption file routed through keyword extraction")
    p.add_argument("--stopwords", help="stopword file for caption extraction")
    p.add_argument("--nbest", type=int, default=1)
    p.add_argument("--out", help="write transcript(s) here instead of stdout")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("eval", help="run corpus experiments")
    p.add_argument("--corpus", required=True, help="reference<TAB>bias-list file")
    p.add_argument("--vocab", help="character vocabulary file (default: built-in)")
    p.add_argument("--lm", help=f"ARPA model (or ${LM_ENV})")
    p.add_argument("--modes", default="base,full", help="comma-separated mode list")
    p.add_argument("--anti", action="store_true",
                   help="strip spoken words from each biasing vocabulary")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("csv", "kv"), default="csv")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--figures", help="directory for report figures")
    p.add_argument("--manifest", help="write a run manifest file")
    _add_channel_flags(p)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    p.add_argument("--out", required=True, help="corpus file to write")
    p.add_argument("--size", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.5)
    p.add_argument("--frames-per-char", type=int, default=3)
    p.add_argument("--miss-rate", type=float, default=0.65)
    p.add_argument("--arpa", help="also write the matching ARPA model here")
    p.add_argument("--alphabet-out", help="also write the alphabet file here")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("trie", help="inspect a biasing trie")
    p.add_argument("--bias", help="inline comma-separated biasing words")
    p.add_argument("--bias-file", help="biasing vocabulary file")
    p.add_argument("--captions", help="caption file")
    p.add_argument("--stopwords", help="stopword file")
    p.add_argument("--word", help="test membership of one word")
    p.add_argument("--prefix", help="walk a prefix and print its statistics")
    p.set_defaults(func=_cmd_trie)

    p = sub.add_parser("search", help="seeded random hyperparameter search")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab")
    p.add_argument("--lm", help=f"ARPA model (or ${LM_ENV})")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--search-seed", type=int, default=0)
    p.add_argument("--N", type=int, default=100)
    _add_channel_flags(p)
    p.set_defaults(func=_cmd_search)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except BiasdecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
