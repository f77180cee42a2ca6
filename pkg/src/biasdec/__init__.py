"""Contextual-biasing CTC beam search decoding engine."""

from .alphabet import Alphabet, load_alphabet, save_alphabet
from .config import DecodeConfig, baseline_config, load_config, save_config
from .context import (
    BiasVocabulary,
    CaptionSet,
    anti_context,
    extract_bias_words,
    load_stopwords,
)
from .decoder import (
    BeamState,
    DecodeResult,
    Hypothesis,
    bias_aware_prune,
    decode,
    decode_greedy,
    rescore_boundary,
    rescoring_likelihood,
    sample_vocab,
    score,
)
from .harness import (
    CorpusSpec,
    ExperimentResult,
    build_corpus,
    random_search,
    run_experiment,
    synthesize_logits,
)
from .lm import LmState, NGramModel, dump_arpa, parse_arpa
from .logits import LogitMatrix, load_logits, save_logits
from .metrics import EvalReport, ta, wer, werr
from .trie import BiasTrie, TrieCursor, build_trie

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "BeamState",
    "BiasTrie",
    "BiasVocabulary",
    "CaptionSet",
    "CorpusSpec",
    "DecodeConfig",
    "DecodeResult",
    "EvalReport",
    "ExperimentResult",
    "Hypothesis",
    "LmState",
    "LogitMatrix",
    "NGramModel",
    "TrieCursor",
    "anti_context",
    "baseline_config",
    "bias_aware_prune",
    "build_corpus",
    "build_trie",
    "decode",
    "decode_greedy",
    "dump_arpa",
    "extract_bias_words",
    "load_alphabet",
    "load_config",
    "load_logits",
    "load_stopwords",
    "parse_arpa",
    "random_search",
    "rescore_boundary",
    "rescoring_likelihood",
    "run_experiment",
    "sample_vocab",
    "save_alphabet",
    "save_config",
    "save_logits",
    "score",
    "synthesize_logits",
    "ta",
    "wer",
    "werr",
]
