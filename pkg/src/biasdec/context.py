"""Caption text to biasing vocabulary conversion.

A rule-based keyword extractor stands behind the same interface a learned
bias-target tagger would: captions in, ordered distinct biasing words out.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from importlib import resources

_PUNCT_TABLE = str.maketrans({c: " " for c in string.punctuation})


@dataclass(frozen=True)
class CaptionSet:
    """Lowercased, punctuation-stripped caption token sequences."""

    captions: tuple[tuple[str, ...], ...]

    @classmethod
    def from_lines(cls, lines) -> "CaptionSet":
        captions = []
        for line in lines:
            tokens = tuple(line.lower().translate(_PUNCT_TABLE).split())
            if tokens:
                captions.append(tokens)
        return cls(tuple(captions))

    @classmethod
    def from_file(cls, path) -> "CaptionSet":
        with open(path, encoding="utf-8") as fh:
            return cls.from_lines(fh)


@dataclass(frozen=True)
class BiasVocabulary:
    """Ordered distinct biasing words and the caption each came from."""

    words: tuple[str, ...]
    provenance: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.words)


def extract_bias_words(captions: CaptionSet, stopwords) -> BiasVocabulary:
    """Select caption tokens worth biasing toward.

    Keeps tokens of length >= 2 that are not stopwords, deduplicated in
    first-seen order.
    """
    stopwords = set(stopwords)
    words: list[str] = []
    provenance: list[int] = []
    seen: set[str] = set()
    for i, caption in enumerate(captions.captions):
        for token in caption:
            if len(token) < 2 or token in stopwords or token in seen:
                continue
            seen.add(token)
            words.append(token)
            provenance.append(i)
    return BiasVocabulary(tuple(words), tuple(provenance))


def anti_context(vocab: BiasVocabulary, reference) -> BiasVocabulary:
    """Drop every biasing word that occurs in the reference word sequence.

    Matching is exact-token after case folding; no stemming, so a plural
    in the reference does not remove its singular from the vocabulary.
    """
    if isinstance(reference, str):
        reference = reference.split()
    spoken = {w.lower() for w in reference}
    kept = [
        (w, p) for w, p in zip(vocab.words, vocab.provenance) if w not in spoken
    ]
    return BiasVocabulary(
        tuple(w for w, _ in kept), tuple(p for _, p in kept)
    )


def load_stopwords(path=None) -> frozenset[str]:
    """Stopword set; the packaged 50-entry English list when no path given."""
    if path is None:
        text = resources.files("biasdec").joinpath("data/stopwords.txt").read_text(
            encoding="utf-8"
        )
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return frozenset(w.strip().lower() for w in text.split("\n") if w.strip())
