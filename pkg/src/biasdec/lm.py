"""ARPA-format backoff n-gram language model: parser, scorer, serializer.

Scores are exposed in natural log. The tables keep the parsed log10
values and scale on lookup, so serializing a parsed model and parsing it
again reproduces every query bit-for-bit.
"""

from __future__ import annotations

import gzip
import math
import re
from dataclasses import dataclass, field

from .errors import BadRecord, CountMismatch, IoFailure, SectionMissing

LN10 = math.log(10.0)
UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"

# log10 probability assigned to <unk> when a model ships without one
_UNK_FLOOR_LOG10 = -99.0

_NGRAM_HEADER = re.compile(r"^ngram\s+(\d+)\s*=\s*(\d+)$")
_SECTION = re.compile(r"^\\(\d+)-grams:$")


@dataclass(frozen=True)
class LmState:
    """Conditioning history: the last (order-1) word ids of a hypothesis."""

    history: tuple[int, ...] = ()


@dataclass
class NGramModel:
    order: int
    vocab: dict[str, int]                 # word -> id
    words: list[str]                      # id -> word
    # per order (1-based index order-1): id tuple -> (log10 prob, log10 backoff)
    tables: list[dict[tuple[int, ...], tuple[float, float]]]
    unk_id: int = field(init=False)

    def __post_init__(self):
        self.unk_id = self.vocab[UNK]

    # --- queries ------------------------------------------------------

    def word_id(self, word: str) -> int:
        return self.vocab.get(word.lower(), self.unk_id)

    def start_state(self, with_bos: bool = False) -> LmState:
        if with_bos and BOS in self.vocab:
            return LmState((self.vocab[BOS],))
        return LmState()

    def extend_state(self, state: LmState, word: str) -> LmState:
        return LmState(self._trim(state.history + (self.word_id(word),)))

    def cond_logprob(self, word: str, state: LmState = LmState()) -> float:
        """Katz-backoff conditional probability of `word` given `state`, in ln."""
        wid = self.word_id(word)
        return self._score(self._trim(state.history) + (wid,)) * LN10

    def _trim(self, history: tuple[int, ...]) -> tuple[int, ...]:
        keep = self.order - 1
        return history[len(history) - keep:] if keep < len(history) else history

    def unigram_logprob(self, word: str) -> float:
        """Unconditional unigram probability in ln; the <unk> entry if absent."""
        wid = self.word_id(word)
        return self.tables[0][(wid,)][0] * LN10

    def in_vocab(self, word: str) -> bool:
        """True iff the case-folded word has its own unigram entry."""
        folded = word.lower()
        return folded in self.vocab and folded != UNK

    def _score(self, ids: tuple[int, ...]) -> float:
        entry = self.tables[len(ids) - 1].get(ids)
        if entry is not None:
            return entry[0]
        if len(ids) == 1:
            # unseen id cannot happen (ids come from word_id), but guard anyway
            return self.tables[0][(self.unk_id,)][0]
        context = self.tables[len(ids) - 2].get(ids[:-1])
        backoff = context[1] if context is not None else 0.0
        return backoff + self._score(ids[1:])


def parse_arpa(path) -> NGramModel:
    """Parse an ARPA text file (.gz accepted).

    Raises SectionMissing / CountMismatch / BadRecord with a line number
    when the file violates the format.
    """
    opener = gzip.open if str(path).endswith(".gz") else open
    try:
        with opener(path, "rt", encoding="utf-8") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return parse_arpa_lines(lines)


def parse_arpa_lines(lines: list[str]) -> NGramModel:
    it = enumerate(lines, start=1)

    for line_no, line in it:
        if line.strip() == "\\data\\":
            break
    else:
        raise SectionMissing("\\data\\ section not found")

    declared: dict[int, int] = {}
    for line_no, line in it:
        line = line.strip()
        if not line:
            break
        m = _NGRAM_HEADER.match(line)
        if not m:
            raise BadRecord(line_no, f"expected 'ngram N=count', got {line!r}")
        declared[int(m.group(1))] = int(m.group(2))
    if not declared:
        raise SectionMissing("\\data\\ section declares no n-gram counts")
    order = max(declared)

    vocab: dict[str, int] = {}
    words: list[str] = []
    tables: list[dict[tuple[int, ...], tuple[float, float]]] = [
        {} for _ in range(order)
    ]

    current_n = None
    saw_end = False
    for line_no, line in it:
        line = line.strip()
        if not line:
            continue
        if line == "\\end\\":
            saw_end = True
            break
        m = _SECTION.match(line)
        if m:
            current_n = int(m.group(1))
            if current_n not in declared:
                raise BadRecord(line_no, f"{current_n}-gram section was not declared")
            continue
        if current_n is None:
            raise BadRecord(line_no, f"record outside any n-gram section: {line!r}")
        _parse_record(line, line_no, current_n, order, vocab, words, tables)

    if not saw_end:
        raise SectionMissing("\\end\\ section not found")
    for n, count in sorted(declared.items()):
        if len(tables[n - 1]) != count:
            raise CountMismatch(n, count, len(tables[n - 1]))

    if UNK not in vocab:
        vocab[UNK] = len(words)
        words.append(UNK)
        tables[0][(vocab[UNK],)] = (_UNK_FLOOR_LOG10, 0.0)
    return NGramModel(order=order, vocab=vocab, words=words, tables=tables)


def _parse_record(line, line_no, n, order, vocab, words, tables):
    parts = line.split()
    if len(parts) == n + 1:
        backoff = 0.0
    elif len(parts) == n + 2:
        try:
            backoff = float(parts[-1])
        except ValueError:
            raise BadRecord(line_no, f"backoff weight {parts[-1]!r} is not a number")
        if n == order:
            backoff = 0.0  # highest order never backs off; tolerate a stray field
    else:
        raise BadRecord(
            line_no, f"expected {n + 1} or {n + 2} fields, got {len(parts)}"
        )
    try:
        logprob = float(parts[0])
    except ValueError:
        raise BadRecord(line_no, f"log-probability {parts[0]!r} is not a number")

    ids = []
    for token in parts[1:n + 1]:
        token = token.lower()
        if n == 1:
            if token in vocab:
                raise BadRecord(line_no, f"duplicate unigram {token!r}")
            vocab[token] = len(words)
            words.append(token)
        elif token not in vocab:
            raise BadRecord(line_no, f"token {token!r} has no unigram entry")
        ids.append(vocab[token])
    key = tuple(ids)
    if key in tables[n - 1]:
        raise BadRecord(line_no, "duplicate n-gram entry")
    tables[n - 1][key] = (logprob, backoff)


def dump_arpa(model: NGramModel, path) -> None:
    """Serialize back to ARPA text. parse_arpa(dump_arpa(m)) scores identically."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\\data\\\n")
            for n in range(1, model.order + 1):
                fh.write(f"ngram {n}={len(model.tables[n - 1])}\n")
            for n in range(1, model.order + 1):
                fh.write(f"\n\\{n}-grams:\n")
                for ids in sorted(model.tables[n - 1]):
                    logprob, backoff = model.tables[n - 1][ids]
                    grams = " ".join(model.words[i] for i in ids)
                    if n < model.order and backoff != 0.0:
                        fh.write(f"{logprob!r}\t{grams}\t{backoff!r}\n")
                    else:
                        fh.write(f"{logprob!r}\t{grams}\n")
            fh.write("\n\\end\\\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
