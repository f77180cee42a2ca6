"""Indexed character vocabulary with reserved blank and word-delimiter symbols."""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from importlib import resources

from .errors import DuplicateSymbol, IoFailure, MissingReserved

BLANK_TOKEN = "<blank>"
SPACE_TOKEN = "<space>"


@dataclass(frozen=True)
class Alphabet:
    """Dense 0..A-1 symbol table for the decoder.

    ``symbols`` holds one entry per index; the blank is stored as the empty
    string (it is never emitted) and the word delimiter as a single space.
    """

    symbols: tuple[str, ...]
    blank_index: int
    delimiter_index: int
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.blank_index == self.delimiter_index:
            raise DuplicateSymbol("blank and delimiter resolve to the same index")
        index: dict[str, int] = {}
        for i, sym in enumerate(self.symbols):
            if i == self.blank_index:
                continue
            if sym in index:
                raise DuplicateSymbol(f"symbol {sym!r} listed twice")
            if len(sym) != 1 or not sym.isprintable():
                raise DuplicateSymbol(
                    f"symbol {sym!r} at index {i} is not a single printable character"
                )
            index[sym] = i
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def delimiter(self) -> str:
        return self.symbols[self.delimiter_index]

    def index_of(self, symbol: str) -> int:
        return self._index[symbol]

    def symbol_of(self, index: int) -> str:
        return self.symbols[index]

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index

    @classmethod
    def default_graphemes(cls) -> "Alphabet":
        """28-symbol English grapheme set: blank, space, a-z."""
        return cls(
            symbols=("",) + (" ",) + tuple(string.ascii_lowercase),
            blank_index=0,
            delimiter_index=1,
        )


def load_alphabet(path) -> Alphabet:
    """Read a vocabulary file: one token per line, line number = index.

    Reserved tokens are spelled ``<blank>`` and ``<space>``; a bare space
    line is accepted as the delimiter too.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    if lines and lines[-1] == "":
        lines.pop()

    symbols: list[str] = []
    blank_index = None
    delimiter_index = None
    for i, raw in enumerate(lines):
        tok = raw.rstrip("\r")
        if tok == BLANK_TOKEN:
            if blank_index is not None:
                raise DuplicateSymbol(f"{BLANK_TOKEN} listed twice")
            blank_index = i
            symbols.append("")
        elif tok in (SPACE_TOKEN, " "):
            if delimiter_index is not None:
                raise DuplicateSymbol("word delimiter listed twice")
            delimiter_index = i
            symbols.append(" ")
        else:
            symbols.append(tok)
    if blank_index is None:
        raise MissingReserved(f"vocabulary file lacks {BLANK_TOKEN}")
    if delimiter_index is None:
        raise MissingReserved(f"vocabulary file lacks {SPACE_TOKEN}")
    return Alphabet(tuple(symbols), blank_index, delimiter_index)


def save_alphabet(alphabet: Alphabet, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for i, sym in enumerate(alphabet.symbols):
                if i == alphabet.blank_index:
                    fh.write(BLANK_TOKEN + "\n")
                elif i == alphabet.delimiter_index:
                    fh.write(SPACE_TOKEN + "\n")
                else:
                    fh.write(sym + "\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def packaged_alphabet_path() -> str:
    """Path of the alphabet file shipped with the package."""
    return str(resources.files("biasdec").joinpath("data/alphabet.txt"))
