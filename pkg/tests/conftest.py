import pathlib

import numpy as np
import pytest

from biasdec import Alphabet, LogitMatrix, parse_arpa
from biasdec.harness import default_lm_text
from biasdec.lm import parse_arpa_lines

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def toy_arpa_path():
    return DATA / "toy.arpa"


@pytest.fixture(scope="session")
def toy_lm(toy_arpa_path):
    return parse_arpa(toy_arpa_path)


@pytest.fixture(scope="session")
def alphabet():
    return Alphabet.default_graphemes()


@pytest.fixture(scope="session")
def corpus_lm():
    """Language model over the synthetic-corpus template vocabulary."""
    return parse_arpa_lines(default_lm_text().split("\n"))


@pytest.fixture
def one_hot(alphabet):
    """Build a noiseless posterior matrix spelling `text`.

    A blank frame is inserted between repeated characters so the CTC
    collapse reproduces the text exactly.
    """

    def build(text: str) -> LogitMatrix:
        rows = []
        prev = None
        for ch in text:
            idx = alphabet.delimiter_index if ch == " " else alphabet.index_of(ch)
            if prev == idx:
                row = np.zeros(len(alphabet))
                row[alphabet.blank_index] = 1.0
                rows.append(row)
            row = np.zeros(len(alphabet))
            row[idx] = 1.0
            rows.append(row)
            prev = idx
        return LogitMatrix(np.array(rows, dtype=np.float32))

    return build
