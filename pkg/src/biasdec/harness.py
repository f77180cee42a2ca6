"""Synthetic corpus generator and experiment runner.

The acoustic model is replaced by a parametric corruption channel: each
reference character expands to a fixed number of frames, and corrupted
words put the majority of the probability mass on a confusable character
so that greedy decoding goes wrong while the truth stays recoverable.
The runner decodes a corpus under several decoder modes and aggregates
error rates, candidate counters and wall-clock times per mode.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .alphabet import Alphabet
from .config import DecodeConfig, baseline_config, resolve_mode
from .context import BiasVocabulary, anti_context
from .decoder import decode
from .errors import BiasdecError, SymbolOutOfAlphabet
from .lm import NGramModel
from .logits import LogitMatrix
from .metrics import EvalReport, corpus_report
from .trie import build_trie

# channel constants: majority share of a corrupted frame and the uniform
# smoothing floor mixed into every row
EPSILON = 0.12
FLOOR = 1e-5
GARBAGE_CHARS = 3  # corrupted positions in words without a confusion twin

MODE_ORDER = ("greedy", "base", "base_lm", "wb", "wb_ctx", "full",
              "full_c1", "full_sigma0")


@dataclass(frozen=True)
class CorpusSpec:
    """A synthetic evaluation corpus plus its corruption channel."""

    utterances: tuple[tuple[str, tuple[str, ...]], ...]  # (reference, bias words)
    noise: float = 0.5            # per-word corruption probability
    confusion_pairs: tuple[tuple[str, str], ...] = ()    # (word, confusable twin)
    seed: int = 0
    frames_per_char: int = 3

    def __post_init__(self):
        if not (0.0 <= self.noise <= 1.0):
            raise BiasdecError(f"noise must be in [0, 1], got {self.noise}")
        if self.frames_per_char < 2:
            raise BiasdecError(
                f"frames_per_char must be >= 2, got {self.frames_per_char}"
            )

    @property
    def pair_map(self) -> dict[str, str]:
        return dict(self.confusion_pairs)


@dataclass
class ExperimentResult:
    reports: dict[str, EvalReport]
    transcripts: dict[str, list[str]]
    candidates: dict[str, list[int]]        # per-utterance extension counters
    wall_times: dict[str, list[float]]      # per-utterance decode seconds
    references: list[str]
    bias_sizes: list[int]


# ----------------------------------------------------------------------
# corruption channel
# ----------------------------------------------------------------------


def _utterance_rng(seed: int, reference: str) -> np.random.Generator:
    digest = hashlib.sha256(reference.encode("utf-8")).digest()[:8]
    entropy = [seed, int.from_bytes(digest, "little")]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _align(truth: str, twin: str) -> list[tuple[str | None, str | None]]:
    """Character-level edit alignment, as (true char, twin char) pairs.

    None on the true side marks an insertion in the twin; None on the
    twin side marks a deletion.
    """
    n, m = len(truth), len(twin)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            dist[i][j] = min(
                dist[i - 1][j - 1] + (truth[i - 1] != twin[j - 1]),
                dist[i - 1][j] + 1,
                dist[i][j - 1] + 1,
            )
    ops: list[tuple[str | None, str | None]] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (
            truth[i - 1] != twin[j - 1]
        ):
            ops.append((truth[i - 1], twin[j - 1]))
            i -= 1
            j -= 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            ops.append((truth[i - 1], None))
            i -= 1
        else:
            ops.append((None, twin[j - 1]))
            j -= 1
    ops.reverse()
    return ops


def synthesize_logits(
    reference: str,
    spec: CorpusSpec,
    alphabet: Alphabet | None = None,
) -> LogitMatrix:
    """Render a reference into a posterior matrix through the noise channel.

    Deterministic given the corpus seed; the random stream is derived from
    the reference text, so parallel and serial corpus runs agree exactly.
    """
    alphabet = alphabet or Alphabet.default_graphemes()
    for ch in reference:
        if ch != " " and ch not in alphabet:
            raise SymbolOutOfAlphabet(f"reference character {ch!r} not in alphabet")
    rng = _utterance_rng(spec.seed, reference)
    pairs = spec.pair_map
    letters = [
        s for i, s in enumerate(alphabet.symbols)
        if i not in (alphabet.blank_index, alphabet.delimiter_index)
    ]

    # blocks of (majority symbol index, minority symbol index or -1)
    blank = alphabet.blank_index
    blocks: list[tuple[int, int]] = []
    words = reference.split(" ")
    for w, word in enumerate(words):
        if w > 0:
            blocks.append((alphabet.delimiter_index, -1))
        if not word:
            continue
        corrupt = bool(rng.random() < spec.noise)
        if corrupt and word in pairs:
            for true_ch, twin_ch in _align(word, pairs[word]):
                if true_ch == twin_ch:
                    blocks.append((alphabet.index_of(true_ch), -1))
                elif true_ch is None:
                    blocks.append((alphabet.index_of(twin_ch), blank))
                elif twin_ch is None:
                    blocks.append((blank, alphabet.index_of(true_ch)))
                else:
                    blocks.append(
                        (alphabet.index_of(twin_ch), alphabet.index_of(true_ch))
                    )
        elif corrupt:
            positions = rng.choice(
                len(word), size=min(GARBAGE_CHARS, len(word)), replace=False
            )
            positions = set(int(p) for p in positions)
            for pos, ch in enumerate(word):
                if pos in positions:
                    options = [s for s in letters if s != ch]
                    wrong = options[int(rng.integers(len(options)))]
                    blocks.append((alphabet.index_of(wrong), alphabet.index_of(ch)))
                else:
                    blocks.append((alphabet.index_of(ch), -1))
        else:
            for ch in word:
                blocks.append((alphabet.index_of(ch), -1))

    A = len(alphabet)
    frames_per_block = spec.frames_per_char
    rows = np.empty((len(blocks) * frames_per_block, A), dtype=np.float64)
    base = np.full(A, FLOOR / A, dtype=np.float64)
    t = 0
    for major, minor in blocks:
        row = base.copy()
        if minor < 0:
            row[major] += 1.0 - FLOOR
        else:
            row[major] += (0.5 + EPSILON) * (1.0 - FLOOR)
            row[minor] += (0.5 - EPSILON) * (1.0 - FLOOR)
        blank_row = base.copy()
        blank_row[blank] += 1.0 - FLOOR
        for _ in range(frames_per_block - 1):
            rows[t] = row
            t += 1
        rows[t] = blank_row
        t += 1
    return LogitMatrix(rows.astype(np.float32))


# ----------------------------------------------------------------------
# experiment runner
# ----------------------------------------------------------------------


def _mode_config(name: str, cfg: DecodeConfig) -> DecodeConfig:
    """Per-mode decode configuration.

    The full decoder and its ablations run with the caller's config;
    baseline modes use their own tuned weights on a standard beam,
    inheriting only the beam width.
    """
    mode, overrides = resolve_mode(name)
    if mode == "full":
        out = replace(cfg, mode="full", **overrides)
    else:
        out = replace(baseline_config(name), N=cfg.N, lm_boundaries=cfg.lm_boundaries)
    return out


def _order_modes(modes) -> list[str]:
    modes = set(modes)
    unknown = modes - set(MODE_ORDER)
    if unknown:
        raise BiasdecError(f"unknown modes: {sorted(unknown)}")
    return [m for m in MODE_ORDER if m in modes]


def _run_utterance(args):
    reference, bias_words, spec, mode_cfgs, lm, alphabet, anti = args
    vocab = BiasVocabulary(tuple(bias_words), tuple(0 for _ in bias_words))
    if anti:
        vocab = anti_context(vocab, reference)
    trie = build_trie(vocab.words)
    matrix = synthesize_logits(reference, spec, alphabet)
    out = {}
    for name, cfg in mode_cfgs:
        result = decode(matrix, alphabet, lm, trie, cfg)
        out[name] = (
            result.transcripts[0] if result.transcripts else "",
            result.stats.candidates,
            result.stats.wall_time,
        )
    return len(vocab), out


def run_experiment(
    spec: CorpusSpec,
    cfg: DecodeConfig | None = None,
    modes=("base", "full"),
    anti: bool = False,
    *,
    lm: NGramModel,
    alphabet: Alphabet | None = None,
    jobs: int = 1,
) -> ExperimentResult:
    """Decode the corpus under every requested mode and aggregate metrics.

    With anti=True each utterance's biasing vocabulary is first stripped
    of every word spoken in its reference. WER reduction is computed
    against the base mode when it is among the requested modes.
    """
    if not spec.utterances:
        raise BiasdecError("corpus is empty")
    cfg = cfg or DecodeConfig()
    alphabet = alphabet or Alphabet.default_graphemes()
    names = _order_modes(modes)
    mode_cfgs = [(name, _mode_config(name, cfg)) for name in names]

    tasks = [
        (ref, bias, spec, mode_cfgs, lm, alphabet, anti)
        for ref, bias in spec.utterances
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_utterance, tasks, chunksize=4))
    else:
        rows = [_run_utterance(t) for t in tasks]

    references = [ref for ref, _ in spec.utterances]
    transcripts = {n: [row[1][n][0] for row in rows] for n in names}
    candidates = {n: [row[1][n][1] for row in rows] for n in names}
    wall_times = {n: [row[1][n][2] for row in rows] for n in names}
    bias_sizes = [row[0] for row in rows]

    base_wer = None
    if "base" in names:
        base_wer = corpus_report(zip(references, transcripts["base"])).wer
    reports = {}
    for n in names:
        reports[n] = corpus_report(
            zip(references, transcripts[n]),
            base_wer=None if n == "base" else base_wer,
        )
    return ExperimentResult(
        reports=reports,
        transcripts=transcripts,
        candidates=candidates,
        wall_times=wall_times,
        references=references,
        bias_sizes=bias_sizes,
    )


# ----------------------------------------------------------------------
# seeded random hyperparameter search
# ----------------------------------------------------------------------

SEARCH_SPACES = {
    "C": (0.96, 0.9999),
    "lam": (0.005, 2.9),
    "delta": (0.1, 14.0),
    "gamma": (0.1, 14.0),
    "alpha": (0.005, 2.9),
    "beta": (0.005, 3.9),
    "sigma": (0.001, 14.0),
    "K": (1, 35),
}


def random_search(
    spec: CorpusSpec,
    bounds: dict | None = None,
    trials: int = 50,
    seed: int = 0,
    *,
    lm: NGramModel,
    alphabet: Alphabet | None = None,
    N: int = 100,
) -> tuple[DecodeConfig, float]:
    """Uniformly sample full-mode configs and keep the corpus-WER minimizer.

    Returns (best config, its WER). Deterministic given the seed; ties go
    to the earliest trial.
    """
    if trials < 1:
        raise BiasdecError("trials must be >= 1")
    bounds = {**SEARCH_SPACES, **(bounds or {})}
    rng = np.random.default_rng(seed)
    best_cfg = None
    best_wer = None
    for _ in range(trials):
        params = {}
        for name, (lo, hi) in bounds.items():
            if name == "K":
                params[name] = float(rng.integers(int(lo), int(hi) + 1))
            else:
                params[name] = float(rng.uniform(lo, hi))
        cfg = DecodeConfig(N=N, mode="full", **params)
        result = run_experiment(
            spec, cfg, modes=("full",), lm=lm, alphabet=alphabet
        )
        wer_value = result.reports["full"].wer
        if best_wer is None or wer_value < best_wer:
            best_cfg, best_wer = cfg, wer_value
    return best_cfg, best_wer


# ----------------------------------------------------------------------
# corpus construction
# ----------------------------------------------------------------------

COLORS = ("red", "blue", "green", "pink", "white", "black", "yellow", "brown")
OBJECTS = (
    "book", "pillow", "bottle", "cup", "lamp", "box", "chair", "frisbee",
    "towel", "plant", "mug", "vase", "basket", "remote", "ball", "blanket",
    "stack", "jacket", "candle", "mirror", "spatula", "ottoman", "futon",
    "whisk", "trivet", "colander", "doily",
)
PLACES = (
    "table", "shelf", "floor", "refrigerator", "bed", "counter", "corner",
    "kitchen", "desk", "window",
)

# object names a general-text language model would not know; they stay out
# of the training sentences so biasing is their only route to recovery
OOV_OBJECTS = frozenset(
    ("frisbee", "spatula", "ottoman", "futon", "whisk", "trivet", "colander",
     "doily")
)

_TEMPLATES = (
    "bring me the {np}",
    "take the {np}",
    "pick up the {np}",
    "put the {np} on the {place}",
    "take the {np} on the {place}",
    "fetch the {np} from the {place}",
    "bring me the {np} from the {place}",
    "move to the {place}",
    "go to the {place}",
    "move to the row of windows",
    "carry the {np} to the {place}",
)

# twin words used in ordinary text so the language model knows them
_TWIN_SENTENCES = (
    "read the note on the table",
    "i read a book in the kitchen",
    "she likes to read by the window",
    "read me the list again",
    "i hear the roar of the wind",
    "the roar came from the corner",
    "a loud roar filled the room",
)


def sample_reference(rng: np.random.Generator) -> tuple[str, tuple[str, ...]]:
    """One instruction and the content words a captioner could surface."""
    template = _TEMPLATES[int(rng.integers(len(_TEMPLATES)))]
    content: list[str] = []
    text = template
    if "{np}" in text:
        obj = OBJECTS[int(rng.integers(len(OBJECTS)))]
        if rng.random() < 0.5:
            color = COLORS[int(rng.integers(len(COLORS)))]
            np_text = f"{color} {obj}"
            content.extend([color, obj])
        else:
            np_text = obj
            content.append(obj)
        text = text.replace("{np}", np_text)
    if "{place}" in text:
        place = PLACES[int(rng.integers(len(PLACES)))]
        content.append(place)
        text = text.replace("{place}", place)
    if "row of windows" in text:
        content.extend(["row", "windows"])
    return text, tuple(content)


def build_corpus(
    size: int,
    seed: int = 0,
    *,
    noise: float = 0.5,
    frames_per_char: int = 3,
    miss_rate: float = 0.65,
    distractors: tuple[int, int] = (4, 8),
    confusion_pairs=None,
) -> CorpusSpec:
    """Generate a corpus of instructions with per-utterance bias lists.

    Each content word enters the biasing vocabulary with probability
    1 - miss_rate (a captioner does not see everything); distractor words
    from elsewhere in the scene are added on top.
    """
    if confusion_pairs is None:
        confusion_pairs = default_confusions()
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x65]))
    pool = sorted(set(COLORS) | set(OBJECTS) | set(PLACES))
    utterances = []
    for _ in range(size):
        reference, content = sample_reference(rng)
        spoken = set(reference.split())
        bias: list[str] = []
        for word in content:
            if word not in bias and rng.random() >= miss_rate:
                bias.append(word)
        available = [w for w in pool if w not in spoken and w not in bias]
        n_extra = int(rng.integers(distractors[0], distractors[1] + 1))
        extra = rng.choice(len(available), size=min(n_extra, len(available)),
                           replace=False)
        bias.extend(available[int(i)] for i in sorted(extra))
        utterances.append((reference, tuple(bias)))
    return CorpusSpec(
        utterances=tuple(utterances),
        noise=noise,
        confusion_pairs=tuple(confusion_pairs),
        seed=seed,
        frames_per_char=frames_per_char,
    )


def default_confusions() -> list[tuple[str, str]]:
    from importlib import resources

    text = resources.files("biasdec").joinpath("data/confusions.tsv").read_text(
        encoding="utf-8"
    )
    return read_confusions_text(text)


def read_confusions_text(text: str) -> list[tuple[str, str]]:
    pairs = []
    for line in text.split("\n"):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t") if "\t" in line else line.split(",")
        if len(parts) != 2:
            raise BiasdecError(f"confusion line needs two words, got {line!r}")
        pairs.append((parts[0].strip().lower(), parts[1].strip().lower()))
    return pairs


def write_corpus(utterances, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for reference, bias in utterances:
            fh.write(f"{reference}\t{','.join(bias)}\n")


def read_corpus(path) -> list[tuple[str, tuple[str, ...]]]:
    utterances = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line:
                continue
            reference, _, bias = line.partition("\t")
            words = tuple(w for w in bias.split(",") if w)
            utterances.append((reference, words))
    return utterances


# ----------------------------------------------------------------------
# language model estimation over the template vocabulary
# ----------------------------------------------------------------------


def training_sentences(seed: int = 11, count: int = 1800) -> list[str]:
    """Text for the corpus language model.

    Every template word occurs and the confusable real words occur, but
    the OOV object names are deliberately left out so those biasing
    targets stay out of vocabulary.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x1a]))
    sentences: list[str] = []
    while len(sentences) < count:
        text, _ = sample_reference(rng)
        if OOV_OBJECTS & set(text.split()):
            continue
        sentences.append(text)
    sentences.extend(_TWIN_SENTENCES * 3)
    for word in sorted(set(COLORS) | set(OBJECTS) | set(PLACES)):
        if word not in OOV_OBJECTS:
            sentences.append(f"there is a {word} here")
    return sentences


def estimate_arpa(
    sentences,
    order: int = 3,
    discount: float = 0.5,
    unk_mass: float = 0.01,
) -> str:
    """Estimate a backoff model with absolute discounting; returns ARPA text.

    Conditional distributions normalize to 1 over the vocabulary plus the
    unknown word, which receives a fixed unigram mass.
    """
    from .lm import BOS, EOS, UNK

    tokenized = [s.split() if isinstance(s, str) else list(s) for s in sentences]
    counts: list[dict[tuple[str, ...], int]] = [{} for _ in range(order)]
    for tokens in tokenized:
        padded = [BOS] + [t.lower() for t in tokens] + [EOS]
        for n in range(1, order + 1):
            for i in range(len(padded) - n + 1):
                gram = tuple(padded[i:i + n])
                if n == 1 and gram == (BOS,):
                    continue  # <s> is never predicted
                counts[n - 1][gram] = counts[n - 1].get(gram, 0) + 1

    total = sum(counts[0].values())
    unigrams: dict[str, float] = {
        w: (1.0 - unk_mass) * c / total for (w,), c in counts[0].items()
    }
    unigrams[UNK] = unk_mass

    # tables[n-1]: gram -> (prob, backoff weight); probabilities linear here
    tables: list[dict[tuple[str, ...], tuple[float, float]]] = [
        {} for _ in range(order)
    ]

    def prob(n: int, gram: tuple[str, ...]) -> float:
        """Backoff probability under the tables built so far."""
        entry = tables[n - 1].get(gram)
        if entry is not None:
            return entry[0]
        if n == 1:
            return unigrams[UNK]
        ctx_entry = tables[n - 2].get(gram[:-1])
        bow = ctx_entry[1] if ctx_entry is not None else 1.0
        return bow * prob(n - 1, gram[1:])

    for w, p in unigrams.items():
        tables[0][(w,)] = (p, 1.0)
    tables[0][(BOS,)] = (1e-99, 1.0)

    for n in range(2, order + 1):
        context_totals: dict[tuple[str, ...], int] = {}
        context_seen: dict[tuple[str, ...], list[tuple[str, ...]]] = {}
        for gram, c in counts[n - 1].items():
            ctx = gram[:-1]
            context_totals[ctx] = context_totals.get(ctx, 0) + c
            context_seen.setdefault(ctx, []).append(gram)
        for ctx, grams in context_seen.items():
            ctx_total = context_totals[ctx]
            for gram in grams:
                p = (counts[n - 1][gram] - discount) / ctx_total
                tables[n - 1][gram] = (p, 1.0)
            reserved = discount * len(grams) / ctx_total
            covered = sum(prob(n - 1, g[1:]) for g in grams)
            bow = reserved / max(1.0 - covered, 1e-12)
            p_ctx, _ = tables[n - 2][ctx]
            tables[n - 2][ctx] = (p_ctx, bow)

    lines = ["\\data\\"]
    for n in range(1, order + 1):
        lines.append(f"ngram {n}={len(tables[n - 1])}")
    for n in range(1, order + 1):
        lines.append("")
        lines.append(f"\\{n}-grams:")
        for gram in sorted(tables[n - 1]):
            p, bow = tables[n - 1][gram]
            lp = repr(float(np.log10(p)))
            text = " ".join(gram)
            if n < order and bow != 1.0:
                lines.append(f"{lp}\t{text}\t{repr(float(np.log10(bow)))}")
            else:
                lines.append(f"{lp}\t{text}")
    lines.append("")
    lines.append("\\end\\")
    lines.append("")
    return "\n".join(lines)


def default_lm_text(seed: int = 11) -> str:
    """ARPA text of the shipped template-vocabulary language model."""
    return estimate_arpa(training_sentences(seed))
