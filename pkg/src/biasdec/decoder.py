"""CTC prefix beam search with contextual biasing.

The search extends collapsed prefixes under the standard CTC blank/repeat
rules, keeping separate blank- and non-blank-terminated log masses per
prefix. On top of that sit four optional behaviors, switched by the
config mode:

* cumulative-mass vocabulary sampling per frame,
* n-gram shallow fusion accumulated once per completed word,
* word-boundary rescoring against the language model vocabulary and the
  biasing trie,
* a non-greedy beam swap that retains low-ranked candidates whose
  in-progress word is still a live trie path.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .alphabet import Alphabet
from .config import DecodeConfig
from .errors import BiasdecError, DimensionMismatch, EmptyBeam
from .lm import LmState, NGramModel
from .logits import LogitMatrix
from .trie import BiasTrie, TrieCursor, build_trie

NEG_INF = -math.inf


def logaddexp(a: float, b: float) -> float:
    """log(exp(a) + exp(b)) without leaving log space."""
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


@dataclass(frozen=True, slots=True)
class Hypothesis:
    """One decoding prefix and everything needed to score and extend it."""

    prefix: str = ""
    p_b: float = 0.0         # ln mass of paths ending in blank
    p_nb: float = NEG_INF    # ln mass of paths ending in the final symbol
    adjust: float = 0.0      # accumulated word-boundary rescoring delta
    lm_state: LmState = field(default_factory=LmState)
    lm_sum: float = 0.0      # accumulated conditional word log-probs
    cursor: TrieCursor = field(default_factory=lambda: TrieCursor(None, 0))
    word: str = ""           # in-progress partial word
    words_done: int = 0
    last_word: str = ""

    def ctc_mass(self) -> float:
        return logaddexp(self.p_b, self.p_nb)


@dataclass
class BeamState:
    hypotheses: list[Hypothesis]
    frame: int


@dataclass
class DecodeStats:
    candidates: int = 0       # hypothesis-extension operations performed
    frames: int = 0
    wall_time: float = 0.0
    boundary_events: int = 0  # word completions rescored in surviving paths


@dataclass
class DecodeResult:
    transcripts: list[str]
    scores: list[float]
    stats: DecodeStats


def sample_vocab(dist: np.ndarray, C: float) -> np.ndarray:
    """Indices of the smallest probability-sorted prefix with mass >= C.

    C=1 keeps every index with nonzero probability; zero-probability
    indices are never returned.
    """
    dist = np.asarray(dist, dtype=np.float64)
    order = np.argsort(-dist, kind="stable")
    if C >= 1.0:
        return order[dist[order] > 0.0]
    csum = np.cumsum(dist[order])
    m = min(int(np.searchsorted(csum, C, side="left")) + 1, len(order))
    chosen = order[:m]
    return chosen[dist[chosen] > 0.0]


def score(h: Hypothesis, alpha: float, beta: float) -> float:
    """Ranking score: CTC mass, weighted LM mass, word bonus, bias delta."""
    return h.ctc_mass() + _word_terms(h, alpha, beta)


def _word_terms(h: Hypothesis, alpha: float, beta: float) -> float:
    return alpha * h.lm_sum + beta * math.log(h.words_done + 1) + h.adjust


def rescore_boundary(
    h: Hypothesis,
    cfg: DecodeConfig,
    lm: NGramModel | None,
    trie: BiasTrie,
) -> Hypothesis:
    """Complete the in-progress word of `h` and apply its bias rescoring.

    The adjustment depends on membership of the completed word in the LM
    vocabulary V and in the biasing trie:

    * in V and in trie: boost by -lambda times its unigram log-probability
      (rarer words earn a bigger boost);
    * out of V and out of trie: penalize by delta;
    * out of V but in trie: boost by gamma;
    * in V but not in trie: unchanged, the LM already scored it.

    In wb mode the whole table is replaced by a flat +gamma for any
    completed trie word. The LM fusion term accumulates here, once per
    completed word, and the trie cursor returns to the root.
    """
    word = h.word
    if not word:
        return h
    adjust = h.adjust
    in_trie = trie.contains_word(word)
    if cfg.mode == "wb":
        if in_trie:
            adjust += cfg.gamma
    else:
        in_v = lm.in_vocab(word) if lm is not None else False
        if in_v and in_trie:
            adjust -= cfg.lam * lm.unigram_logprob(word)
        elif not in_v and not in_trie:
            adjust -= cfg.delta
        elif not in_v and in_trie:
            adjust += cfg.gamma
    if lm is not None:
        lm_sum = h.lm_sum + lm.cond_logprob(word, h.lm_state)
        lm_state = lm.extend_state(h.lm_state, word)
    else:
        lm_sum = h.lm_sum
        lm_state = h.lm_state
    return replace(
        h,
        adjust=adjust,
        lm_sum=lm_sum,
        lm_state=lm_state,
        cursor=trie.start(),
        word="",
        words_done=h.words_done + 1,
        last_word=word,
    )


def rescoring_likelihood(s_c: float, tn: int, nl: float, sigma: float) -> float:
    """Lookahead score of a prunable candidate: s_c + sigma*ln(tn/(1+nl)).

    A dead cursor or an unstarted word (tn=0) can never be rescored, so
    the likelihood is -inf and the candidate is never swapped in.
    """
    if tn <= 0 or math.isinf(nl):
        return NEG_INF
    return s_c + sigma * math.log(tn / (1.0 + nl))


def swap_count(K: float, N: int) -> int:
    """k = round(K% of N), half rounding up."""
    return int(K * N / 100.0 + 0.5)


def bias_aware_prune(
    candidates: list[tuple[float, Hypothesis]],
    N: int,
    K: float,
    sigma: float,
    trie: BiasTrie,
    frame: int = 0,
) -> BeamState:
    """Keep the top N candidates, swapping the bottom k for prunable
    candidates ranked by rescoring likelihood.

    `candidates` carry their already-computed scores; this never changes
    a score, only the survivor set. The top N-k by score always survive.
    """
    ranked = sorted(candidates, key=lambda sc: (-sc[0], sc[1].prefix))
    k = swap_count(K, N)
    survivors = _swap_partition(
        ranked,
        N,
        k,
        lambda sc: rescoring_likelihood(sc[0], *trie.stats(sc[1].cursor)[:2], sigma),
    )
    return BeamState(hypotheses=[h for _, h in survivors], frame=frame)


def _swap_partition(ranked, N, k, psi_of):
    if len(ranked) <= N:
        return ranked
    if k <= 0:
        return ranked[:N]
    forward = ranked[:N]
    prunable = ranked[N:]
    finite = [(psi_of(item), item) for item in prunable]
    finite = [pair for pair in finite if pair[0] != NEG_INF]
    if not finite:
        return forward
    finite.sort(key=lambda pair: -pair[0])
    taken = finite[:k]
    return forward[: N - len(taken)] + [item for _, item in taken]


def decode_greedy(logits: LogitMatrix, alphabet: Alphabet) -> str:
    """Frame-wise argmax with CTC collapse: merge repeats, drop blanks."""
    if logits.A != len(alphabet):
        raise DimensionMismatch(
            f"matrix has {logits.A} columns, alphabet has {len(alphabet)} symbols"
        )
    best = np.argmax(logits.frames, axis=1)
    out = []
    prev = -1
    for idx in best:
        if idx != prev and idx != alphabet.blank_index:
            out.append(alphabet.symbol_of(int(idx)))
        prev = idx
    return "".join(out)


class _Entry:
    """A live beam hypothesis plus its cached score components."""

    __slots__ = ("hyp", "wt", "boundary")

    def __init__(self, hyp: Hypothesis, wt: float):
        self.hyp = hyp
        self.wt = wt
        self.boundary: tuple[Hypothesis, float] | None = None


def decode(
    logits: LogitMatrix,
    alphabet: Alphabet,
    lm: NGramModel | None = None,
    trie: BiasTrie | None = None,
    cfg: DecodeConfig | None = None,
) -> DecodeResult:
    """Run the beam search over a posterior matrix.

    Parameters
    ----------
    logits : LogitMatrix
        Per-frame probability rows; column count must match the alphabet.
    alphabet : Alphabet
        Symbol table supplying the blank and word delimiter.
    lm : NGramModel or None
        Backoff language model; required whenever the effective config
        uses alpha, lambda or delta.
    trie : BiasTrie or None
        Biasing vocabulary; None behaves as an empty vocabulary.
    cfg : DecodeConfig
        Hyperparameters and mode. Simpler modes neutralize the fields
        they ignore (see DecodeConfig.effective).

    Returns
    -------
    DecodeResult
        Top-N transcripts with non-increasing scores, plus counters.
        Identical inputs produce identical results; score ties break
        lexicographically by prefix.
    """
    cfg = cfg or DecodeConfig()
    if logits.A != len(alphabet):
        raise DimensionMismatch(
            f"matrix has {logits.A} columns, alphabet has {len(alphabet)} symbols"
        )
    if cfg.mode == "greedy":
        return _greedy_result(logits, alphabet)
    eff = cfg.effective()
    if lm is None and (eff.alpha != 0.0 or eff.lam != 0.0 or eff.delta != 0.0):
        raise BiasdecError(f"mode {cfg.mode!r} needs a language model")
    trie = trie if trie is not None else build_trie([])

    alpha, beta = eff.alpha, eff.beta
    blank = alphabet.blank_index
    delimiter = alphabet.delimiter
    symbols = alphabet.symbols
    k = swap_count(eff.K, eff.N)

    start = time.perf_counter()
    stats = DecodeStats(frames=logits.T)
    init = Hypothesis(cursor=trie.start(), lm_state=_initial_state(lm, eff))
    beam: dict[str, _Entry] = {"": _Entry(init, _word_terms(init, alpha, beta))}

    for t in range(logits.T):
        row = logits.frames[t].astype(np.float64)
        sampled = sample_vocab(row, eff.C)
        with np.errstate(divide="ignore"):
            lnrow = np.log(row)
        ext = [(int(i), symbols[int(i)], float(lnrow[int(i)])) for i in sampled]
        stats.candidates += len(beam) * len(ext)

        # candidate records: prefix -> [p_b, p_nb, parent entry, extension char]
        cands: dict[str, list] = {}
        for prefix, entry in beam.items():
            hyp = entry.hyp
            pb, pnb = hyp.p_b, hyp.p_nb
            total = logaddexp(pb, pnb)
            last = prefix[-1] if prefix else ""
            for idx, ch, lp in ext:
                if idx == blank:
                    rec = cands.get(prefix)
                    if rec is None:
                        rec = cands[prefix] = [NEG_INF, NEG_INF, entry, None]
                    rec[0] = logaddexp(rec[0], total + lp)
                elif ch == last:
                    rec = cands.get(prefix)
                    if rec is None:
                        rec = cands[prefix] = [NEG_INF, NEG_INF, entry, None]
                    rec[1] = logaddexp(rec[1], pnb + lp)
                    if pb != NEG_INF:
                        ext_prefix = prefix + ch
                        rec2 = cands.get(ext_prefix)
                        if rec2 is None:
                            rec2 = cands[ext_prefix] = [NEG_INF, NEG_INF, entry, ch]
                        rec2[1] = logaddexp(rec2[1], pb + lp)
                else:
                    ext_prefix = prefix + ch
                    rec2 = cands.get(ext_prefix)
                    if rec2 is None:
                        rec2 = cands[ext_prefix] = [NEG_INF, NEG_INF, entry, ch]
                    rec2[1] = logaddexp(rec2[1], total + lp)

        if not cands:
            raise EmptyBeam(f"no candidates at frame {t}; C={eff.C} sampled nothing")

        beam = _prune_records(cands, eff, k, alpha, beta, lm, trie, stats, delimiter)

    final: list[tuple[float, Hypothesis]] = []
    for entry in beam.values():
        hyp = entry.hyp
        if hyp.word:
            hyp = rescore_boundary(hyp, eff, lm, trie)
            stats.boundary_events += 1
        final.append((score(hyp, alpha, beta), hyp))
    final.sort(key=lambda sc: (-sc[0], sc[1].prefix))
    top = final[: eff.N]

    stats.wall_time = time.perf_counter() - start
    return DecodeResult(
        transcripts=[h.prefix for _, h in top],
        scores=[s for s, _ in top],
        stats=stats,
    )


def _initial_state(lm: NGramModel | None, eff: DecodeConfig) -> LmState:
    if lm is not None:
        return lm.start_state(with_bos=eff.lm_boundaries)
    return LmState()


def _prune_records(cands, eff, k, alpha, beta, lm, trie, stats, delimiter):
    """Rank candidate records, apply the lookahead swap, materialize survivors."""
    scored = []
    for prefix, rec in cands.items():
        pb, pnb, entry, ch = rec
        ctc = logaddexp(pb, pnb)
        if ch is None or ch != delimiter:
            wt = entry.wt
        else:
            wt = _boundary(entry, eff, lm, trie, alpha, beta)[1]
        scored.append((ctc + wt, prefix, rec))
    scored.sort(key=lambda item: (-item[0], item[1]))

    if k > 0 and trie.word_count > 0:
        survivors = _swap_partition(
            scored, eff.N, k, lambda item: _record_psi(item, eff.sigma, trie, delimiter)
        )
    else:
        survivors = scored[: eff.N]

    beam: dict[str, _Entry] = {}
    for _, prefix, rec in survivors:
        pb, pnb, entry, ch = rec
        hyp = entry.hyp
        if ch is None:
            new_hyp = _with_masses(hyp, prefix, pb, pnb, hyp.cursor, hyp.word)
            new_entry = _Entry(new_hyp, entry.wt)
            new_entry.boundary = entry.boundary  # word state unchanged
        elif ch == delimiter:
            base, wt = _boundary(entry, eff, lm, trie, alpha, beta)
            if base.words_done > hyp.words_done:
                stats.boundary_events += 1
            new_entry = _Entry(
                _with_masses(base, prefix, pb, pnb, base.cursor, base.word), wt
            )
        else:
            new_hyp = _with_masses(
                hyp, prefix, pb, pnb, trie.advance(hyp.cursor, ch), hyp.word + ch
            )
            new_entry = _Entry(new_hyp, entry.wt)
        beam[prefix] = new_entry
    return beam


def _with_masses(h: Hypothesis, prefix, pb, pnb, cursor, word) -> Hypothesis:
    return Hypothesis(
        prefix=prefix,
        p_b=pb,
        p_nb=pnb,
        adjust=h.adjust,
        lm_state=h.lm_state,
        lm_sum=h.lm_sum,
        cursor=cursor,
        word=word,
        words_done=h.words_done,
        last_word=h.last_word,
    )


def _boundary(entry: _Entry, eff, lm, trie, alpha, beta):
    if entry.boundary is None:
        hyp = rescore_boundary(entry.hyp, eff, lm, trie)
        entry.boundary = (hyp, _word_terms(hyp, alpha, beta))
    return entry.boundary


def _record_psi(item, sigma, trie, delimiter):
    s_c, _, rec = item
    _, _, entry, ch = rec
    if ch is None:
        cursor = entry.hyp.cursor
    elif ch == delimiter:
        return NEG_INF  # fresh word boundary: nothing traversed yet
    else:
        cursor = trie.advance(entry.hyp.cursor, ch)
    tn, nl, _ = trie.stats(cursor)
    return rescoring_likelihood(s_c, tn, nl, sigma)


def _greedy_result(logits: LogitMatrix, alphabet: Alphabet) -> DecodeResult:
    start = time.perf_counter()
    transcript = decode_greedy(logits, alphabet)
    path_score = float(np.sum(np.log(np.max(logits.frames, axis=1)))) if logits.T else 0.0
    stats = DecodeStats(
        candidates=logits.T, frames=logits.T, wall_time=time.perf_counter() - start
    )
    return DecodeResult(transcripts=[transcript], scores=[path_score], stats=stats)
