"""Word error rate, relative reduction, and exact-match accuracy."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .errors import BaseZero, EmptyCorpus


@dataclass(frozen=True)
class EditCounts:
    substitutions: int = 0
    insertions: int = 0
    deletions: int = 0
    reference_words: int = 0

    def __add__(self, other: "EditCounts") -> "EditCounts":
        return EditCounts(
            self.substitutions + other.substitutions,
            self.insertions + other.insertions,
            self.deletions + other.deletions,
            self.reference_words + other.reference_words,
        )

    @property
    def errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions


@dataclass(frozen=True)
class EvalReport:
    wer: float                 # (S+I+D) / reference words, as a ratio
    werr: float | None         # percent reduction vs. a baseline, if any
    ta: float                  # exact-match transcription accuracy, percent
    counts: EditCounts


def _tokens(text) -> list[str]:
    if isinstance(text, str):
        return text.lower().split()
    return [w.lower() for w in text]


def wer(reference, hypothesis) -> tuple[float, EditCounts]:
    """Word error rate with unit edit costs.

    Comparison is case-folded and whitespace-normalized. An empty
    reference against a nonempty hypothesis has no defined rate; the
    insertion count is reported as the rate, with a warning.
    """
    ref = _tokens(reference)
    hyp = _tokens(hypothesis)
    counts = edit_counts(ref, hyp)
    if not ref:
        if hyp:
            warnings.warn(
                "empty reference: reporting insertion count as the error rate",
                stacklevel=2,
            )
            return float(counts.insertions), counts
        return 0.0, counts
    return counts.errors / len(ref), counts


def edit_counts(ref: list[str], hyp: list[str]) -> EditCounts:
    """Levenshtein alignment counts via dynamic programming with backtrace."""
    n, m = len(ref), len(hyp)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row = dist[i]
        prev = dist[i - 1]
        ri = ref[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (ri != hyp[j - 1])
            row[j] = min(sub, prev[j] + 1, row[j - 1] + 1)

    subs = ins = dels = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (
            ref[i - 1] != hyp[j - 1]
        ):
            subs += ref[i - 1] != hyp[j - 1]
            i -= 1
            j -= 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return EditCounts(subs, ins, dels, n)


def werr(base_wer: float, model_wer: float) -> float:
    """Percent reduction of `model_wer` relative to `base_wer`."""
    if base_wer <= 0.0:
        raise BaseZero(f"baseline WER must be positive, got {base_wer}")
    return 100.0 * (base_wer - model_wer) / base_wer


def ta(pairs) -> float:
    """Exact-match accuracy percentage over (reference, hypothesis) pairs."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyCorpus("transcription accuracy needs at least one pair")
    matches = sum(
        1 for ref, hyp in pairs if _tokens(ref) == _tokens(hyp)
    )
    return 100.0 * matches / len(pairs)


def corpus_report(pairs, base_wer: float | None = None) -> EvalReport:
    """Aggregate WER/TA over a corpus of (reference, hypothesis) pairs."""
    pairs = list(pairs)
    total = EditCounts()
    for ref, hyp in pairs:
        _, counts = wer(ref, hyp)
        total = total + counts
    rate = total.errors / total.reference_words if total.reference_words else 0.0
    reduction = None
    if base_wer is not None and base_wer > 0.0:
        reduction = werr(base_wer, rate)
    return EvalReport(wer=rate, werr=reduction, ta=ta(pairs), counts=total)


CSV_HEADER = "model,wer,werr,ta"


def format_csv(reports: dict[str, EvalReport]) -> str:
    """Fixed-header comma-separated report, one row per model."""
    lines = [CSV_HEADER]
    for model, rep in reports.items():
        werr_field = "" if rep.werr is None else f"{rep.werr:.4f}"
        lines.append(f"{model},{rep.wer:.6f},{werr_field},{rep.ta:.4f}")
    return "\n".join(lines) + "\n"


def format_kv(reports: dict[str, EvalReport]) -> str:
    """Line-oriented key=value report."""
    lines = []
    for model, rep in reports.items():
        lines.append(f"model={model}")
        lines.append(f"wer={rep.wer:.6f}")
        lines.append("werr=" if rep.werr is None else f"werr={rep.werr:.4f}")
        lines.append(f"ta={rep.ta:.4f}")
        c = rep.counts
        lines.append(
            "counts="
            f"S:{c.substitutions},I:{c.insertions},D:{c.deletions},"
            f"N:{c.reference_words}"
        )
        lines.append("")
    return "\n".join(lines)
