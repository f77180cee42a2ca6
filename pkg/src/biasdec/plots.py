"""Report figures rendered next to the delimited eval output."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import ExperimentResult


def apply_style():
    plt.rcParams.update({
        "figure.figsize": (6.0, 3.6),
        "figure.dpi": 120,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "axes.axisbelow": True,
        "font.size": 9,
        "legend.fontsize": 8,
    })


def save_wer_ta_figure(result: ExperimentResult, path) -> str:
    """Grouped bars of WER and transcription accuracy per decoder mode."""
    apply_style()
    modes = list(result.reports)
    wer_pct = [100.0 * result.reports[m].wer for m in modes]
    ta_pct = [result.reports[m].ta for m in modes]
    x = np.arange(len(modes))
    fig, ax = plt.subplots()
    ax.bar(x - 0.2, wer_pct, width=0.4, label="WER %", color="#c44e52")
    ax.bar(x + 0.2, ta_pct, width=0.4, label="TA %", color="#4c72b0")
    ax.set_xticks(x, modes, rotation=20)
    ax.set_ylabel("percent")
    ax.set_title("error rate and exact-match accuracy by mode")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return os.fspath(path)


def save_candidates_figure(result: ExperimentResult, path) -> str:
    """Mean candidate-generation counter per mode (decode effort proxy)."""
    apply_style()
    modes = list(result.candidates)
    means = [float(np.mean(result.candidates[m])) for m in modes]
    x = np.arange(len(modes))
    fig, ax = plt.subplots()
    ax.bar(x, means, width=0.6, color="#55a868")
    ax.set_xticks(x, modes, rotation=20)
    ax.set_ylabel("candidates per utterance")
    ax.set_yscale("log")
    ax.set_title("beam extension work by mode")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return os.fspath(path)


def save_report_figures(result: ExperimentResult, out_dir) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    return [
        save_wer_ta_figure(result, os.path.join(out_dir, "wer_ta.png")),
        save_candidates_figure(result, os.path.join(out_dir, "candidates.png")),
    ]
