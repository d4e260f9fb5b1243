"""Render analysis reports as matplotlib figures.

Used by the ``analyze`` subcommand to drop PNGs next to the JSON/TSV
output; every function writes one file and returns its path.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_CATEGORY_LABELS = {
    "single_byte": "single byte",
    "cjk_single_char": "CJK char",
    "cjk_multi_char": "CJK multi-char",
    "alpha_multibyte": "alphabetic",
    "invalid_utf8": "invalid fragment",
    "other": "other",
}


def _new_axes(title):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.set_title(title)
    ax.grid(True, axis="y", alpha=0.3)
    return fig, ax


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_composition(fractions: dict, path, title="Vocabulary composition"):
    fig, ax = _new_axes(title)
    labels = [_CATEGORY_LABELS.get(k, k) for k in fractions]
    values = [100.0 * v for v in fractions.values()]
    ax.bar(labels, values, color="#4878a8")
    ax.set_ylabel("share of symbols (%)")
    ax.tick_params(axis="x", rotation=30)
    return _finish(fig, path)


def plot_alignment(counts: dict, path, title="Alignment error breakdown"):
    fig, ax = _new_axes(title)
    keys = ["deletions", "substitutions", "insertions"]
    ax.bar(keys, [counts.get(k, 0) for k in keys], color="#a85048")
    ax.set_ylabel("count")
    return _finish(fig, path)


def plot_length_histogram(lengths, path, title="Hypothesis lengths"):
    fig, ax = _new_axes(title)
    upper = max(lengths) if lengths else 1
    ax.hist(lengths, bins=min(50, max(upper, 1)), color="#48a878")
    ax.set_xlabel("symbols per hypothesis")
    ax.set_ylabel("hypotheses")
    return _finish(fig, path)


def plot_confusion(fractions: dict, path, title="Wrong-language rate"):
    fig, ax = _new_axes(title)
    langs = list(fractions)
    ax.bar(langs, [100.0 * fractions[k] for k in langs], color="#7848a8")
    ax.set_ylabel("utterances labelled as the other language (%)")
    return _finish(fig, path)


def render_report(report: dict, outdir, lengths=None) -> list[str]:
    """Write one figure per section present in an analyze report."""
    os.makedirs(outdir, exist_ok=True)
    written = []
    if "composition" in report:
        written.append(
            plot_composition(
                report["composition"]["fractions"],
                os.path.join(outdir, "composition.png"),
            )
        )
    if "alignment" in report:
        written.append(
            plot_alignment(
                report["alignment"], os.path.join(outdir, "alignment.png")
            )
        )
    if lengths:
        written.append(
            plot_length_histogram(
                lengths, os.path.join(outdir, "hyp_lengths.png")
            )
        )
    if "confusion" in report:
        written.append(
            plot_confusion(
                report["confusion"], os.path.join(outdir, "confusion.png")
            )
        )
    return written
