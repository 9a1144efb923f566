"""Tabular output (CSV or JSON) and optional PNG figures for command results."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .fidelity import marginal_histogram
from .schema import Dataset


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            raise ValueError(f"refusing to emit non-finite value {v}")
        return v
    return v


def render_table(header: Sequence[str], rows: Iterable[Sequence], fmt: str = "csv") -> str:
    rows = [[_cell(v) for v in row] for row in rows]
    if fmt == "json":
        return json.dumps([dict(zip(header, row)) for row in rows], indent=1) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown output format {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def write_table(path: Optional[Union[str, Path]], header, rows, fmt: str = "csv") -> str:
    """Render and, if ``path`` is given, write the table; returns the text."""
    text = render_table(header, rows, fmt)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def histogram_rows(edges, counts):
    return [(float(lo), float(hi), int(n)) for lo, hi, n in zip(edges[:-1], edges[1:], counts)]


HISTOGRAM_HEADER = ("binLeft", "binRight", "count")


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_surface(surface, path: Union[str, Path]) -> None:
    """Filled contour of the log-likelihood over the (alpha, beta) grid."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    if surface.alphas.size > 1 and surface.betas.size > 1:
        cs = ax.contourf(surface.betas, surface.alphas, surface.values, levels=30)
        fig.colorbar(cs, ax=ax, label="log-likelihood")
    i, k = np.unravel_index(int(np.argmax(surface.values)), surface.values.shape)
    ax.plot(surface.betas[k], surface.alphas[i], "w*", markersize=12)
    ax.set_xlabel("beta")
    ax.set_ylabel("alpha")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def plot_histogram(edges, counts, path: Union[str, Path], xlabel: str = "log joint probability",
                   threshold: Optional[float] = None) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.stairs(counts, edges, fill=True)
    if threshold is not None:
        ax.axvline(threshold, color="r", linestyle="--", label="threshold")
        ax.legend()
    ax.set_xlabel(xlabel)
    ax.set_ylabel("rows")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def plot_marginals(original: Dataset, generated: Dataset, path: Union[str, Path]) -> None:
    """Side-by-side bar charts of each attribute's marginal in both datasets."""
    plt = _pyplot()
    d = original.n_cols
    cols = min(d, 4)
    nrows = math.ceil(d / cols)
    fig, axes = plt.subplots(nrows, cols, figsize=(3 * cols, 2.2 * nrows), squeeze=False)
    for j in range(d):
        ax = axes[j // cols][j % cols]
        a = marginal_histogram(original, j)
        b = marginal_histogram(generated, j)
        x = np.arange(a.size)
        ax.bar(x - 0.2, a, width=0.4, label="original")
        ax.bar(x + 0.2, b, width=0.4, label="generated")
        ax.set_title(original.schema[j].name, fontsize=9)
        ax.set_xticks([])
    for j in range(d, nrows * cols):
        axes[j // cols][j % cols].axis("off")
    axes[0][0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
