"""Comparing a generated dataset to the original: marginals and pairwise association."""

from __future__ import annotations

import itertools

import numpy as np

from .schema import Dataset

CONTINUOUS_BINS = 10


def marginal_histogram(dataset: Dataset, j: int, bins: int = CONTINUOUS_BINS) -> np.ndarray:
    """Empirical distribution of column ``j``: category frequencies, or equal-width bins on [0, 1]."""
    spec = dataset.schema[j]
    col = dataset.values[:, j]
    col = col[~np.isnan(col)]
    if spec.is_discrete:
        counts = np.bincount(col.astype(int), minlength=len(spec.values)).astype(float)
    else:
        counts = np.histogram(dataset.normalized_column(j)[~np.isnan(dataset.values[:, j])],
                              bins=bins, range=(0.0, 1.0))[0].astype(float)
    return counts / counts.sum()


def marginal_tv(a: Dataset, b: Dataset, bins: int = CONTINUOUS_BINS) -> np.ndarray:
    """Total-variation distance between the two datasets' marginals, per attribute."""
    return np.array([0.5 * np.abs(marginal_histogram(a, j, bins) - marginal_histogram(b, j, bins)).sum()
                     for j in range(a.n_cols)])


def cramers_v(x: np.ndarray, y: np.ndarray, kx: int, ky: int) -> float:
    table = np.zeros((kx, ky))
    np.add.at(table, (x.astype(int), y.astype(int)), 1)
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    r, k = table.shape
    if min(r, k) < 2:
        return 0.0
    n = table.sum()
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / n
    chi2 = ((table - expected) ** 2 / expected).sum()
    return float(np.sqrt(chi2 / (n * (min(r, k) - 1))))


def _coded(dataset: Dataset, j: int) -> np.ndarray:
    spec = dataset.schema[j]
    if spec.is_discrete:
        k = len(spec.values)
        return dataset.values[:, j] / max(k - 1, 1)
    return dataset.normalized_column(j)


def association(dataset: Dataset, i: int, j: int) -> float:
    """Cramer's V for two discrete columns, otherwise Pearson correlation of normalized codes."""
    si, sj = dataset.schema[i], dataset.schema[j]
    keep = ~(np.isnan(dataset.values[:, i]) | np.isnan(dataset.values[:, j]))
    if si.is_discrete and sj.is_discrete:
        return cramers_v(dataset.values[keep, i], dataset.values[keep, j], len(si.values), len(sj.values))
    x, y = _coded(dataset, i)[keep], _coded(dataset, j)[keep]
    if x.std() == 0 or y.std() == 0:
        return 0.0
    return float(np.corrcoef(x, y)[0, 1])


def strongest_pairs(dataset: Dataset, top: int = 10) -> list:
    """The ``top`` attribute pairs with the largest absolute association, strongest first."""
    scored = [(abs(association(dataset, i, j)), i, j) for i, j in itertools.combinations(range(dataset.n_cols), 2)]
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    return [(i, j) for _, i, j in scored[:top]]
