"""External clustering-quality scores against reference labels."""

from __future__ import annotations

import numpy as np


def contingency(pred, truth) -> np.ndarray:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValueError("label vectors must be 1-D and of equal length")
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    table = np.zeros((t.max(initial=-1) + 1, p.max(initial=-1) + 1))
    np.add.at(table, (t, p), 1)
    return table


def _entropy(counts: np.ndarray) -> float:
    n = counts.sum()
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def _conditional_entropy(table: np.ndarray) -> float:
    """H(rows | columns) for a contingency table."""
    n = table.sum()
    col = table.sum(axis=0)
    nz = table > 0
    ratio = table[nz] / np.broadcast_to(col, table.shape)[nz]
    return float(-(table[nz] / n * np.log(ratio)).sum())


def homogeneity_completeness(pred, truth):
    table = contingency(pred, truth)
    if table.sum() == 0:
        return 1.0, 1.0
    h_c = _entropy(table.sum(axis=1))
    h_k = _entropy(table.sum(axis=0))
    hom = 1.0 if h_c == 0 else 1.0 - _conditional_entropy(table) / h_c
    com = 1.0 if h_k == 0 else 1.0 - _conditional_entropy(table.T) / h_k
    return hom, com


def v_measure(pred, truth) -> float:
    """Harmonic mean of homogeneity and completeness."""
    hom, com = homogeneity_completeness(pred, truth)
    if hom + com == 0:
        return 0.0
    return 2.0 * hom * com / (hom + com)


def _pair_counts(pred, truth):
    table = contingency(pred, truth)
    n = table.sum()
    both = (table * (table - 1)).sum() / 2
    same_pred = (table.sum(axis=0) * (table.sum(axis=0) - 1)).sum() / 2
    same_truth = (table.sum(axis=1) * (table.sum(axis=1) - 1)).sum() / 2
    total = n * (n - 1) / 2
    return both, same_pred, same_truth, total


def rand_index(pred, truth) -> float:
    """Fraction of object pairs on which the two partitions agree."""
    both, same_pred, same_truth, total = _pair_counts(pred, truth)
    if total == 0:
        return 1.0
    agree = total - same_pred - same_truth + 2 * both
    return float(agree / total)


def pairwise_f_measure(pred, truth) -> float:
    """F1 of pair-level precision and recall, treating same-cluster pairs as positives."""
    both, same_pred, same_truth, _ = _pair_counts(pred, truth)
    if same_pred == 0 and same_truth == 0:
        return 1.0
    if same_pred == 0 or same_truth == 0 or both == 0:
        return 0.0
    precision = both / same_pred
    recall = both / same_truth
    return float(2 * precision * recall / (precision + recall))
