"""Applications built on the estimates: prediction, imputation, outliers, generation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection, Optional, Sequence

import numpy as np

from .estimation import (ConditionalPMF, conditional_mean, conditional_pmf, row_log_probs,
                         solve_target_blocks)
from .model import EigenModel
from .sampling import GibbsConfig, RandomSource, _fill, _unclamped_order, gibbs_run, sample_rows
from .schema import Dataset, basis_centers, denormalize_value


def _evidence_of(point: np.ndarray, exclude: Collection[int]) -> list:
    return [j for j in range(point.size) if j not in exclude and not np.isnan(point[j])]


def predict_pmf(model: EigenModel, point: Sequence[float], target: int,
                loo: Optional[int] = None) -> ConditionalPMF:
    """Conditional pmf of a discrete ``target`` given the observed cells of ``point``."""
    point = np.asarray(point, dtype=float)
    spec = model.schema[target]
    if not spec.is_discrete:
        raise ValueError(f"attribute {spec.name!r} is continuous; use regress")
    loo_arr = None if loo is None else np.array([loo])
    block = solve_target_blocks(model, point[None, :], target, _evidence_of(point, {target}), loo_arr)
    probs = conditional_pmf(block, model.marginals[target].pmf, model.hyper.alpha)[:, 0]
    return ConditionalPMF(target, probs)


def classify(model: EigenModel, point: Sequence[float], target: int, loo: Optional[int] = None):
    """Most likely value index of ``target`` (ties go to the lower index) and its pmf."""
    pmf = predict_pmf(model, point, target, loo)
    return int(np.argmax(pmf.probabilities)), pmf


def regress(model: EigenModel, point: Sequence[float], target: int, loo: Optional[int] = None) -> float:
    """Conditional mean of a continuous ``target``, in raw units."""
    point = np.asarray(point, dtype=float)
    spec = model.schema[target]
    if spec.is_discrete:
        raise ValueError(f"attribute {spec.name!r} is discrete; use classify")
    loo_arr = None if loo is None else np.array([loo])
    block = solve_target_blocks(model, point[None, :], target, _evidence_of(point, {target}), loo_arr)
    return denormalize_value(spec, float(conditional_mean(block[:, 0], basis_centers(spec.basis))))


def impute(model: EigenModel, point: Sequence[float], missing: Collection[int], mode: str = "most_likely",
           rng: Optional[RandomSource] = None) -> np.ndarray:
    """Fill the ``missing`` cells of ``point``.

    ``most_likely`` fills each cell independently from its distribution given
    the observed cells only. ``random`` draws the missing cells one at a time
    in reverse chain order, each draw joining the evidence for the next.
    """
    point = np.asarray(point, dtype=float).copy()
    missing = sorted(set(missing))
    if not missing:
        raise ValueError("nothing to impute")
    point[missing] = np.nan
    if mode == "most_likely":
        out = point.copy()
        for j in missing:
            if model.schema[j].is_discrete:
                out[j] = classify(model, point, j)[0]
            else:
                out[j] = regress(model, point, j)
        return out
    if mode == "random":
        if rng is None:
            raise ValueError("random imputation needs a RandomSource")
        observed = [j for j in range(point.size) if j not in missing]
        order = _unclamped_order(model, set(observed))
        return _fill(model, point[None, :], order, set(observed), [rng])[0]
    raise ValueError(f"unknown imputation mode {mode!r}")


@dataclass(frozen=True)
class OutlierReport:
    scores: np.ndarray
    threshold: float
    flagged: np.ndarray
    bin_edges: np.ndarray
    bin_counts: np.ndarray

    def histogram_rows(self):
        for lo, hi, n in zip(self.bin_edges[:-1], self.bin_edges[1:], self.bin_counts):
            yield float(lo), float(hi), int(n)


def outlier_scores(model: EigenModel, dataset: Optional[Dataset] = None, threshold: Optional[float] = None,
                   loo: bool = True, bins: int = 30, threads: int = 1) -> OutlierReport:
    """Joint log-probability of each row; rows scoring below ``threshold`` are flagged.

    The default threshold is the empirical 1st percentile of the scores.
    """
    scores = row_log_probs(model, dataset, loo=loo, threads=threads)
    if threshold is None:
        threshold = float(np.percentile(scores, 1))
    flagged = np.flatnonzero(scores < threshold)
    counts, edges = np.histogram(scores, bins=bins)
    return OutlierReport(scores, float(threshold), flagged, edges, counts)


def generate(model: EigenModel, n: int, method: str = "chain", seed: int = 0,
             gibbs: Optional[GibbsConfig] = None, threads: int = 1) -> Dataset:
    """``n`` synthetic rows sharing the model's schema."""
    if n < 0:
        raise ValueError("n must be >= 0")
    source = RandomSource(seed)
    if method == "chain":
        rows = sample_rows(model, n, source, threads=threads)
    elif method == "gibbs":
        base = gibbs or GibbsConfig(sweeps=10)
        cfg = GibbsConfig(base.burn_in + n * base.thinning, base.burn_in, base.thinning, base.init)
        rows = gibbs_run(model, cfg, source) if n else np.empty((0, len(model.schema)))
    else:
        raise ValueError(f"unknown generation method {method!r}")
    return Dataset(model.schema, rows)


@dataclass(frozen=True)
class CrossValidation:
    accuracy: float
    predictions: np.ndarray
    truth: np.ndarray
    probabilities: np.ndarray


def loo_cross_validate(model: EigenModel, target: int, threads: int = 1) -> CrossValidation:
    """Leave-one-out accuracy for a discrete ``target`` over the model's own rows.

    Row ``n`` is classified from its other attributes with object ``n``
    masked out of the graph.
    """
    spec = model.schema[target]
    if not spec.is_discrete:
        raise ValueError(f"attribute {spec.name!r} is continuous")
    rows = model.dataset.values
    evidence = [j for j in range(rows.shape[1]) if j != target]
    blocks = solve_target_blocks(model, rows, target, evidence, np.arange(rows.shape[0]), threads)
    probs = conditional_pmf(blocks, model.marginals[target].pmf, model.hyper.alpha)
    pred = np.argmax(probs, axis=0)
    truth = rows[:, target].astype(int)
    return CrossValidation(float(np.mean(pred == truth)), pred, truth, probs.T)
