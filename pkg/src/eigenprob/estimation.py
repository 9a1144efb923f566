"""Probability estimates read off centrality vectors.

Discrete conditionals reweight the marginal by the centrality/marginal ratio
raised to ``alpha``. Continuous conditionals are Beta densities whose mean is
decoded from the attribute's centrality block and whose concentration
``p + q`` equals ``beta``. Joint log-probabilities follow the chain rule over
the model's attribute order, every attribute conditioned on those after it.

All centrality solves depend only on the evidence, never on ``alpha`` or
``beta``, so likelihood sweeps solve once and rescore the cached blocks.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Collection, Optional, Sequence, Union

import numpy as np
from scipy.special import betaln, logsumexp

from .centrality import solve_checked
from .graph import encode_rows
from .schema import Dataset, basis_centers, decode_membership, encode_membership, normalize_value

if TYPE_CHECKING:
    from .model import EigenModel

logger = logging.getLogger(__name__)

EPS = 1e-3
VARIANCE_FLOOR = 1e-4
PROB_FLOOR = 1e-12
CHUNK = 1024


@dataclass(frozen=True)
class HyperParams:
    alpha: float = 9.0
    beta: float = 6.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")


@dataclass(frozen=True)
class BetaSpec:
    p: float
    q: float

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise ValueError(f"Beta parameters must be positive, got p={self.p}, q={self.q}")

    @property
    def mean(self) -> float:
        return self.p / (self.p + self.q)

    @property
    def variance(self) -> float:
        s = self.p + self.q
        return self.p * self.q / (s * s * (s + 1.0))


@dataclass(frozen=True)
class ConditionalPMF:
    attribute: int
    probabilities: np.ndarray


@dataclass(frozen=True)
class DiscreteMarginal:
    pmf: np.ndarray

    def log_prob(self, value: float) -> float:
        return float(np.log(self.pmf[int(value)]))


@dataclass(frozen=True)
class ContinuousMarginal:
    mean: float
    variance: float
    spec: BetaSpec

    def log_prob(self, u: float) -> float:
        return beta_log_density(self.spec, u)


def _moment_beta(mean: float, var: float) -> BetaSpec:
    mean = float(np.clip(mean, EPS, 1.0 - EPS))
    var = float(np.clip(var, VARIANCE_FLOOR, mean * (1.0 - mean) * (1.0 - EPS)))
    common = mean * (1.0 - mean) / var - 1.0
    return BetaSpec(mean * common, (1.0 - mean) * common)


def compute_marginals(dataset: Dataset) -> list:
    """Per-attribute marginal models.

    Discrete columns get add-one smoothed frequencies; continuous columns get
    a method-of-moments Beta fit on their normalized values, with the mean
    and variance clamped away from degenerate values.
    """
    out = []
    for j, spec in enumerate(dataset.schema):
        col = dataset.values[:, j]
        col = col[~np.isnan(col)]
        if col.size == 0:
            raise ValueError(f"attribute {spec.name!r} is entirely missing")
        if spec.is_discrete:
            counts = np.bincount(col.astype(int), minlength=spec.width).astype(float)
            out.append(DiscreteMarginal((counts + 1.0) / (col.size + spec.width)))
        else:
            u = normalize_value(spec, col)
            mean, var = float(np.mean(u)), float(np.var(u))
            out.append(ContinuousMarginal(mean, var, _moment_beta(mean, var)))
    return out


def conditional_pmf(block: np.ndarray, marginal: np.ndarray, alpha: float) -> np.ndarray:
    """``K * m * (c/m)**alpha`` normalized; works column-wise on ``w x n`` blocks.

    ``alpha = 0`` returns the marginal and ``alpha = 1`` the normalized
    centralities. Zero centralities get zero probability for ``alpha > 0``.
    """
    c = np.asarray(block, dtype=float)
    m = np.asarray(marginal, dtype=float)
    if c.ndim == 2:
        m = m[:, None]
    if alpha == 0:
        return np.broadcast_to(m, c.shape).copy()
    with np.errstate(divide="ignore"):
        logp = (1.0 - alpha) * np.log(m) + alpha * np.log(c)
    logp = logp - logsumexp(logp, axis=0)
    return np.exp(logp)


def conditional_mean(block: np.ndarray, centers: Optional[np.ndarray] = None):
    """Decoded conditional mean in normalized units; column-wise on blocks."""
    block = np.asarray(block, dtype=float)
    if centers is None:
        centers = basis_centers(block.shape[0])
    return decode_membership(block.T, centers)


def beta_from_mean(mean: float, beta: float) -> BetaSpec:
    if beta <= 0:
        raise ValueError("beta must be > 0")
    mu = float(np.clip(mean, EPS, 1.0 - EPS))
    return BetaSpec(beta * mu, beta * (1.0 - mu))


def _beta_logpdf(p, q, x):
    x = np.clip(x, EPS, 1.0 - EPS)
    return (p - 1.0) * np.log(x) + (q - 1.0) * np.log1p(-x) - betaln(p, q)


def beta_log_density(spec: BetaSpec, x: float) -> float:
    return float(_beta_logpdf(spec.p, spec.q, x))


def _fallback_block(model: "EigenModel", j: int) -> np.ndarray:
    spec = model.schema[j]
    marginal = model.marginals[j]
    if spec.is_discrete:
        return marginal.pmf.copy()
    return encode_membership(float(np.clip(marginal.mean, 0.0, 1.0)), spec.basis)


def solve_target_blocks(model: "EigenModel", rows: np.ndarray, target: int, evidence: Collection[int],
                        loo: Optional[np.ndarray] = None, threads: int = 1) -> np.ndarray:
    """Normalized centrality block of ``target`` for each row, as ``w x n``.

    ``rows`` holds raw values; cells of ``evidence`` that are missing simply
    do not contribute. ``loo`` gives each row an object index to mask
    (negative for none). Rows with no usable evidence, and rows whose block
    comes back empty, get the marginal block with a warning for the latter.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    n = rows.shape[0]
    width = model.layout.widths[target]
    out = np.empty((width, n))
    if n == 0:
        return out
    evidence = sorted(set(evidence))
    if target in evidence:
        raise ValueError("target attribute cannot be part of the evidence")
    fallback = _fallback_block(model, target)
    if not evidence:
        out[:] = fallback[:, None]
        return out

    attr_mask = np.zeros(model.layout.total_width)
    for j in evidence:
        attr_mask[model.layout.block(j)] = 1.0
    N = model.graph.n_objects
    tb = model.layout.block(target)

    def run(lo: int, hi: int) -> np.ndarray:
        enc = encode_rows(model.schema, model.layout, rows[lo:hi]) * attr_mask
        totals = enc.sum(axis=1)
        has = totals > 0
        blocks = np.tile(fallback[:, None], (1, hi - lo))
        if not has.any():
            return blocks
        cols = np.flatnonzero(has)
        theta = np.zeros((N + model.layout.total_width, cols.size))
        theta[N:] = (enc[cols] / totals[cols, None]).T
        masks = None
        if loo is not None:
            idx = np.asarray(loo[lo:hi])[cols]
            if np.any(idx >= 0):
                masks = np.ones((N, cols.size))
                sel = np.flatnonzero(idx >= 0)
                masks[idx[sel], sel] = 0.0
        if masks is None and model.graph.object_mask is not None:
            masks = np.tile(model.graph.object_mask[:, None], (1, cols.size))
        elif masks is not None and model.graph.object_mask is not None:
            masks = masks * model.graph.object_mask[:, None]
        c = solve_checked(model.graph, theta, model.config, masks)
        raw = c[N + tb.start:N + tb.stop]
        totals_t = raw.sum(axis=0)
        ok = totals_t > 0
        if not ok.all():
            warnings.warn(f"attribute {model.schema[target].name!r} received no centrality for "
                          f"{int((~ok).sum())} queries; using its marginal", RuntimeWarning, stacklevel=3)
        good = cols[ok]
        blocks[:, good] = raw[:, ok] / totals_t[ok]
        return blocks

    chunks = [(lo, min(lo + CHUNK, n)) for lo in range(0, n, CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda ab: run(*ab), chunks))
    else:
        results = [run(lo, hi) for lo, hi in chunks]
    for (lo, hi), res in zip(chunks, results):
        out[:, lo:hi] = res
    return out


def score_blocks(model: "EigenModel", target: int, blocks: np.ndarray, observed: np.ndarray,
                 alpha: float, beta: float) -> np.ndarray:
    """Log conditional probability (or density) of ``observed`` for each block column."""
    spec = model.schema[target]
    observed = np.asarray(observed, dtype=float)
    if spec.is_discrete:
        pmf = conditional_pmf(blocks, model.marginals[target].pmf, alpha)
        p = pmf[observed.astype(int), np.arange(observed.size)]
        return np.log(np.maximum(p, PROB_FLOOR))
    mu = np.clip(conditional_mean(blocks, basis_centers(spec.basis)), EPS, 1.0 - EPS)
    u = normalize_value(spec, observed)
    return _beta_logpdf(beta * mu, beta * (1.0 - mu), u)


def marginal_log_prob(model: "EigenModel", j: int, observed: np.ndarray) -> np.ndarray:
    spec = model.schema[j]
    observed = np.asarray(observed, dtype=float)
    marginal = model.marginals[j]
    if spec.is_discrete:
        return np.log(marginal.pmf[observed.astype(int)])
    u = normalize_value(spec, observed)
    return _beta_logpdf(marginal.spec.p, marginal.spec.q, u)


def conditional_log_prob(model: "EigenModel", point: Sequence[float], target: int,
                         evidence: Collection[int], loo: Optional[int] = None) -> float:
    point = np.asarray(point, dtype=float)
    if np.isnan(point[target]) or any(np.isnan(point[j]) for j in evidence):
        raise ValueError("point must be observed at the target and every evidence attribute")
    if not evidence:
        return float(marginal_log_prob(model, target, point[[target]])[0])
    loo_arr = None if loo is None else np.array([loo])
    blocks = solve_target_blocks(model, point[None, :], target, evidence, loo_arr)
    h = model.hyper
    return float(score_blocks(model, target, blocks, point[[target]], h.alpha, h.beta)[0])


class ChainCache:
    """Centrality blocks for every (row, chain position) of a dataset.

    ``terms`` holds ``(target, blocks)`` for each conditioned position; the
    last attribute of the chain contributes its marginal.
    """

    def __init__(self, model: "EigenModel", rows: np.ndarray, loo: bool, threads: int = 1):
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if np.isnan(rows).any():
            raise ValueError("joint probabilities need fully observed rows")
        self.model = model
        self.rows = rows
        order = list(model.chain_order)
        loo_idx = np.arange(rows.shape[0]) if loo else None
        self.terms = [
            (t, solve_target_blocks(model, rows, t, order[k + 1:], loo_idx, threads))
            for k, t in enumerate(order[:-1])
        ]
        last = order[-1]
        self.base = marginal_log_prob(model, last, rows[:, last])

    def discrete_part(self, alpha: float) -> np.ndarray:
        total = np.zeros(self.rows.shape[0])
        for t, blocks in self.terms:
            if self.model.schema[t].is_discrete:
                total += score_blocks(self.model, t, blocks, self.rows[:, t], alpha, 1.0)
        return total

    def continuous_part(self, beta: float) -> np.ndarray:
        total = np.zeros(self.rows.shape[0])
        for t, blocks in self.terms:
            if not self.model.schema[t].is_discrete:
                total += score_blocks(self.model, t, blocks, self.rows[:, t], 0.0, beta)
        return total

    def row_scores(self, alpha: float, beta: float) -> np.ndarray:
        return self.base + self.discrete_part(alpha) + self.continuous_part(beta)


def joint_log_prob(model: "EigenModel", point: Sequence[float], loo: Optional[int] = None) -> float:
    point = np.asarray(point, dtype=float)
    if np.isnan(point).any():
        raise ValueError("joint probabilities need a fully observed point")
    order = list(model.chain_order)
    total = float(marginal_log_prob(model, order[-1], point[[order[-1]]])[0])
    for k, t in enumerate(order[:-1]):
        total += conditional_log_prob(model, point, t, order[k + 1:], loo)
    return total


def row_log_probs(model: "EigenModel", dataset: Optional[Dataset] = None, loo: bool = True,
                  threads: int = 1) -> np.ndarray:
    """Joint log-probability of every row; ``loo`` masks each row's own object node.

    Masking only makes sense for the model's own rows, so it is ignored for
    an external ``dataset``.
    """
    if dataset is None:
        rows = model.dataset.values
    else:
        rows = dataset.values
        loo = False
    h = model.hyper
    return ChainCache(model, rows, loo, threads).row_scores(h.alpha, h.beta)


def log_likelihood(model: "EigenModel", dataset: Optional[Dataset] = None, loo: bool = True,
                   threads: int = 1) -> float:
    return float(row_log_probs(model, dataset, loo, threads).sum())


@dataclass(frozen=True)
class LikelihoodSurface:
    alphas: np.ndarray
    betas: np.ndarray
    values: np.ndarray

    def rows(self):
        for i, a in enumerate(self.alphas):
            for k, b in enumerate(self.betas):
                yield float(a), float(b), float(self.values[i, k])


DEFAULT_ALPHA_GRID = tuple(float(a) for a in range(0, 16))
DEFAULT_BETA_GRID = tuple(float(b) for b in range(1, 16))


def fit_hyperparams(model: "EigenModel", alpha_grid: Sequence[float] = DEFAULT_ALPHA_GRID,
                    beta_grid: Sequence[float] = DEFAULT_BETA_GRID, loo: bool = True,
                    threads: int = 1, cache: Optional[ChainCache] = None):
    """Grid-search maximum likelihood for ``(alpha, beta)``.

    Returns ``(best_alpha, best_beta, surface)``. Ties go to the smallest
    alpha, then the smallest beta.
    """
    alphas = np.asarray(sorted(alpha_grid), dtype=float)
    betas = np.asarray(sorted(beta_grid), dtype=float)
    if alphas.size == 0 or betas.size == 0:
        raise ValueError("hyperparameter grids must be nonempty")
    if cache is None:
        cache = ChainCache(model, model.dataset.values, loo, threads)
    base = cache.base.sum()
    disc = np.array([cache.discrete_part(a).sum() for a in alphas])
    cont = np.array([cache.continuous_part(b).sum() for b in betas])
    surface = base + disc[:, None] + cont[None, :]
    flat = int(np.argmax(surface))  # first maximum in row-major order = smallest (alpha, beta)
    i, k = np.unravel_index(flat, surface.shape)
    logger.info("likelihood maximized at alpha=%g beta=%g (%.4f)", alphas[i], betas[k], surface[i, k])
    return float(alphas[i]), float(betas[k]), LikelihoodSurface(alphas, betas, surface)
