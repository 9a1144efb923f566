"""Drawing values and whole rows from the estimated distributions.

Every generated row owns a random substream keyed by ``(seed, row index)``,
so batched and one-at-a-time generation produce identical rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Optional

import numpy as np

from .estimation import EPS, BetaSpec, beta_from_mean, conditional_mean, conditional_pmf, solve_target_blocks
from .schema import basis_centers, denormalize_value

if TYPE_CHECKING:
    from .model import EigenModel


class RandomSource:
    """Seeded uniform/normal stream that can be split into keyed substreams."""

    def __init__(self, seed: int = 0, path: tuple = ()):
        self.seed = int(seed)
        self.path = tuple(int(p) for p in path)
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, *self.path])))

    def substream(self, index: int) -> "RandomSource":
        return RandomSource(self.seed, self.path + (index,))

    def uniform(self) -> float:
        """Uniform draw on the half-open interval (0, 1]."""
        return 1.0 - float(self._gen.random())

    def normal(self) -> float:
        return float(self._gen.standard_normal())


def inverse_cdf(pmf, u: float) -> int:
    """Smallest index whose cumulative probability reaches ``u``."""
    cum = np.cumsum(np.asarray(pmf, dtype=float))
    j = int(np.searchsorted(cum, u * cum[-1], side="left"))
    return min(j, len(cum) - 1)


def sample_pmf(pmf, rng: RandomSource) -> int:
    return inverse_cdf(pmf, rng.uniform())


def log_gamma_variate(shape: float, rng: RandomSource) -> float:
    """Log of a Gamma(shape, 1) draw.

    Marsaglia-Tsang squeeze for shape >= 1; smaller shapes are boosted to
    ``shape + 1`` and corrected by ``U**(1/shape)``, applied in log space so
    tiny shapes do not underflow.
    """
    if shape <= 0:
        raise ValueError("gamma shape must be positive")
    boost = 0.0
    if shape < 1.0:
        boost = math.log(rng.uniform()) / shape
        shape += 1.0
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = rng.normal()
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = rng.uniform()
        if u < 1.0 - 0.0331 * x ** 4 or math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
            return math.log(d * v) + boost


def sample_beta(spec: BetaSpec, rng: RandomSource) -> float:
    """Beta draw as ``G1 / (G1 + G2)`` from two independent gamma variates."""
    lg1 = log_gamma_variate(spec.p, rng)
    lg2 = log_gamma_variate(spec.q, rng)
    diff = lg2 - lg1
    if diff > 700:
        return 0.0
    return 1.0 / (1.0 + math.exp(diff))


@dataclass(frozen=True)
class GibbsConfig:
    sweeps: int
    burn_in: int = 10
    thinning: int = 1
    init: str = "chain"

    def __post_init__(self):
        if self.burn_in < 0 or self.sweeps < self.burn_in:
            raise ValueError("need sweeps >= burn_in >= 0")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")
        if self.init not in ("chain", "provided"):
            raise ValueError("init must be 'chain' or 'provided'")


def _draw(model: "EigenModel", target: int, block: Optional[np.ndarray], rng: RandomSource) -> float:
    """One value of ``target`` in raw units; ``block=None`` means draw from the marginal."""
    spec = model.schema[target]
    h = model.hyper
    if spec.is_discrete:
        pmf = model.marginals[target].pmf if block is None else conditional_pmf(block, model.marginals[target].pmf, h.alpha)
        return float(sample_pmf(pmf, rng))
    if block is None:
        beta_spec = model.marginals[target].spec
    else:
        beta_spec = beta_from_mean(conditional_mean(block, basis_centers(spec.basis)), h.beta)
    u = min(max(sample_beta(beta_spec, rng), EPS), 1.0 - EPS)
    return denormalize_value(spec, u)


def _fill(model: "EigenModel", rows: np.ndarray, todo: list, fixed: set, streams: list,
          threads: int = 1) -> np.ndarray:
    """Fill attributes ``todo`` (in order) for all rows, each conditioned on everything set so far."""
    known = set(fixed)
    for t in todo:
        if known:
            blocks = solve_target_blocks(model, rows, t, known, threads=threads)
            for i, rng in enumerate(streams):
                rows[i, t] = _draw(model, t, blocks[:, i], rng)
        else:
            for i, rng in enumerate(streams):
                rows[i, t] = _draw(model, t, None, rng)
        known.add(t)
    return rows


def _unclamped_order(model: "EigenModel", clamped) -> list:
    return [t for t in reversed(model.chain_order) if t not in clamped]


def sample_rows(model: "EigenModel", n: int, source: RandomSource,
                clamped: Optional[Mapping[int, float]] = None, threads: int = 1) -> np.ndarray:
    """``n`` rows drawn by the chain rule, row ``i`` using ``source.substream(i)``.

    The last attribute of the chain order is drawn first (from its marginal,
    or conditioned on the clamped values), working back to the first.
    """
    clamped = dict(clamped or {})
    d = len(model.schema)
    rows = np.full((n, d), np.nan)
    for j, v in clamped.items():
        rows[:, j] = v
    if n == 0:
        return rows
    streams = [source.substream(i) for i in range(n)]
    return _fill(model, rows, _unclamped_order(model, clamped), set(clamped), streams, threads)


def sample_vector(model: "EigenModel", rng: RandomSource) -> np.ndarray:
    d = len(model.schema)
    row = np.full((1, d), np.nan)
    return _fill(model, row, _unclamped_order(model, {}), set(), [rng])[0]


def sample_conditional(model: "EigenModel", clamped: Mapping[int, float], rng: RandomSource) -> np.ndarray:
    d = len(model.schema)
    row = np.full((1, d), np.nan)
    for j, v in clamped.items():
        row[0, j] = v
    return _fill(model, row, _unclamped_order(model, clamped), set(clamped), [rng])[0]


def gibbs_run(model: "EigenModel", config: GibbsConfig, rng: RandomSource,
              initial: Optional[np.ndarray] = None) -> np.ndarray:
    """Systematic-scan Gibbs sampler over the full conditionals.

    Each sweep redraws attributes 0..d-1 in index order given the current
    values of all the others. Sweeps after burn-in are kept every
    ``thinning`` sweeps; the result has shape ``(kept, d)``.
    """
    d = len(model.schema)
    if config.init == "provided":
        if initial is None:
            raise ValueError("init='provided' needs an initial row")
        state = np.asarray(initial, dtype=float).copy()
    else:
        state = sample_vector(model, rng)
    kept = []
    others = [[k for k in range(d) if k != j] for j in range(d)]
    for sweep in range(1, config.sweeps + 1):
        for j in range(d):
            block = solve_target_blocks(model, state[None, :], j, others[j])[:, 0] if d > 1 else None
            state[j] = _draw(model, j, block, rng)
        if sweep > config.burn_in and (sweep - config.burn_in) % config.thinning == 0:
            kept.append(state.copy())
    return np.array(kept).reshape(len(kept), d)
