"""Personalized Katz centrality on the bipartite graph.

Solves ``c = d * W_hat @ c + (1 - d) * theta`` by fixed-point iteration,
where ``W_hat = W / rho`` is the adjacency scaled to unit spectral radius.
No column normalization is applied: activation leaving a node is not
divided among its edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection, Mapping, Optional

import numpy as np

from .graph import AttributeLayout, BipartiteGraph, encode_cell
from .schema import Schema


class ConvergenceError(RuntimeError):
    """The power iteration hit its iteration cap before meeting the tolerance."""

    def __init__(self, message: str, result: "CentralityVector" = None):
        super().__init__(message)
        self.result = result


class ZeroBlockError(ValueError):
    """A centrality block carries no mass and cannot be normalized."""


@dataclass(frozen=True)
class SolverConfig:
    damping: float = 0.15
    tolerance: float = 1e-9
    max_iterations: int = 1000

    def __post_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise ValueError("damping must lie strictly between 0 and 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class CentralityVector:
    values: np.ndarray
    iterations: int
    residual: float
    converged: bool


def build_personalization(evidence: Mapping[int, float], schema: Schema, layout: AttributeLayout,
                          n_objects: int, targets: Collection[int] = ()) -> np.ndarray:
    """Restart vector that injects activation at the evidence value nodes.

    ``evidence`` maps attribute index to a category index (discrete) or a raw
    value (continuous). Object components and target blocks stay zero and the
    vector is scaled to sum to one.
    """
    overlap = set(evidence) & set(targets)
    if overlap:
        raise ValueError(f"attributes {sorted(overlap)} are both evidence and target")
    theta = np.zeros(n_objects + layout.total_width)
    for j, value in evidence.items():
        block = layout.block(j)
        theta[n_objects + block.start:n_objects + block.stop] += encode_cell(schema[j], float(value))
    total = theta.sum()
    if total <= 0:
        raise ValueError("personalization vector is empty: no evidence given")
    return theta / total


def solve_stationary(graph: BipartiteGraph, theta: np.ndarray, config: SolverConfig = SolverConfig(),
                     masks: Optional[np.ndarray] = None, start: Optional[np.ndarray] = None) -> CentralityVector:
    """Fixed point of the damped, personalized centrality equation.

    ``theta`` may be a single vector or an ``(N+M) x K`` block of columns,
    in which case the columns are solved together and each stops at its own
    convergence. Iteration starts at ``start``, or at ``theta`` if omitted;
    the fixed point is unique, so the start only affects the iteration count.
    """
    theta = np.asarray(theta, dtype=float)
    d = config.damping
    rho = graph.spectral_radius
    restart = (1.0 - d) * theta
    c = theta.copy() if start is None else np.array(start, dtype=float)
    if c.shape != theta.shape:
        raise ValueError(f"start has shape {c.shape}, theta has {theta.shape}")
    if rho == 0.0:
        return CentralityVector(restart, 1, float(np.abs(restart - c).sum(axis=0).max()), True)
    scale = d / rho
    if c.ndim == 1:
        residual = np.inf
        for it in range(1, config.max_iterations + 1):
            nxt = scale * graph.matvec(c, masks) + restart
            residual = float(np.abs(nxt - c).sum())
            c = nxt
            if residual <= config.tolerance:
                return CentralityVector(c, it, residual, True)
        return CentralityVector(c, config.max_iterations, residual, False)

    if c.shape[1] == 0:
        return CentralityVector(c, 0, 0.0, True)
    # Columns stop as soon as they converge, so each one is bit-identical to a solo solve.
    active = np.arange(c.shape[1])
    residuals = np.full(c.shape[1], np.inf)
    it = 0
    while active.size and it < config.max_iterations:
        it += 1
        sub_masks = None if masks is None else masks[:, active]
        nxt = scale * graph.matvec(c[:, active], sub_masks) + restart[:, active]
        res = np.abs(nxt - c[:, active]).sum(axis=0)
        c[:, active] = nxt
        residuals[active] = res
        active = active[res > config.tolerance]
    return CentralityVector(c, it, float(residuals.max()), active.size == 0)


def solve_checked(graph, theta, config=SolverConfig(), masks=None) -> np.ndarray:
    result = solve_stationary(graph, theta, config, masks)
    if not result.converged:
        raise ConvergenceError(
            f"no convergence after {result.iterations} iterations (residual {result.residual:.3g})", result)
    return result.values


def attribute_block(c: np.ndarray, j: int, layout: AttributeLayout, n_objects: int) -> np.ndarray:
    block = layout.block(j)
    return c[n_objects + block.start:n_objects + block.stop]


def attribute_distribution(c: np.ndarray, j: int, layout: AttributeLayout, n_objects: int) -> np.ndarray:
    """Centralities of attribute ``j``'s value nodes, normalized to sum to one.

    Works column-wise when ``c`` is a block of solutions.
    """
    block = attribute_block(np.asarray(c), j, layout, n_objects)
    total = block.sum(axis=0)
    if np.any(total <= 0):
        raise ZeroBlockError(f"attribute {j} received no centrality")
    return block / total


def object_distribution(c: np.ndarray, n_objects: int) -> np.ndarray:
    obj = np.asarray(c)[:n_objects]
    total = obj.sum(axis=0)
    if np.any(total <= 0):
        raise ZeroBlockError("object nodes received no centrality")
    return obj / total
