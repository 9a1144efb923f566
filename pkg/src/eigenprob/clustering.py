"""Soft clustering by alternating centrality solves and membership updates.

Each cluster owns a restart vector over the object nodes. Solving the
centrality equation for every cluster gives per-object scores; memberships
are the scores normalized across clusters, and each cluster's restart
vector is rebuilt from its members' score times membership.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .centrality import SolverConfig, solve_stationary
from .graph import BipartiteGraph
from .sampling import RandomSource


@dataclass(frozen=True)
class ClusterState:
    """Restart vectors ``thetas`` (K x N) and memberships (N x K) after an iteration."""

    thetas: np.ndarray
    memberships: np.ndarray
    damping: float
    iterations: int
    converged: bool
    restarts: int = 0
    residual: float = np.inf

    @property
    def K(self) -> int:
        return self.thetas.shape[0]

    @property
    def labels(self) -> np.ndarray:
        return np.argmax(self.memberships, axis=1)


def random_thetas(n_objects: int, K: int, rng: RandomSource) -> np.ndarray:
    """K restart vectors of iid uniform positive weights, each summing to one."""
    out = np.array([[rng.uniform() for _ in range(n_objects)] for _ in range(K)])
    return out / out.sum(axis=1, keepdims=True)


def _object_scores(graph: BipartiteGraph, thetas: np.ndarray, config: SolverConfig, threads: int,
                   start: Optional[np.ndarray] = None):
    """Per-cluster object scores (N x K), each column normalized to sum to one.

    Also returns the full (N+M) x K solutions, usable as ``start`` next time.
    """
    N = graph.n_objects
    full = np.zeros((graph.n_nodes, thetas.shape[0]))
    full[:N] = thetas.T

    if threads > 1:
        def solve(k):
            res = solve_stationary(graph, full[:, k], config, start=None if start is None else start[:, k])
            return res.values, res.converged

        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(solve, range(thetas.shape[0])))
    else:
        res = solve_stationary(graph, full, config, start=start)
        results = [(res.values[:, k], res.converged) for k in range(thetas.shape[0])]
    solutions = np.column_stack([r[0] for r in results])
    scores = solutions[:N]
    return scores / scores.sum(axis=0), all(r[1] for r in results), solutions


def cluster_step(graph: BipartiteGraph, thetas: np.ndarray, config: SolverConfig, threads: int = 1):
    """One update: returns ``(new_thetas, memberships, solver_converged)``.

    A cluster whose new restart vector has no mass comes back as a zero row.
    """
    return _step(graph, thetas, config, threads)[:3]


def _step(graph, thetas, config, threads, start=None):
    scores, ok, solutions = _object_scores(graph, thetas, config, threads, start)
    row_tot = scores.sum(axis=1, keepdims=True)
    y = np.divide(scores, row_tot, out=np.full_like(scores, 1.0 / scores.shape[1]), where=row_tot > 0)
    weighted = scores * y
    tot = weighted.sum(axis=0)
    new = np.zeros_like(thetas)
    live = tot > 0
    new[live] = (weighted[:, live] / tot[live]).T
    return new, y, ok, solutions


def cluster(graph: BipartiteGraph, K: int, damping: float = 0.85, rng: Optional[RandomSource] = None,
            tol: float = 1e-8, max_iter: int = 500, initial: Optional[np.ndarray] = None,
            solver_tolerance: float = 1e-12, threads: int = 1,
            on_iteration: Optional[Callable[[ClusterState], None]] = None) -> ClusterState:
    """Fit ``K`` soft clusters over the object nodes.

    Iterates until the largest change in any restart vector component is at
    most ``tol`` or ``max_iter`` is reached. ``initial`` (K x N) overrides the
    random start. Clusters that collapse are restarted from fresh random
    vectors and counted in ``restarts``. Hard labels take the argmax
    membership, ties going to the lower cluster index.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    N = graph.n_objects
    if N == 0:
        raise ValueError("graph has no objects")
    rng = rng or RandomSource(0)
    config = SolverConfig(damping=damping, tolerance=solver_tolerance, max_iterations=100000)
    if initial is None:
        thetas = random_thetas(N, K, rng)
    else:
        thetas = np.asarray(initial, dtype=float)
        if thetas.shape != (K, N) or np.any(thetas < 0):
            raise ValueError(f"initial restart vectors must be a nonnegative {K} x {N} array")
        thetas = thetas / thetas.sum(axis=1, keepdims=True)
    restarts = 0
    y = np.full((N, K), 1.0 / K)
    residual = np.inf
    warm = None
    for it in range(1, max_iter + 1):
        # the previous solutions are a close start once the restart vectors settle
        new, y, _, warm = _step(graph, thetas, config, threads, warm)
        dead = np.flatnonzero(new.sum(axis=1) == 0)
        if dead.size:
            new[dead] = random_thetas(N, dead.size, rng)
            restarts += dead.size
        residual = float(np.abs(new - thetas).max())
        thetas = new
        state = ClusterState(thetas, y, damping, it, False, restarts, residual)
        if on_iteration is not None:
            on_iteration(state)
        if residual <= tol and not dead.size:
            return ClusterState(thetas, y, damping, it, True, restarts, residual)
    return ClusterState(thetas, y, damping, max_iter, False, restarts, residual)
