"""Object/attribute-value bipartite graph.

The adjacency ``W = [[0, B], [B^T, 0]]`` is never materialized. ``B`` is kept
as a CSR matrix and products with ``W`` are formed blockwise. Node order is
all ``N`` object nodes followed by the ``M`` attribute-value nodes, in schema
column order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .schema import Dataset, Schema, encode_membership, normalize_value

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AttributeLayout:
    """Column offsets of each attribute's block of value nodes."""

    offsets: tuple
    widths: tuple

    @classmethod
    def from_schema(cls, schema: Schema) -> "AttributeLayout":
        widths = tuple(spec.width for spec in schema)
        offsets = tuple(int(x) for x in np.concatenate([[0], np.cumsum(widths)[:-1]]))
        return cls(offsets, widths)

    @property
    def total_width(self) -> int:
        return int(sum(self.widths))

    def block(self, j: int) -> slice:
        return slice(self.offsets[j], self.offsets[j] + self.widths[j])


def encode_cell(spec, value: float) -> np.ndarray:
    """Weights of one cell on its attribute block (all zero when missing)."""
    w = np.zeros(spec.width)
    if np.isnan(value):
        return w
    if spec.is_discrete:
        w[int(value)] = 1.0
    else:
        w[:] = encode_membership(normalize_value(spec, value), spec.basis)
    return w


def encode_rows(schema: Schema, layout: AttributeLayout, values: np.ndarray) -> np.ndarray:
    """Dense ``n x M`` encoding of raw rows (missing cells contribute zeros)."""
    values = np.atleast_2d(values)
    out = np.zeros((values.shape[0], layout.total_width))
    for j, spec in enumerate(schema):
        col = values[:, j]
        present = ~np.isnan(col)
        block = layout.block(j)
        if spec.is_discrete:
            rows = np.flatnonzero(present)
            out[rows, layout.offsets[j] + col[present].astype(int)] = 1.0
        elif present.any():
            out[present, block] = encode_membership(normalize_value(spec, col[present]), spec.basis)
    return out


def build_object_attribute_matrix(dataset: Dataset, layout: Optional[AttributeLayout] = None) -> sp.csr_matrix:
    layout = layout or AttributeLayout.from_schema(dataset.schema)
    dense = encode_rows(dataset.schema, layout, dataset.values)
    return sp.csr_matrix(dense)


class SpectralRadiusWarning(RuntimeWarning):
    pass


def estimate_spectral_radius(B: sp.spmatrix, tol: float = 1e-10, max_iter: int = 10_000):
    """Largest singular value of ``B`` (equal to the spectral radius of ``W``).

    Power iteration on ``B B^T`` from a positive start vector, which cannot be
    orthogonal to the Perron vector of a nonnegative matrix. Returns
    ``(estimate, converged)``.
    """
    n = B.shape[0]
    if B.nnz == 0:
        return 0.0, True
    BT = B.T.tocsr()
    x = np.ones(n) / np.sqrt(n)
    lam = 0.0
    for _ in range(max_iter):
        y = B @ (BT @ x)
        new_lam = float(x @ y)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0, True
        x = y / norm
        if abs(new_lam - lam) <= tol * new_lam:
            return float(np.sqrt(new_lam)), True
        lam = new_lam
    return float(np.sqrt(lam)), False


class BipartiteGraph:
    """Immutable graph over a dataset, optionally with object rows masked.

    A masked view shares ``B`` with its parent and keeps the parent's
    spectral-radius estimate, which upper-bounds the masked operator.
    """

    def __init__(self, B: sp.spmatrix, spectral_radius: Optional[float] = None,
                 mask: Optional[np.ndarray] = None):
        self.B = sp.csr_matrix(B)
        self.BT = self.B.T.tocsr()
        self.n_objects, self.n_values = self.B.shape
        if spectral_radius is None:
            spectral_radius, ok = estimate_spectral_radius(self.B)
            if not ok:
                logger.warning("spectral radius power iteration did not converge; using best estimate")
        self.spectral_radius = float(spectral_radius)
        self._mask = None if mask is None else np.asarray(mask, dtype=float)

    @classmethod
    def from_dataset(cls, dataset: Dataset, layout: Optional[AttributeLayout] = None) -> "BipartiteGraph":
        return cls(build_object_attribute_matrix(dataset, layout))

    @property
    def n_nodes(self) -> int:
        return self.n_objects + self.n_values

    @property
    def masked_objects(self) -> frozenset:
        if self._mask is None:
            return frozenset()
        return frozenset(int(i) for i in np.flatnonzero(self._mask == 0))

    @property
    def object_mask(self) -> Optional[np.ndarray]:
        return self._mask

    def mask_object(self, index: int) -> "BipartiteGraph":
        if not 0 <= index < self.n_objects:
            raise IndexError(f"object index {index} out of range for {self.n_objects} objects")
        mask = np.ones(self.n_objects) if self._mask is None else self._mask.copy()
        mask[index] = 0.0
        return self._view(mask)

    def unmask_object(self, index: int) -> "BipartiteGraph":
        if not 0 <= index < self.n_objects:
            raise IndexError(f"object index {index} out of range for {self.n_objects} objects")
        if self._mask is None:
            return self
        mask = self._mask.copy()
        mask[index] = 1.0
        return self._view(None if mask.all() else mask)

    def _view(self, mask) -> "BipartiteGraph":
        view = object.__new__(BipartiteGraph)
        view.B, view.BT = self.B, self.BT
        view.n_objects, view.n_values = self.n_objects, self.n_values
        view.spectral_radius = self.spectral_radius
        view._mask = mask
        return view

    def matvec(self, v: np.ndarray, masks: Optional[np.ndarray] = None) -> np.ndarray:
        """``W @ v`` for a vector or an ``(N+M) x K`` block of column vectors.

        ``masks`` (shape ``N x K``) gives each column its own object mask and
        overrides the graph's own mask; it is how batched leave-one-out solves
        share one product.
        """
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.n_nodes:
            raise ValueError(f"vector has length {v.shape[0]}, graph has {self.n_nodes} nodes")
        n = self.n_objects
        v_obj, v_attr = v[:n], v[n:]
        mask = masks
        if mask is None and self._mask is not None:
            mask = self._mask if v.ndim == 1 else self._mask[:, None]
        out_obj = self.B @ v_attr
        if mask is not None:
            out_obj = out_obj * mask
            v_obj = v_obj * mask
        out_attr = self.BT @ v_obj
        return np.concatenate([out_obj, out_attr], axis=0)

    def dense(self) -> np.ndarray:
        """Materialized ``W`` for small graphs and tests."""
        B = self.B.toarray()
        if self._mask is not None:
            B = B * self._mask[:, None]
        n, m = B.shape
        W = np.zeros((n + m, n + m))
        W[:n, n:] = B
        W[n:, :n] = B.T
        return W
