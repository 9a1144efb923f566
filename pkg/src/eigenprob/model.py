"""The fitted model: data, graph, marginals and hyperparameters together.

The method is memory based, so the stored rows are the model. Everything
here is immutable; ``with_hyper`` and friends return modified copies that
share the graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .centrality import SolverConfig
from .estimation import HyperParams, compute_marginals
from .graph import AttributeLayout, BipartiteGraph
from .schema import Dataset, Schema


@dataclass(frozen=True)
class EigenModel:
    dataset: Dataset
    layout: AttributeLayout
    graph: BipartiteGraph = field(repr=False)
    marginals: list = field(repr=False)
    hyper: HyperParams = HyperParams()
    config: SolverConfig = SolverConfig()
    chain_order: tuple = ()

    @classmethod
    def from_dataset(cls, dataset: Dataset, hyper: HyperParams = HyperParams(),
                     config: SolverConfig = SolverConfig(), chain_order: Optional[Sequence[int]] = None,
                     marginals: Optional[list] = None) -> "EigenModel":
        layout = AttributeLayout.from_schema(dataset.schema)
        graph = BipartiteGraph.from_dataset(dataset, layout)
        d = dataset.n_cols
        order = tuple(range(d)) if chain_order is None else tuple(int(j) for j in chain_order)
        if sorted(order) != list(range(d)):
            raise ValueError(f"chain order {order} is not a permutation of the {d} attributes")
        if marginals is None:
            marginals = compute_marginals(dataset)
        return cls(dataset, layout, graph, marginals, hyper, config, order)

    @property
    def schema(self) -> Schema:
        return self.dataset.schema

    @property
    def n_objects(self) -> int:
        return self.graph.n_objects

    def with_hyper(self, alpha: Optional[float] = None, beta: Optional[float] = None) -> "EigenModel":
        hyper = HyperParams(self.hyper.alpha if alpha is None else alpha,
                            self.hyper.beta if beta is None else beta)
        return replace(self, hyper=hyper)

    def with_config(self, **changes) -> "EigenModel":
        return replace(self, config=replace(self.config, **changes))

    def masked(self, index: int) -> "EigenModel":
        return replace(self, graph=self.graph.mask_object(index))
