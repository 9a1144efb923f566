"""Probability estimation on mixed discrete/continuous tables via personalized centrality."""

from . import datasets
from .centrality import ConvergenceError, SolverConfig
from .clustering import ClusterState, cluster
from .estimation import HyperParams, fit_hyperparams, joint_log_prob, log_likelihood
from .model import EigenModel
from .persist import load_model, save_model
from .sampling import RandomSource
from .schema import AttributeSpec, Dataset, Schema, load_dataset, read_dataset, read_schema
from .tasks import classify, generate, impute, loo_cross_validate, outlier_scores, regress

__all__ = [
    "AttributeSpec", "ClusterState", "ConvergenceError", "Dataset", "EigenModel", "HyperParams", "RandomSource", "Schema",
    "SolverConfig", "classify", "cluster", "datasets", "fit_hyperparams", "generate", "impute", "joint_log_prob", "load_dataset",
    "load_model", "log_likelihood", "loo_cross_validate", "outlier_scores", "read_dataset", "read_schema",
    "regress", "save_model",
]
__version__ = "0.1.0"
