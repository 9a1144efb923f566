"""Saving and loading fitted models as JSON.

The stored rows are the model, so the file references the dataset by path
and SHA-256 digest instead of embedding it. Loading re-reads the data and
refuses to proceed if its bytes have changed.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
from pathlib import Path
from typing import Union

import numpy as np

from .centrality import SolverConfig
from .estimation import BetaSpec, ContinuousMarginal, DiscreteMarginal, HyperParams
from .model import EigenModel
from .schema import Schema, load_dataset

FORMAT_VERSION = 1


class ModelFileError(ValueError):
    """The model file is malformed or does not match its dataset."""


class DigestMismatchError(ModelFileError):
    def __init__(self, path, expected: str, actual: str):
        super().__init__(f"dataset {path} has digest {actual}, model file expects {expected}")
        self.expected = expected
        self.actual = actual


class UnsupportedVersionError(ModelFileError):
    pass


def file_digest(path: Union[str, Path]) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _marginal_to_json(m) -> dict:
    if isinstance(m, DiscreteMarginal):
        return {"kind": "discrete", "pmf": [float(p) for p in m.pmf]}
    return {"kind": "continuous", "mean": m.mean, "variance": m.variance, "p": m.spec.p, "q": m.spec.q}


def _marginal_from_json(obj: dict):
    if obj["kind"] == "discrete":
        return DiscreteMarginal(np.array(obj["pmf"], dtype=float))
    return ContinuousMarginal(float(obj["mean"]), float(obj["variance"]), BetaSpec(float(obj["p"]), float(obj["q"])))


def model_to_json(model: EigenModel, data_path: Union[str, Path], model_path: Union[str, Path]) -> dict:
    data_path = Path(data_path).resolve()
    base = Path(model_path).resolve().parent
    return {
        "format_version": FORMAT_VERSION,
        "schema": model.schema.to_json(),
        "hyper": {"alpha": model.hyper.alpha, "beta": model.hyper.beta},
        "solver": {"damping": model.config.damping, "tolerance": model.config.tolerance,
                   "max_iterations": model.config.max_iterations},
        "chain_order": list(model.chain_order),
        "marginals": [_marginal_to_json(m) for m in model.marginals],
        "dataset": {"path": os.path.relpath(data_path, base), "sha256": file_digest(data_path)},
    }


def save_model(model: EigenModel, path: Union[str, Path], data_path: Union[str, Path]) -> None:
    """Write ``model`` to ``path``; ``data_path`` is the CSV the model was built from."""
    obj = model_to_json(model, data_path, path)
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def load_model(path: Union[str, Path]) -> EigenModel:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"model file {path}: {exc}") from None
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"model file {path} has format version {version!r}; "
                                      f"this build reads version {FORMAT_VERSION}")
    try:
        schema = Schema.from_json(obj["schema"])
        ref = obj["dataset"]
        data_path = (path.resolve().parent / ref["path"]).resolve()
        raw = data_path.read_bytes()
        actual = hashlib.sha256(raw).hexdigest()
        if actual != ref["sha256"]:
            raise DigestMismatchError(data_path, ref["sha256"], actual)
        dataset = load_dataset(io.StringIO(raw.decode("utf-8"), newline=""), schema)
        return EigenModel.from_dataset(
            dataset,
            HyperParams(**obj["hyper"]),
            SolverConfig(**obj["solver"]),
            obj["chain_order"],
            [_marginal_from_json(m) for m in obj["marginals"]],
        )
    except KeyError as exc:
        raise ModelFileError(f"model file {path} lacks field {exc}") from None
