"""Bundled example datasets."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .schema import Dataset, read_dataset, read_schema

NAMES = ("australian", "playtennis", "playtennis_numeric")


def data_path(name: str) -> Path:
    """Path of the bundled CSV ``name``; its schema sits beside it as ``name.schema.json``."""
    if name not in NAMES:
        raise KeyError(f"unknown dataset {name!r}; choose from {NAMES}")
    return Path(str(resources.files("eigenprob") / "data" / f"{name}.csv"))


def schema_path(name: str) -> Path:
    return data_path(name).with_suffix(".schema.json")


def load(name: str) -> Dataset:
    return read_dataset(data_path(name), read_schema(schema_path(name)))


def australian() -> Dataset:
    """690 credit applications, 14 attributes plus the approval class."""
    return load("australian")


def playtennis() -> Dataset:
    """The two-row weather toy."""
    return load("playtennis")


def playtennis_numeric() -> Dataset:
    """Ten weather rows with continuous temperature and humidity."""
    return load("playtennis_numeric")
