"""Schemas, CSV ingestion, normalization and the membership encoding.

A dataset is held as an ``N x d`` float array. Discrete cells store the
category index, continuous cells store the raw value, and missing cells are
``NaN``. Continuous values are mapped to the unit interval with the bounds
stored on the attribute, then spread over ``basis`` triangular membership
functions whose centers descend from 1 to 0.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

DISCRETE = "discrete"
CONTINUOUS = "continuous"
DEFAULT_BASIS = 3


class SchemaError(ValueError):
    """The schema itself is malformed or does not match the data header."""


class DataError(ValueError):
    """A data cell cannot be parsed under its attribute spec."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.row = row
        self.column = column


@dataclass(frozen=True)
class AttributeSpec:
    """One column: either a discrete vocabulary or a continuous range.

    ``values``, ``minimum`` and ``maximum`` may be ``None`` on a spec read
    from a schema file; :func:`load_dataset` fills them from the data.
    """

    name: str
    kind: str
    values: Optional[tuple] = None
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    basis: int = DEFAULT_BASIS

    def __post_init__(self):
        if self.kind not in (DISCRETE, CONTINUOUS):
            raise SchemaError(f"attribute {self.name!r}: unknown type {self.kind!r}")
        if self.kind == DISCRETE and self.values is not None:
            if len(self.values) == 0:
                raise SchemaError(f"attribute {self.name!r}: empty value list")
            if len(set(self.values)) != len(self.values):
                raise SchemaError(f"attribute {self.name!r}: duplicate values")
        if self.kind == CONTINUOUS:
            if self.basis < 2:
                raise SchemaError(f"attribute {self.name!r}: basis must be >= 2")
            if self.minimum is not None and self.maximum is not None:
                if not self.minimum < self.maximum:
                    raise SchemaError(f"attribute {self.name!r}: min must be < max")

    @property
    def is_discrete(self) -> bool:
        return self.kind == DISCRETE

    @property
    def resolved(self) -> bool:
        if self.is_discrete:
            return self.values is not None
        return self.minimum is not None and self.maximum is not None

    @property
    def width(self) -> int:
        """Number of attribute-value nodes this column occupies in the graph."""
        return len(self.values) if self.is_discrete else self.basis

    def index_of(self, label: str) -> int:
        try:
            return self.values.index(label)
        except ValueError:
            raise DataError(f"value {label!r} not in vocabulary of {self.name!r}") from None

    def to_json(self) -> dict:
        out = {"name": self.name, "type": self.kind}
        if self.is_discrete:
            if self.values is not None:
                out["values"] = list(self.values)
        else:
            if self.minimum is not None:
                out["min"] = self.minimum
            if self.maximum is not None:
                out["max"] = self.maximum
            out["basis"] = self.basis
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "AttributeSpec":
        try:
            name = obj["name"]
            kind = obj["type"]
        except (KeyError, TypeError):
            raise SchemaError(f"schema entry needs 'name' and 'type': {obj!r}") from None
        values = obj.get("values")
        return cls(
            name=str(name),
            kind=kind,
            values=tuple(str(v) for v in values) if values is not None else None,
            minimum=float(obj["min"]) if obj.get("min") is not None else None,
            maximum=float(obj["max"]) if obj.get("max") is not None else None,
            basis=int(obj.get("basis", DEFAULT_BASIS)),
        )


@dataclass(frozen=True)
class Schema:
    attributes: tuple

    def __post_init__(self):
        if len(self.attributes) == 0:
            raise SchemaError("schema has no attributes")
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError("attribute names must be unique")

    def __len__(self) -> int:
        return len(self.attributes)

    def __getitem__(self, i: int) -> AttributeSpec:
        return self.attributes[i]

    def __iter__(self):
        return iter(self.attributes)

    @property
    def names(self) -> list:
        return [a.name for a in self.attributes]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaError(f"no attribute named {name!r}") from None

    @property
    def resolved(self) -> bool:
        return all(a.resolved for a in self.attributes)

    def to_json(self) -> list:
        return [a.to_json() for a in self.attributes]

    @classmethod
    def from_json(cls, obj: Sequence[dict]) -> "Schema":
        if not isinstance(obj, list):
            raise SchemaError("schema must be a JSON array of attribute objects")
        return cls(tuple(AttributeSpec.from_json(o) for o in obj))


def read_schema(path: Union[str, Path]) -> Schema:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"schema file {path}: {exc}") from None
    return Schema.from_json(obj)


@dataclass(frozen=True)
class Dataset:
    schema: Schema
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != len(self.schema):
            raise DataError(f"value grid has shape {self.values.shape}, schema has {len(self.schema)} columns")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def complete(self) -> bool:
        return not np.isnan(self.values).any()

    def missing_mask(self) -> np.ndarray:
        return np.isnan(self.values)

    def normalized_column(self, j: int) -> np.ndarray:
        spec = self.schema[j]
        return normalize_value(spec, self.values[:, j])

    def label(self, row: int, col: int) -> str:
        """Cell as it would appear in CSV ('' for missing)."""
        return format_cell(self.schema[col], self.values[row, col])


def _sort_labels(labels: Iterable[str]) -> tuple:
    labels = set(labels)
    try:
        return tuple(sorted(labels, key=float))
    except ValueError:
        return tuple(sorted(labels))


def _parse_float(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"malformed number {text!r}", row, column) from None
    if not math.isfinite(value):
        raise DataError(f"non-finite number {text!r}", row, column)
    return value


def load_dataset(source: Union[str, io.TextIOBase], schema: Schema) -> Dataset:
    """Parse CSV text (header required) under ``schema``.

    Rows are numbered from 1 in error messages, counting the first data
    record as row 1. Unresolved vocabularies and bounds are inferred from
    the data and the returned dataset carries a fully resolved schema.
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.reader(stream)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError("empty input: header row required") from None
    if header != schema.names:
        raise SchemaError(f"header {header} does not match schema attributes {schema.names}")

    raw_rows = []
    for r, record in enumerate(reader, start=1):
        if not record:
            continue
        if len(record) != len(header):
            raise DataError(f"expected {len(header)} fields, found {len(record)}", r)
        raw_rows.append([c.strip() for c in record])
    if not raw_rows:
        raise DataError("no rows")

    specs = list(schema.attributes)
    for j, spec in enumerate(specs):
        if spec.is_discrete and spec.values is None:
            specs[j] = replace(spec, values=_sort_labels(row[j] for row in raw_rows if row[j]))
            if not specs[j].values:
                raise DataError("cannot infer vocabulary of an all-missing column", column=spec.name)

    grid = np.full((len(raw_rows), len(specs)), np.nan)
    for r, row in enumerate(raw_rows, start=1):
        for j, (spec, cell) in enumerate(zip(specs, row)):
            if cell == "":
                continue
            if spec.is_discrete:
                if cell not in spec.values:
                    raise DataError(f"out-of-vocabulary value {cell!r}", r, spec.name)
                grid[r - 1, j] = spec.values.index(cell)
            else:
                grid[r - 1, j] = _parse_float(cell, r, spec.name)

    for j, spec in enumerate(specs):
        if not spec.is_discrete and not spec.resolved:
            col = grid[:, j][~np.isnan(grid[:, j])]
            if col.size == 0:
                raise DataError("cannot infer bounds of an all-missing column", column=spec.name)
            lo = spec.minimum if spec.minimum is not None else float(col.min())
            hi = spec.maximum if spec.maximum is not None else float(col.max())
            if not lo < hi:
                # constant column: give it a unit-width range so every value maps to 0
                hi = lo + 1.0
            specs[j] = replace(spec, minimum=lo, maximum=hi)

    return Dataset(Schema(tuple(specs)), grid)


def read_dataset(path: Union[str, Path], schema: Schema) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        return load_dataset(fh, schema)


def format_cell(spec: AttributeSpec, value: float) -> str:
    if np.isnan(value):
        return ""
    if spec.is_discrete:
        return spec.values[int(value)]
    return repr(float(value))


def dump_dataset(dataset: Dataset) -> str:
    """Write ``dataset`` in the CSV dialect read by :func:`load_dataset`."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(dataset.schema.names)
    for row in dataset.values:
        writer.writerow([format_cell(spec, v) for spec, v in zip(dataset.schema, row)])
    return buf.getvalue()


def normalize_value(spec: AttributeSpec, raw):
    """Map raw values onto [0, 1] with the spec's bounds; out-of-range values clamp."""
    u = (np.asarray(raw, dtype=float) - spec.minimum) / (spec.maximum - spec.minimum)
    u = np.clip(u, 0.0, 1.0)
    return float(u) if u.ndim == 0 else u


def denormalize_value(spec: AttributeSpec, u):
    out = spec.minimum + np.asarray(u, dtype=float) * (spec.maximum - spec.minimum)
    return float(out) if out.ndim == 0 else out


def basis_centers(k: int) -> np.ndarray:
    """Membership-function centers ``1 - j/(k-1)``; for k=3 this is [1, 0.5, 0]."""
    if k < 2:
        raise ValueError("basis count must be >= 2")
    return 1.0 - np.arange(k) / (k - 1)


def encode_membership(u, k: int = DEFAULT_BASIS) -> np.ndarray:
    """Triangular membership weights of ``u`` over ``k`` equally spaced centers.

    Accepts a scalar (returns shape ``(k,)``) or an array (returns
    ``u.shape + (k,)``). The weights form a partition of unity with at most
    two adjacent nonzero entries.
    """
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise ValueError("membership encoding needs values in [0, 1]")
    centers = basis_centers(k)
    w = np.maximum(0.0, 1.0 - np.abs(u[..., None] - centers) * (k - 1))
    return w / w.sum(axis=-1, keepdims=True)


def decode_membership(w, centers: Optional[np.ndarray] = None):
    """Inverse of :func:`encode_membership`: normalized weights dotted with the centers."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise ValueError("membership weights must be nonnegative")
    total = w.sum(axis=-1)
    if np.any(total <= 0):
        raise ValueError("cannot decode an all-zero membership vector")
    if centers is None:
        centers = basis_centers(w.shape[-1])
    out = (w @ centers) / total
    return float(out) if np.ndim(out) == 0 else out
