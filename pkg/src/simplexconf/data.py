"""Reading compositional data sets and persisting fitted models."""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .exceptions import ParseError, SchemaError
from .regression import (
    Coefficients,
    Convergence,
    Dataset,
    FittedModel,
    Standardization,
)

__all__ = [
    "DatasetSchema",
    "BUDGET_ITALY_SCHEMA",
    "budget_italy_path",
    "load_schema",
    "save_schema",
    "load_dataset",
    "save_model",
    "load_model",
    "MODEL_FORMAT",
]

SHARE_FLOOR = 1e-6
MODEL_FORMAT = "simplexconf-model/1"
_LOG_EXPR = re.compile(r"^log\((.+)\)$")


def _base_column(entry):
    m = _LOG_EXPR.match(entry)
    return m.group(1) if m else entry


@dataclass(frozen=True)
class DatasetSchema:
    """Which columns form the response and the two design matrices.

    Covariate entries are column names or ``log(name)``.  ``standardize``
    is either a bool applied to every covariate or a list of the entries
    to standardize.  Intercepts are added automatically.
    """

    response_columns: tuple
    mean_covariate_columns: tuple = ()
    precision_covariate_columns: tuple = ()
    standardize: object = True

    def __post_init__(self):
        for name in ("response_columns", "mean_covariate_columns", "precision_covariate_columns"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if len(self.response_columns) < 2:
            raise SchemaError("need at least two response columns")
        cov = {_base_column(c) for c in self.mean_covariate_columns + self.precision_covariate_columns}
        clash = cov & set(self.response_columns)
        if clash:
            raise SchemaError(f"columns used as both response and covariate: {sorted(clash)}")
        if not isinstance(self.standardize, bool):
            object.__setattr__(self, "standardize", tuple(self.standardize))

    def standardizes(self, entry) -> bool:
        if isinstance(self.standardize, bool):
            return self.standardize
        return entry in self.standardize

    def to_dict(self):
        return {
            "response": list(self.response_columns),
            "mean_covariates": list(self.mean_covariate_columns),
            "precision_covariates": list(self.precision_covariate_columns),
            "standardize": self.standardize if isinstance(self.standardize, bool)
            else list(self.standardize),
        }

    @classmethod
    def from_dict(cls, d):
        if "response" not in d:
            raise SchemaError("schema is missing the 'response' list")
        return cls(
            d["response"],
            d.get("mean_covariates", ()),
            d.get("precision_covariates", ()),
            d.get("standardize", True),
        )


# socioeconomic profile plus the three price indices; precision is intercept-only
BUDGET_ITALY_SCHEMA = DatasetSchema(
    ("wfood", "whouse", "wmisc"),
    ("log(income)", "size", "pfood", "phouse", "pmisc"),
    (),
    True,
)


def budget_italy_path() -> Path:
    """Bundled copy of the Italian household budget-share data (n = 1729)."""
    return Path(str(resources.files("simplexconf") / "data" / "BudgetItaly.csv"))


def load_schema(path) -> DatasetSchema:
    try:
        with open(path) as fh:
            return DatasetSchema.from_dict(json.load(fh))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc


def save_schema(schema: DatasetSchema, path):
    with open(path, "w") as fh:
        json.dump(schema.to_dict(), fh, indent=2)
        fh.write("\n")


def _read_table(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file")
        rows = [r for r in reader if r]
    return [h.strip() for h in header], rows


def _column(entry, header, rows, path):
    base = _base_column(entry)
    if base not in header:
        raise ParseError(f"{path}: missing column {base!r}")
    k = header.index(base)
    out = np.empty(len(rows))
    for i, row in enumerate(rows):
        line = i + 2
        try:
            v = float(row[k])
        except (ValueError, IndexError):
            raise ParseError(f"{path}: row {line}: non-numeric value in column {base!r}")
        if not math.isfinite(v):
            raise ParseError(f"{path}: row {line}: non-finite value in column {base!r}")
        if base != entry:
            if v <= 0:
                raise ParseError(f"{path}: row {line}: cannot take log of {v} in column {base!r}")
            v = math.log(v)
        out[i] = v
    return out


def load_dataset(path, schema: DatasetSchema = BUDGET_ITALY_SCHEMA) -> Dataset:
    """Parse a delimited text file into a :class:`Dataset`.

    Response rows are scaled to sum to one, clamped into
    ``[1e-6, 1 - 1e-6]`` and renormalized.  Standardization parameters are
    estimated on this file and stored on the dataset (not applied to the
    raw matrices).

    Raises
    ------
    ParseError
        On a missing column, a non-numeric cell, a negative share or an
        all-zero share row; the message names the file row.
    """
    header, rows = _read_table(path)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    Y = np.column_stack([_column(c, header, rows, path) for c in schema.response_columns])
    for i, row in enumerate(Y):
        if np.any(row < 0):
            raise ParseError(f"{path}: row {i + 2}: negative share")
        if not np.any(row > 0):
            raise ParseError(f"{path}: row {i + 2}: all shares are zero")
    Y = Y / Y.sum(axis=1, keepdims=True)
    Y = np.clip(Y, SHARE_FLOOR, 1.0 - SHARE_FLOOR)
    Y = Y / Y.sum(axis=1, keepdims=True)

    def design(entries):
        cols = [np.ones(len(rows))] + [_column(c, header, rows, path) for c in entries]
        mask = [False] + [schema.standardizes(c) for c in entries]
        return np.column_stack(cols), mask

    X, x_mask = design(schema.mean_covariate_columns)
    Z, z_mask = design(schema.precision_covariate_columns)
    std = None
    if any(x_mask) or any(z_mask):
        std = Standardization.fit(X, Z, x_mask, z_mask)
    return Dataset(
        X, Z, Y, std,
        ("(intercept)",) + schema.mean_covariate_columns,
        ("(intercept)",) + schema.precision_covariate_columns,
        schema.response_columns,
    )


def _floats(a):
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]


def save_model(model: FittedModel, path, schema: Optional[DatasetSchema] = None):
    """Write a model as JSON; floats use shortest round-trip repr (bit exact)."""
    c = model.coefficients
    doc = {
        "format": MODEL_FORMAT,
        "D": model.D,
        "beta": [_floats(row) for row in c.beta],
        "gamma": _floats(c.gamma),
        "convergence": {
            "iterations": model.convergence.iterations,
            "grad_norm": model.convergence.grad_norm,
            "nll": model.convergence.nll,
            "converged": model.convergence.converged,
        },
        "standardization": None,
        "metadata": model.metadata,
    }
    if model.standardization is not None:
        s = model.standardization
        doc["standardization"] = {
            "x_mean": _floats(s.x_mean), "x_scale": _floats(s.x_scale),
            "z_mean": _floats(s.z_mean), "z_scale": _floats(s.z_scale),
        }
    if schema is not None:
        doc["schema"] = schema.to_dict()
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _require(doc, key):
    if key not in doc:
        raise SchemaError(f"model document is missing the {key!r} block")
    return doc[key]


def load_model(path):
    """Read a model written by :func:`save_model`.

    Returns ``(model, schema)``; ``schema`` is ``None`` if none was stored.
    """
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: malformed model document ({exc})") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: model document must be a JSON object")
    fmt = _require(doc, "format")
    if fmt != MODEL_FORMAT:
        raise SchemaError(f"unsupported model format {fmt!r} (expected {MODEL_FORMAT!r})")
    D = int(_require(doc, "D"))
    coeffs = Coefficients(np.array(_require(doc, "beta"), dtype=float),
                          np.array(_require(doc, "gamma"), dtype=float))
    if coeffs.D != D:
        raise SchemaError(f"beta block has {coeffs.D - 1} rows, expected {D - 1}")
    conv = _require(doc, "convergence")
    std = doc.get("standardization")
    if std is not None:
        std = Standardization(*(np.array(_require(std, k), dtype=float)
                                for k in ("x_mean", "x_scale", "z_mean", "z_scale")))
    model = FittedModel(
        coeffs, D,
        Convergence(int(conv["iterations"]), float(conv["grad_norm"]),
                    float(conv["nll"]), bool(conv["converged"])),
        std, doc.get("metadata", {}),
    )
    schema = DatasetSchema.from_dict(doc["schema"]) if "schema" in doc else None
    return model, schema
