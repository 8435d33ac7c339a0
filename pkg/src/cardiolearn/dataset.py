"""Loading, validation, and summary statistics for the 12-column heart-risk table."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyInputError,
    InsufficientDataError,
    ParseError,
    SchemaError,
)

NUMERIC = "numeric"
NOMINAL = "nominal"

HISTOGRAM_BINS = 20


@dataclass(frozen=True)
class ColumnSpec:
    """One column of the table: a numeric measurement or a coded nominal."""

    name: str
    kind: str
    domain: tuple[int, ...] | None = None
    units: str = ""

    def __post_init__(self):
        if self.kind not in (NUMERIC, NOMINAL):
            raise SchemaError(f"unknown column kind {self.kind!r} for {self.name!r}")
        if self.kind == NOMINAL and not self.domain:
            raise SchemaError(f"nominal column {self.name!r} needs a domain")


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered 12-column schema; the last column is the binary target."""

    columns: tuple[ColumnSpec, ...]

    def __post_init__(self):
        if len(self.columns) != 12:
            raise SchemaError(f"schema must have 12 columns, got {len(self.columns)}")
        target = self.columns[-1]
        if target.kind != NOMINAL or target.domain != (0, 1):
            raise SchemaError("last column must be a nominal target with domain {0, 1}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    @property
    def feature_columns(self) -> tuple[ColumnSpec, ...]:
        return self.columns[:-1]

    @property
    def target_column(self) -> ColumnSpec:
        return self.columns[-1]

    @property
    def numeric_columns(self) -> tuple[ColumnSpec, ...]:
        return tuple(c for c in self.feature_columns if c.kind == NUMERIC)

    @property
    def nominal_feature_columns(self) -> tuple[ColumnSpec, ...]:
        return tuple(c for c in self.feature_columns if c.kind == NOMINAL)

    def column(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"unknown column {name!r}")

    def fingerprint(self) -> str:
        """Stable hash of names, kinds, and domains; stored in model artifacts."""
        parts = []
        for c in self.columns:
            domain = ",".join(str(v) for v in c.domain) if c.domain else "-"
            parts.append(f"{c.name}|{c.kind}|{domain}")
        text = ";".join(parts)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


#: Canonical schema with the public file's headers and the documented domains.
DEFAULT_SCHEMA = FeatureSchema(
    columns=(
        ColumnSpec("age", NUMERIC, units="years"),
        ColumnSpec("sex", NOMINAL, domain=(0, 1)),
        ColumnSpec("chest pain type", NOMINAL, domain=(1, 2, 3, 4)),
        ColumnSpec("resting bp s", NUMERIC, units="mm/HG"),
        ColumnSpec("cholesterol", NUMERIC, units="mg/dl"),
        ColumnSpec("fasting blood sugar", NOMINAL, domain=(0, 1)),
        ColumnSpec("resting ecg", NOMINAL, domain=(0, 1, 2)),
        ColumnSpec("max heart rate", NUMERIC, units="bpm"),
        ColumnSpec("exercise angina", NOMINAL, domain=(0, 1)),
        ColumnSpec("oldpeak", NUMERIC, units="ST depression"),
        ColumnSpec("ST slope", NOMINAL, domain=(0, 1, 2, 3)),
        ColumnSpec("target", NOMINAL, domain=(0, 1)),
    )
)


@dataclass(frozen=True)
class Provenance:
    source: str
    n_rows: int


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix (n x 11) plus binary target vector.

    Cell values are stored as parsed, so a not-yet-validated dataset may hold
    out-of-domain nominal codes; run :func:`validate` before training.
    """

    features: np.ndarray
    target: np.ndarray
    schema: FeatureSchema
    provenance: Provenance

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[1] != len(self.schema.feature_columns):
            raise SchemaError(f"feature matrix must be n x 11, got {self.features.shape}")
        if self.target.shape != (self.features.shape[0],):
            raise SchemaError("target length must match the number of rows")
        self.features.setflags(write=False)
        self.target.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    def column_values(self, name: str) -> np.ndarray:
        """Values of one column by canonical name (feature or target)."""
        if name == self.schema.target_column.name:
            return self.target
        idx = [c.name for c in self.schema.feature_columns].index(name)
        return self.features[:, idx]

    def subset(self, indices: np.ndarray, tag: str) -> "Dataset":
        """New Dataset holding the given rows; provenance records the tag."""
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(
            features=self.features[idx].copy(),
            target=self.target[idx].copy(),
            schema=self.schema,
            provenance=Provenance(f"{self.provenance.source}[{tag}]", len(idx)),
        )

    def equals(self, other: "Dataset") -> bool:
        """Value equality of cells and schema; provenance is ignored."""
        return (
            self.schema == other.schema
            and self.features.shape == other.features.shape
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.target, other.target)
        )


@dataclass(frozen=True)
class RowError:
    row: int
    column: str
    value: float
    rule: str


@dataclass(frozen=True)
class ValidationReport:
    row_errors: tuple[RowError, ...]
    warnings: tuple[str, ...]

    @property
    def is_valid(self) -> bool:
        return not self.row_errors


@dataclass(frozen=True)
class NumericSummary:
    mean: float
    std: float
    min: float
    max: float
    histogram_counts: tuple[int, ...]
    histogram_edges: tuple[float, ...]


@dataclass(frozen=True)
class SummaryStats:
    numeric: dict[str, NumericSummary]
    nominal_counts: dict[str, dict[int, int]]
    class_balance: dict[int, int]
    correlation: np.ndarray = field(repr=False)
    correlation_columns: tuple[str, ...] = ()


def _read_rows(path: str) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    except FileNotFoundError:
        raise SchemaError(f"data file not found: {path}") from None
    if not rows:
        raise EmptyInputError(f"{path}: file is empty")
    return rows[0], rows[1:]


def load_csv(
    path: str,
    header_map: dict[str, str] | None = None,
    schema: FeatureSchema = DEFAULT_SCHEMA,
) -> Dataset:
    """Load a comma-separated table into a Dataset, reordering to canonical columns.

    ``header_map`` translates external header names to canonical ones before the
    schema check; every canonical name must then appear exactly once.
    """
    header, data_rows = _read_rows(path)
    header = [h.strip() for h in header]
    if header_map:
        header = [header_map.get(h, h) for h in header]

    positions: dict[str, int] = {}
    for pos, name in enumerate(header):
        if name in positions:
            raise SchemaError(f"duplicate column {name!r}")
        positions[name] = pos
    for name in schema.names:
        if name not in positions:
            raise SchemaError(f"missing column {name!r}")
    for name in positions:
        if name not in schema.names:
            raise SchemaError(f"unexpected column {name!r}")

    if not data_rows:
        raise EmptyInputError(f"{path}: header only, no data rows")

    n = len(data_rows)
    values = np.empty((n, 12), dtype=np.float64)
    order = [positions[name] for name in schema.names]
    for i, row in enumerate(data_rows):
        if len(row) != len(header):
            raise ParseError(f"row {i}: expected {len(header)} cells, got {len(row)}")
        for j, pos in enumerate(order):
            cell = row[pos].strip()
            if not cell:
                raise ParseError(f"row {i}, column {schema.names[j]!r}: empty cell")
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise ParseError(
                    f"row {i}, column {schema.names[j]!r}: cannot parse {cell!r}"
                ) from None

    return Dataset(
        features=values[:, :-1].copy(),
        target=values[:, -1].copy(),
        schema=schema,
        provenance=Provenance(str(path), n),
    )


def write_csv(d: Dataset, path: str) -> None:
    """Serialize a Dataset back to canonical-header CSV (round-trip stable)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(d.schema.names)
        for i in range(d.n_rows):
            row = [repr(float(v)) for v in d.features[i]]
            row.append(repr(float(d.target[i])))
            writer.writerow(row)


def validate(d: Dataset) -> ValidationReport:
    """Check every cell against the schema; returns a report, never raises.

    Nominal cells must lie in their coded domain, numeric cells must be finite.
    A cholesterol or resting blood pressure of exactly zero is physiologically
    implausible but kept as data, so it produces a warning rather than an error.
    """
    errors: list[RowError] = []
    warnings: list[str] = []

    for j, col in enumerate(d.schema.feature_columns):
        column = d.features[:, j]
        if col.kind == NOMINAL:
            bad = ~np.isin(column, col.domain)
            rule = "value not in {" + ",".join(str(v) for v in col.domain) + "}"
            for i in np.flatnonzero(bad):
                errors.append(RowError(int(i), col.name, float(column[i]), rule))
        else:
            bad = ~np.isfinite(column)
            for i in np.flatnonzero(bad):
                errors.append(RowError(int(i), col.name, float(column[i]), "value not finite"))
            if col.name in ("cholesterol", "resting bp s"):
                for i in np.flatnonzero(column == 0.0):
                    warnings.append(f"row {int(i)}: {col.name} is 0")

    tcol = d.schema.target_column
    bad = ~np.isin(d.target, tcol.domain)
    rule = "value not in {0,1}"
    for i in np.flatnonzero(bad):
        errors.append(RowError(int(i), tcol.name, float(d.target[i]), rule))

    errors.sort(key=lambda e: (e.row, d.schema.names.index(e.column)))
    return ValidationReport(tuple(errors), tuple(warnings))


def pearson_correlation(matrix: np.ndarray) -> np.ndarray:
    """Pearson correlation of the columns; zero-variance columns yield NaN entries."""
    m = np.asarray(matrix, dtype=np.float64)
    centered = m - m.mean(axis=0)
    std = np.sqrt((centered**2).mean(axis=0))
    k = m.shape[1]
    corr = np.full((k, k), np.nan)
    ok = std > 0.0
    cov = centered.T @ centered / m.shape[0]
    denom = np.outer(std, std)
    valid = np.outer(ok, ok)
    corr[valid] = (cov / np.where(denom == 0.0, 1.0, denom))[valid]
    corr[np.ix_(ok, ok)] = np.clip(corr[np.ix_(ok, ok)], -1.0, 1.0)
    np.fill_diagonal(corr, np.where(ok, 1.0, np.nan))
    corr = (corr + corr.T) / 2.0
    return corr


def summarize(d: Dataset) -> SummaryStats:
    """Per-column summaries, class balance, and the numeric correlation matrix."""
    if d.n_rows < 2:
        raise InsufficientDataError(f"need at least 2 rows to summarize, got {d.n_rows}")

    numeric: dict[str, NumericSummary] = {}
    numeric_values = []
    for col in d.schema.numeric_columns:
        v = d.column_values(col.name)
        counts, edges = np.histogram(v, bins=HISTOGRAM_BINS)
        numeric[col.name] = NumericSummary(
            mean=float(v.mean()),
            std=float(v.std()),
            min=float(v.min()),
            max=float(v.max()),
            histogram_counts=tuple(int(c) for c in counts),
            histogram_edges=tuple(float(e) for e in edges),
        )
        numeric_values.append(v)

    nominal_counts: dict[str, dict[int, int]] = {}
    for col in d.schema.nominal_feature_columns:
        v = d.column_values(col.name)
        nominal_counts[col.name] = {
            level: int(np.sum(v == level)) for level in col.domain
        }

    class_balance = {
        level: int(np.sum(d.target == level)) for level in d.schema.target_column.domain
    }

    corr = pearson_correlation(np.column_stack(numeric_values))
    return SummaryStats(
        numeric=numeric,
        nominal_counts=nominal_counts,
        class_balance=class_balance,
        correlation=corr,
        correlation_columns=tuple(c.name for c in d.schema.numeric_columns),
    )
