"""
Labeled binary-classification data for the wrapper.

Covers ingestion of the dense CSV and sparse "label idx:val" formats,
stratified train/test splitting, random oversampling of the minority class,
stratified sharding of the training rows across data islands, and projection
of a shard onto the columns selected by a feature mask.

Datasets and shards are immutable after construction and are shared
read-only by every island worker.
"""

import logging
import math
import re
from collections.abc import Sequence
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import sparse

from island_fss.errors import DatasetError

logger = logging.getLogger(__name__)

LABEL_COLUMN = "label"
WIDTH_PATTERN = re.compile(r"^\s*#\s*n_features\s*=\s*(\d+)\s*$")


@dataclass(frozen=True, eq=False)
class MinMaxScaling:
    """Per-column min-max scaling parameters fitted on the training split."""

    minimum: np.ndarray
    span: np.ndarray

    def apply(self, values: np.ndarray, columns: np.ndarray) -> np.ndarray:
        """Scale the given columns of a dense block into [0, 1]."""
        span = self.span[columns]
        scaled = (values - self.minimum[columns]) / np.where(span > 0, span, 1.0)
        # constant training columns carry no information
        scaled[:, span == 0] = 0.0
        return np.clip(scaled, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Row-major labeled binary-classification table.

    Feature values are stored raw, either as a dense float array or as a CSR
    matrix. When `scaling` is set, `matrix` returns min-max scaled values.
    """

    features: np.ndarray | sparse.csr_matrix
    labels: np.ndarray
    feature_names: tuple[str, ...] | None = None
    scaling: MinMaxScaling | None = None

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise DatasetError("labels must be a vector")
        if self.features.ndim != 2 or self.features.shape[0] != labels.shape[0]:
            raise DatasetError(
                f"feature matrix shape {self.features.shape} does not match {labels.shape[0]} labels"
            )
        if labels.shape[0] < 2:
            raise DatasetError(f"a dataset needs at least 2 rows, got {labels.shape[0]}")
        if self.features.shape[1] < 1:
            raise DatasetError("a dataset needs at least 1 feature")
        if not np.isin(labels, (0, 1)).all():
            raise DatasetError("labels must be 0 or 1")
        if np.unique(labels).size < 2:
            raise DatasetError(f"single-class dataset (only label {int(labels[0])})")
        if self.feature_names is not None and len(self.feature_names) != self.features.shape[1]:
            raise DatasetError("feature_names length does not match the number of features")
        if sparse.issparse(self.features) and not self.features.has_sorted_indices:
            raise DatasetError("sparse column indices must be strictly increasing within a row")
        object.__setattr__(self, "labels", labels.astype(np.int8))

    @property
    def n_rows(self) -> int:
        return int(self.labels.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.features)

    def class_counts(self) -> tuple[int, int]:
        """Return (negatives, positives)."""
        positives = int(self.labels.sum())
        return self.n_rows - positives, positives

    def raw_dense(self) -> np.ndarray:
        if self.is_sparse:
            return self.features.toarray()
        return np.asarray(self.features, dtype=np.float64)

    def take(self, row_ids: Sequence[int] | np.ndarray) -> "Dataset":
        """Materialize the given rows, in the given order, as a new Dataset."""
        row_ids = np.asarray(row_ids, dtype=np.intp)
        return replace(self, features=self.features[row_ids], labels=self.labels[row_ids])

    def with_scaling(self, scaling: MinMaxScaling | None) -> "Dataset":
        return replace(self, scaling=scaling)

    def matrix(self, row_ids: np.ndarray, columns: np.ndarray) -> np.ndarray:
        """Dense (scaled, if scaling is set) block of the given rows and columns."""
        if self.is_sparse:
            block = self.features[row_ids][:, columns].toarray()
        else:
            block = np.asarray(self.features[np.ix_(row_ids, columns)], dtype=np.float64)
        if self.scaling is not None:
            block = self.scaling.apply(block, columns)
        return block


@dataclass(frozen=True, eq=False)
class Shard:
    """A data island: a view on a subset of a parent dataset's rows."""

    parent: Dataset
    row_ids: np.ndarray

    def __post_init__(self):
        row_ids = np.asarray(self.row_ids, dtype=np.intp)
        if row_ids.size == 0:
            raise DatasetError("empty shard")
        if row_ids.min() < 0 or row_ids.max() >= self.parent.n_rows:
            raise DatasetError("shard row ids out of range")
        if np.unique(row_ids).size != row_ids.size:
            raise DatasetError("shard row ids must be unique")
        if np.unique(self.parent.labels[row_ids]).size < 2:
            raise DatasetError("shard contains a single class")
        object.__setattr__(self, "row_ids", row_ids)

    @classmethod
    def whole(cls, ds: Dataset) -> "Shard":
        return cls(ds, np.arange(ds.n_rows))

    @property
    def n_rows(self) -> int:
        return int(self.row_ids.size)

    @property
    def n_features(self) -> int:
        return self.parent.n_features

    @property
    def labels(self) -> np.ndarray:
        return self.parent.labels[self.row_ids]

    def to_dataset(self) -> Dataset:
        return self.parent.take(self.row_ids)


def load_dense(path: str | Path) -> Dataset:
    """
    Load a comma-separated file with a header row whose last column is "label".

    Args:
        path: CSV file path

    Returns:
        Dataset: raw (unscaled) features with row order preserved

    Raises:
        DatasetError: missing file, no data rows, non-numeric cell, bad label
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset not found: {path}")

    try:
        frame = pd.read_csv(path, float_precision="round_trip", skipinitialspace=True)
    except pd.errors.EmptyDataError as e:
        raise DatasetError(f"{path}: no data rows") from e
    except pd.errors.ParserError as e:
        raise DatasetError(f"{path}: {e}") from e

    if frame.shape[0] == 0:
        raise DatasetError(f"{path}: no data rows")
    if frame.columns[-1] != LABEL_COLUMN:
        raise DatasetError(f"{path}: last column must be named '{LABEL_COLUMN}', got '{frame.columns[-1]}'")

    feature_frame = frame.iloc[:, :-1]
    for column in feature_frame.columns:
        values = feature_frame[column]
        numeric = pd.api.types.is_numeric_dtype(values) and not pd.api.types.is_bool_dtype(values)
        if not numeric or values.isna().any():
            # bool cells (True/False) count as non-numeric
            bad = values.map(lambda v: isinstance(v, bool | np.bool_)) | pd.to_numeric(values, errors="coerce").isna()
            row = int(np.flatnonzero(bad.to_numpy())[0]) if bad.any() else 0
            raise DatasetError(f"{path}: non-numeric feature cell {values.iloc[row]!r} in column '{column}', row {row + 1}")

    label_values = pd.to_numeric(frame[LABEL_COLUMN], errors="coerce").to_numpy()
    bad = ~np.isin(label_values, (0, 1))
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise DatasetError(f"{path}: label outside {{0,1}}: {frame[LABEL_COLUMN].iloc[row]!r} at row {row + 1}")
    if np.unique(label_values).size < 2:
        raise DatasetError(f"{path}: single-class file")

    ds = Dataset(
        features=feature_frame.to_numpy(dtype=np.float64),
        labels=label_values.astype(np.int8),
        feature_names=tuple(str(c) for c in feature_frame.columns),
    )
    logger.debug(f"Loaded dense dataset {path}: {ds.n_rows} rows x {ds.n_features} features")
    return ds


def write_dense(ds: Dataset, path: str | Path) -> None:
    """Write raw feature values and labels in the dense CSV format."""
    names = ds.feature_names or tuple(f"f{j}" for j in range(ds.n_features))
    frame = pd.DataFrame(ds.raw_dense(), columns=list(names))
    frame[LABEL_COLUMN] = ds.labels.astype(int)
    frame.to_csv(path, index=False)


def _parse_sparse_label(token: str, lineno: int) -> int:
    try:
        value = float(token)
    except ValueError as e:
        raise DatasetError(f"line {lineno}: malformed label {token!r}") from e
    if value == 1.0:
        return 1
    if value in (0.0, -1.0):
        return 0
    raise DatasetError(f"line {lineno}: label outside {{0,1,+1,-1}}: {token!r}")


def load_sparse(path: str | Path) -> Dataset:
    """
    Load the sparse "label idx:val idx:val ..." format (1-based indices).

    Labels +1/-1 map to 1/0. Unstored cells read as 0. The number of
    features is taken from a "# n_features=N" comment line when present,
    otherwise it is the largest index seen.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset not found: {path}")

    declared: int | None = None
    labels: list[int] = []
    indices: list[int] = []
    values: list[float] = []
    indptr = [0]
    for lineno, raw_line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if width := WIDTH_PATTERN.match(raw_line):
            declared = int(width.group(1))
            continue
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        labels.append(_parse_sparse_label(tokens[0], lineno))
        previous = 0
        for token in tokens[1:]:
            index_text, sep, value_text = token.partition(":")
            try:
                if not sep:
                    raise ValueError(token)
                index = int(index_text)
                value = float(value_text)
            except ValueError as e:
                raise DatasetError(f"line {lineno}: malformed token {token!r}") from e
            if index < 1:
                raise DatasetError(f"line {lineno}: indices are 1-based, got {index}")
            if index <= previous:
                raise DatasetError(f"line {lineno}: indices not increasing ({index} after {previous})")
            previous = index
            indices.append(index - 1)
            values.append(value)
        indptr.append(len(indices))

    if not labels:
        raise DatasetError(f"{path}: empty file")
    if not indices and not declared:
        raise DatasetError(f"{path}: no feature values")
    n_features = max(indices) + 1 if indices else 0
    if declared is not None:
        if declared < n_features:
            raise DatasetError(f"{path}: index {n_features} exceeds declared n_features={declared}")
        n_features = declared

    features = sparse.csr_matrix(
        (np.asarray(values, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(labels), n_features),
    )
    ds = Dataset(features=features, labels=np.asarray(labels, dtype=np.int8))
    logger.debug(f"Loaded sparse dataset {path}: {ds.n_rows} rows x {ds.n_features} features")
    return ds


def write_sparse(ds: Dataset, path: str | Path) -> None:
    """Write raw values in the sparse format, omitting zero cells.

    The leading "# n_features=N" line keeps all-zero trailing columns.
    """
    matrix = sparse.csr_matrix(ds.features)
    lines = [f"# n_features={ds.n_features}"]
    for i in range(ds.n_rows):
        start, end = matrix.indptr[i], matrix.indptr[i + 1]
        tokens = [str(int(ds.labels[i]))]
        for j, v in zip(matrix.indices[start:end], matrix.data[start:end]):
            if v != 0:
                tokens.append(f"{j + 1}:{float(v)!r}")
        lines.append(" ".join(tokens))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def fit_min_max(train: Dataset) -> MinMaxScaling:
    """Fit per-column min-max scaling on the training split."""
    if train.is_sparse:
        minimum = train.features.min(axis=0).toarray().ravel()
        maximum = train.features.max(axis=0).toarray().ravel()
    else:
        minimum = train.features.min(axis=0)
        maximum = train.features.max(axis=0)
    minimum = np.asarray(minimum, dtype=np.float64)
    return MinMaxScaling(minimum=minimum, span=np.asarray(maximum, dtype=np.float64) - minimum)


def _class_rows(ds: Dataset) -> list[np.ndarray]:
    return [np.flatnonzero(ds.labels == c) for c in (0, 1)]


def stratified_split(ds: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """
    Split rows into train and test, per class, with round(count * fraction) test rows.

    Both halves keep the original relative row order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)

    train_ids, test_ids = [], []
    for label, rows in enumerate(_class_rows(ds)):
        n_test = math.floor(rows.size * test_fraction + 0.5)
        if n_test < 1 or n_test > rows.size - 1:
            raise DatasetError(
                f"class {label} has {rows.size} rows, too small to appear in both halves at fraction {test_fraction}"
            )
        shuffled = rng.permutation(rows)
        test_ids.append(shuffled[:n_test])
        train_ids.append(shuffled[n_test:])

    train = ds.take(np.sort(np.concatenate(train_ids)))
    test = ds.take(np.sort(np.concatenate(test_ids)))
    logger.debug(f"Stratified split: {train.n_rows} train rows, {test.n_rows} test rows")
    return train, test


def random_oversample(ds: Dataset, seed: int) -> Dataset:
    """Duplicate uniformly drawn minority rows until both classes have equal counts."""
    negatives, positives = _class_rows(ds)
    if negatives.size == positives.size:
        return ds
    minority, majority = (negatives, positives) if negatives.size < positives.size else (positives, negatives)
    rng = np.random.default_rng(seed)
    extra = rng.choice(minority, size=majority.size - minority.size, replace=True)
    logger.debug(f"Random oversampling: {extra.size} minority rows duplicated")
    return ds.take(np.concatenate([np.arange(ds.n_rows), extra]))


def shard_rows(ds: Dataset, k: int, seed: int | np.random.SeedSequence) -> list[Shard]:
    """Partition rows into k disjoint shards, stratified per class."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    rng = np.random.default_rng(seed)

    parts: list[list[np.ndarray]] = [[] for _ in range(k)]
    for label, rows in enumerate(_class_rows(ds)):
        if rows.size < k:
            raise DatasetError(f"class {label} has {rows.size} rows, fewer than {k} islands")
        for i, chunk in enumerate(np.array_split(rng.permutation(rows), k)):
            parts[i].append(chunk)

    return [Shard(ds, np.sort(np.concatenate(chunks))) for chunks in parts]


def project(shard: Shard, mask: Sequence[bool] | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Project a shard onto the columns selected by a binary mask.

    Returns:
        (X, y): X has one column per set bit, in ascending column order
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (shard.n_features,):
        raise DatasetError(f"mask length {mask.size} does not match {shard.n_features} features")
    columns = np.flatnonzero(mask)
    if columns.size == 0:
        raise DatasetError("empty feature mask")
    return shard.parent.matrix(shard.row_ids, columns), shard.labels.copy()
