"""
Dataset container, validation and CSV ingestion.
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.utility_modules.enums import CovariateKind, OutcomeMode
from src.utility_modules.error_handling import (
    EmptyData,
    NonBinaryOutcome,
    ConstantOutcome,
    DimensionMismatch,
    InvalidParameter,
    SingleLevel,
    SchemaMismatch,
    UnknownCategoryLevel,
    ValidationFailure,
)

logger = logging.getLogger(__name__)

# Categorical split masks are stored as uint64 bit sets.
MAX_CATEGORY_LEVELS = 64

@dataclass(frozen=True)
class Dataset:
    """
    Covariates, outcomes and an optional treatment column.

    Categorical covariates hold level indices 0..L-1 (as floats) and keep the
    original labels in ``level_labels`` so that new data can be encoded with
    the training schema.
    """
    covariates: np.ndarray
    outcomes: np.ndarray
    covariate_kinds: Tuple[CovariateKind, ...]
    mode: OutcomeMode = OutcomeMode.CONTINUOUS
    covariate_names: Tuple[str, ...] = ()
    outcome_names: Tuple[str, ...] = ()
    n_levels: Tuple[int, ...] = ()
    level_labels: Tuple[Optional[Tuple[str, ...]], ...] = ()
    treatment: Optional[np.ndarray] = None
    treatment_name: str = "treatment"

    @property
    def n(self) -> int:
        return self.covariates.shape[0]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]

    @property
    def d(self) -> int:
        return self.outcomes.shape[1]

    @property
    def is_categorical(self) -> np.ndarray:
        return np.array([kind == CovariateKind.CATEGORICAL for kind in self.covariate_kinds], dtype=bool)

    def dummy_matrix(self) -> np.ndarray:
        """Design matrix with continuous columns as-is and categoricals dummy-encoded (first level dropped)."""
        blocks = []
        for k, kind in enumerate(self.covariate_kinds):
            column = self.covariates[:, k]
            if kind == CovariateKind.CATEGORICAL:
                levels = column.astype(int)
                for level in range(1, self.n_levels[k]):
                    blocks.append((levels == level).astype(float))
            else:
                blocks.append(column.astype(float))
        if not blocks:
            return np.empty((self.n, 0))
        return np.column_stack(blocks)

    def with_covariate(self, name: str, values: np.ndarray) -> "Dataset":
        """Return a copy with one continuous covariate column appended."""
        values = np.asarray(values, dtype=float).reshape(-1)
        if values.shape[0] != self.n:
            raise DimensionMismatch(f"Column {name} has {values.shape[0]} rows, expected {self.n}")
        return replace(
            self,
            covariates=np.column_stack([self.covariates, values]),
            covariate_kinds=self.covariate_kinds + (CovariateKind.CONTINUOUS,),
            covariate_names=self.covariate_names + (name,),
            n_levels=self.n_levels + (0,),
            level_labels=self.level_labels + (None,),
        )

    def select_outcomes(self, indices: Sequence[int]) -> "Dataset":
        indices = list(indices)
        return replace(
            self,
            outcomes=self.outcomes[:, indices],
            outcome_names=tuple(self.outcome_names[i] for i in indices),
        )

    def check_covariates(self, covariates: np.ndarray) -> np.ndarray:
        """
        Check a covariate matrix against this dataset's schema.

        Args:
            covariates (np.ndarray): n_new x p matrix in encoded form

        Returns:
            np.ndarray: The matrix as float

        Raises:
            SchemaMismatch: If the column count differs
            UnknownCategoryLevel: If a categorical column holds an unseen level
        """
        covariates = np.atleast_2d(np.asarray(covariates, dtype=float))
        if covariates.shape[1] != self.p:
            raise SchemaMismatch(f"Expected {self.p} covariate columns, got {covariates.shape[1]}")
        for k in np.flatnonzero(self.is_categorical):
            column = covariates[:, k]
            bad = (column < 0) | (column >= self.n_levels[k]) | (column != np.round(column))
            if bad.any():
                raise UnknownCategoryLevel(
                    f"Column {self.covariate_names[k]} has level {column[bad][0]!r} not seen in training"
                )
        return covariates

    def encode_new(self, frame: pd.DataFrame) -> np.ndarray:
        """
        Encode a new data frame with the training schema.

        Args:
            frame (pd.DataFrame): New rows with the training covariate columns

        Returns:
            np.ndarray: Encoded covariate matrix

        Raises:
            SchemaMismatch: If a covariate column is missing
            UnknownCategoryLevel: If a categorical label was not seen in training
        """
        columns = []
        for k, name in enumerate(self.covariate_names):
            if name not in frame.columns:
                raise SchemaMismatch(f"Missing covariate column: {name}")
            values = frame[name]
            if values.isna().any():
                raise SchemaMismatch(f"Column {name} has missing cells")
            if self.covariate_kinds[k] == CovariateKind.CATEGORICAL:
                lookup = {label: index for index, label in enumerate(self.level_labels[k])}
                encoded = []
                for label in values.astype(str):
                    if label not in lookup:
                        raise UnknownCategoryLevel(f"Column {name} has level {label!r} not seen in training")
                    encoded.append(lookup[label])
                columns.append(np.asarray(encoded, dtype=float))
            else:
                try:
                    columns.append(values.astype(float).to_numpy())
                except (TypeError, ValueError) as e:
                    raise SchemaMismatch(f"Column {name} is not numeric: {e}")
        return np.column_stack(columns) if columns else np.empty((len(frame), 0))

def _compact_levels(column: np.ndarray, labels: Optional[Tuple[str, ...]], name: str):
    observed = np.unique(column)
    if observed.size < 2:
        raise SingleLevel(f"Categorical column {name} has fewer than 2 observed levels")
    if observed.size > MAX_CATEGORY_LEVELS:
        raise InvalidParameter(f"Categorical column {name} has more than {MAX_CATEGORY_LEVELS} levels")
    compact = np.searchsorted(observed, column).astype(float)
    if labels is None:
        new_labels = tuple(str(int(level)) if float(level).is_integer() else str(level) for level in observed)
    else:
        new_labels = tuple(labels[int(level)] for level in observed)
    return compact, observed.size, new_labels

def validate_dataset(raw: Dataset) -> Dataset:
    """
    Check a parsed dataset and compact categorical levels to 0..L-1.

    Args:
        raw (Dataset): Dataset as parsed from ingestion or a generator

    Returns:
        Dataset: Validated dataset

    Raises:
        EmptyData: If there are too few rows, no covariates or no outcomes
        NonBinaryOutcome: If a probit outcome holds values other than 0 and 1
        ConstantOutcome: If a continuous outcome column is constant
    """
    covariates = np.asarray(raw.covariates, dtype=float)
    outcomes = np.asarray(raw.outcomes, dtype=float)
    if outcomes.ndim == 1:
        outcomes = outcomes.reshape(-1, 1)
    if covariates.ndim == 1:
        covariates = covariates.reshape(-1, 1)

    if covariates.size == 0 or outcomes.size == 0:
        raise EmptyData("Dataset has no rows, covariates or outcomes")
    n, p = covariates.shape
    d = outcomes.shape[1]
    if n < 2:
        raise EmptyData(f"Dataset needs at least 2 rows, got {n}")
    if outcomes.shape[0] != n:
        raise DimensionMismatch(f"Covariates have {n} rows but outcomes have {outcomes.shape[0]}")
    if len(raw.covariate_kinds) != p:
        raise DimensionMismatch(f"Expected {p} covariate kinds, got {len(raw.covariate_kinds)}")
    if not np.isfinite(covariates).all() or not np.isfinite(outcomes).all():
        raise ValidationFailure("Dataset contains missing or non-finite cells")

    if raw.mode == OutcomeMode.PROBIT:
        if not np.isin(outcomes, (0.0, 1.0)).all():
            raise NonBinaryOutcome("Probit outcomes must contain only 0 and 1")
    else:
        spans = outcomes.max(axis=0) - outcomes.min(axis=0)
        for j in np.flatnonzero(spans <= 0):
            raise ConstantOutcome(f"Outcome column {j} is constant")

    treatment = raw.treatment
    if treatment is not None:
        treatment = np.asarray(treatment, dtype=float).reshape(-1)
        if treatment.shape[0] != n:
            raise DimensionMismatch(f"Treatment has {treatment.shape[0]} rows, expected {n}")
        if not np.isin(treatment, (0.0, 1.0)).all():
            raise ValidationFailure("Treatment must contain only 0 and 1")

    covariate_names = raw.covariate_names or tuple(f"x{k + 1}" for k in range(p))
    outcome_names = raw.outcome_names or tuple(f"y{j + 1}" for j in range(d))
    input_labels = raw.level_labels or (None,) * p

    covariates = covariates.copy()
    n_levels = []
    level_labels = []
    for k, kind in enumerate(raw.covariate_kinds):
        if kind == CovariateKind.CATEGORICAL:
            compact, size, labels = _compact_levels(covariates[:, k], input_labels[k], covariate_names[k])
            covariates[:, k] = compact
            n_levels.append(size)
            level_labels.append(labels)
        else:
            n_levels.append(0)
            level_labels.append(None)

    return replace(
        raw,
        covariates=covariates,
        outcomes=outcomes,
        covariate_kinds=tuple(raw.covariate_kinds),
        covariate_names=tuple(covariate_names),
        outcome_names=tuple(outcome_names),
        n_levels=tuple(n_levels),
        level_labels=tuple(level_labels),
        treatment=treatment,
    )

def infer_mode(outcomes: np.ndarray) -> OutcomeMode:
    """Probit when every outcome value is 0 or 1, continuous otherwise."""
    return OutcomeMode.PROBIT if np.isin(outcomes, (0.0, 1.0)).all() else OutcomeMode.CONTINUOUS

def load_dataset_csv(
    path: Path,
    outcome_cols: Sequence[str],
    categorical_cols: Sequence[str] = (),
    treatment_col: Optional[str] = None,
    covariate_cols: Optional[Sequence[str]] = None,
    mode: Optional[OutcomeMode] = None,
) -> Dataset:
    """
    Read a CSV file (header row required) into a validated dataset.

    Args:
        path (Path): CSV file
        outcome_cols (Sequence[str]): Outcome columns, in model order
        categorical_cols (Sequence[str]): Covariates to treat as categorical
        treatment_col (Optional[str]): Binary treatment column kept apart from the covariates
        covariate_cols (Optional[Sequence[str]]): Covariates; all remaining columns if omitted
        mode (Optional[OutcomeMode]): Outcome mode; inferred from the outcome values if omitted

    Returns:
        Dataset: Validated dataset

    Raises:
        SchemaMismatch: If the file is malformed or a named column is missing
    """
    try:
        frame = pd.read_csv(path, on_bad_lines="error")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise SchemaMismatch(f"Could not parse {path}: {e}")

    required = list(outcome_cols) + list(categorical_cols) + ([treatment_col] if treatment_col else [])
    if covariate_cols is not None:
        required += list(covariate_cols)
    for name in required:
        if name not in frame.columns:
            raise SchemaMismatch(f"Missing column: {name}")
    if frame.empty:
        raise EmptyData(f"{path} has no data rows")
    if frame.isna().any().any():
        column = frame.columns[frame.isna().any()][0]
        raise ValidationFailure(f"Column {column} has missing cells")

    excluded = set(outcome_cols) | ({treatment_col} if treatment_col else set())
    if covariate_cols is None:
        covariate_cols = [c for c in frame.columns if c not in excluded]
    categorical = set(categorical_cols)

    columns, kinds, labels = [], [], []
    for name in covariate_cols:
        if name in categorical:
            encoded = pd.Categorical(frame[name].astype(str))
            columns.append(encoded.codes.astype(float))
            kinds.append(CovariateKind.CATEGORICAL)
            labels.append(tuple(str(c) for c in encoded.categories))
        else:
            try:
                columns.append(frame[name].astype(float).to_numpy())
            except (TypeError, ValueError) as e:
                raise SchemaMismatch(f"Column {name} is not numeric: {e}")
            kinds.append(CovariateKind.CONTINUOUS)
            labels.append(None)

    try:
        outcomes = frame[list(outcome_cols)].astype(float).to_numpy()
    except (TypeError, ValueError) as e:
        raise SchemaMismatch(f"Outcome columns are not numeric: {e}")
    treatment = frame[treatment_col].astype(float).to_numpy() if treatment_col else None
    covariates = np.column_stack(columns) if columns else np.empty((len(frame), 0))

    dataset = Dataset(
        covariates=covariates,
        outcomes=outcomes,
        covariate_kinds=tuple(kinds),
        mode=mode if mode is not None else infer_mode(outcomes),
        covariate_names=tuple(covariate_cols),
        outcome_names=tuple(outcome_cols),
        level_labels=tuple(labels),
        treatment=treatment,
        treatment_name=treatment_col or "treatment",
    )
    logger.info(f"Loaded {path}: n={dataset.n}, p={dataset.p}, d={dataset.d}, mode={dataset.mode.value}")
    return validate_dataset(dataset)

def dataset_to_frame(dataset: Dataset) -> pd.DataFrame:
    """Flatten a dataset back into a frame with the original categorical labels."""
    data = {}
    for k, name in enumerate(dataset.covariate_names):
        column = dataset.covariates[:, k]
        if dataset.covariate_kinds[k] == CovariateKind.CATEGORICAL:
            data[name] = [dataset.level_labels[k][int(v)] for v in column]
        else:
            data[name] = column
    if dataset.treatment is not None:
        data[dataset.treatment_name] = dataset.treatment.astype(int)
    for j, name in enumerate(dataset.outcome_names):
        values = dataset.outcomes[:, j]
        data[name] = values.astype(int) if dataset.mode == OutcomeMode.PROBIT else values
    return pd.DataFrame(data)
