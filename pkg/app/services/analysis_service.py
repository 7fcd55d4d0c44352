"""
Analysis service: FPRT regressions with per-reader intercepts, Pearson
correlations, prediction metrics and grouped mean/SEM summaries

Random reader intercepts are approximated by fixed per-reader effects
(sum-to-zero coded, so the intercept is the mean over readers).
"""

import csv
import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Union
import numpy as np
import pandas as pd
from scipy import stats
from ..config.settings import settings
from ..core.exceptions import FileFormatError, InputValidationError, ZeroVarianceError
from ..models.analysis import (CoefficientEstimate, CorrelationResult, GroupSummary, ObservationRow,
                               RegressionMetrics, RegressionResult)
from ..utils.file_utils import read_csv_checked
from ..utils.math_utils import least_squares
from .text_service import clean_form

logger = logging.getLogger(__name__)

OBSERVATION_COLUMNS = ["reader_id", "gaze_weight", "word_index", "fprt_ms", "word_length"]
RATING_COLUMNS = ["reader_id", "gaze_weight", "dimension", "rating"]
PREVALENCE_COLUMNS = ["word", "prevalence"]

Rows = Union[pd.DataFrame, Sequence[ObservationRow], Sequence[Dict[str, Any]]]


def _frame(rows: Rows) -> pd.DataFrame:
    if isinstance(rows, pd.DataFrame):
        return rows.copy()
    return pd.DataFrame([r.model_dump() if isinstance(r, ObservationRow) else dict(r) for r in rows])


def resolve_formula(formula: str) -> str:
    """Accept a formula key ("gaze_weight", "baseline", "full") or one of the formula strings"""
    if formula in settings.ANALYSIS_FORMULAS:
        return settings.ANALYSIS_FORMULAS[formula]
    normalized = " ".join(formula.split())
    for known in settings.ANALYSIS_FORMULAS.values():
        if normalized == known:
            return known
    raise InputValidationError(f"Unsupported formula: {formula!r}")


def _level_name(level: float) -> str:
    return f"gaze_weight[{level:+g}]"


def _p_value(estimate: float, std_error: float, dof: int) -> float:
    if std_error == 0.0:
        return 1.0 if estimate == 0.0 else 0.0
    return float(2.0 * stats.t.sf(abs(estimate) / std_error, dof))


def fit_reader_intercept_ols(rows: Rows, formula: str, group: str = "all") -> RegressionResult:
    """
    Fit an FPRT regression with per-reader intercepts

    Args:
        rows: Observation rows
        formula: One of the supported formulas (or its key)
        group: Label stored with the result

    Returns:
        RegressionResult with 95% normal-approximation CIs

    Raises:
        InputValidationError: single reader or missing gaze-weight levels
        RankDeficiencyError: collinear design columns
    """
    formula = resolve_formula(formula)
    rhs = formula.split("~", 1)[1]
    uses_weight = "gaze_weight" in rhs
    uses_length = "word_length" in rhs
    uses_prevalence = "word_prevalence" in rhs

    df = _frame(rows)
    if df.empty:
        raise InputValidationError("No observation rows")
    n_dropped = 0
    if uses_prevalence:
        if "word_prevalence" not in df.columns:
            df["word_prevalence"] = np.nan
        missing = df["word_prevalence"].isna()
        n_dropped = int(missing.sum())
        if n_dropped:
            logger.warning(f"Dropped {n_dropped} of {len(df)} rows without prevalence ({group}, {formula})")
        df = df[~missing]

    df = df.reset_index(drop=True)
    readers = sorted(df["reader_id"].astype(str).unique())
    if len(readers) < 2:
        raise InputValidationError(f"Need at least 2 readers, found {len(readers)} ({group})")

    columns: Dict[str, np.ndarray] = {"intercept": np.ones(len(df))}
    if uses_weight:
        weights = df["gaze_weight"].astype(float)
        levels = sorted(weights.unique())
        reference = settings.GAZE_WEIGHT_REFERENCE
        if len(levels) < 2 or reference not in levels:
            raise InputValidationError(
                f"gaze_weight needs the reference level {reference:g} and at least one other level, found {levels}"
            )
        for level in levels:
            if level != reference:
                columns[_level_name(level)] = (weights == level).to_numpy(dtype=float)
    if uses_length:
        columns["word_length"] = df["word_length"].to_numpy(dtype=float)
    if uses_prevalence:
        columns["word_prevalence"] = df["word_prevalence"].to_numpy(dtype=float)
    n_fixed = len(columns)

    reader_ids = df["reader_id"].astype(str)
    base = (reader_ids == readers[0]).to_numpy(dtype=float)
    for reader in readers[1:]:
        columns[f"reader[{reader}]"] = (reader_ids == reader).to_numpy(dtype=float) - base

    names = list(columns)
    design = np.column_stack([columns[name] for name in names])
    target = df["fprt_ms"].to_numpy(dtype=float)
    fit = least_squares(design, target, names)

    coefficients = []
    for j, name in enumerate(names[:n_fixed]):
        estimate = float(fit.coefficients[j])
        half_width = settings.CI_Z * float(fit.standard_errors[j])
        coefficients.append(CoefficientEstimate(
            name=name, estimate=estimate, std_error=float(fit.standard_errors[j]),
            ci_low=estimate - half_width, ci_high=estimate + half_width,
            p_value=_p_value(estimate, float(fit.standard_errors[j]), fit.dof)
        ))

    intercept = float(fit.coefficients[0])
    offsets = [float(c) for c in fit.coefficients[n_fixed:]]
    reader_intercepts = {readers[0]: intercept - sum(offsets)}
    for reader, offset in zip(readers[1:], offsets):
        reader_intercepts[reader] = intercept + offset

    logger.info(f"Fitted '{formula}' for group {group}: {len(df)} rows, {len(readers)} readers, R2 {fit.r_squared:.3f}")
    return RegressionResult(
        formula=formula,
        group=group,
        n_rows=len(df),
        n_readers=len(readers),
        n_dropped=n_dropped,
        coefficients=coefficients,
        reader_intercepts=reader_intercepts,
        r_squared=fit.r_squared
    )


def _correlation(pred: np.ndarray, obs: np.ndarray, bucket: str) -> CorrelationResult:
    n = len(pred)
    if n < 3:
        raise InputValidationError(f"Pearson r needs at least 3 pairs in bucket {bucket}, got {n}")
    dx = pred - pred.mean()
    dy = obs - obs.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVarianceError(f"Pearson r undefined for constant values in bucket {bucket}")
    r = float(np.clip((dx @ dy) / math.sqrt(sxx * syy), -1.0, 1.0))
    if abs(r) == 1.0:
        low, high = r, r
    elif n > 3:
        z = math.atanh(r)
        half_width = settings.CI_Z / math.sqrt(n - 3)
        low, high = math.tanh(z - half_width), math.tanh(z + half_width)
    else:
        low, high = -1.0, 1.0
    return CorrelationResult(bucket=bucket, n=n, r=r, ci_low=low, ci_high=high)


def bucket_labels(n_buckets: int) -> List[str]:
    if n_buckets == 3:
        return ["low", "medium", "high"]
    return [f"q{i + 1}" for i in range(n_buckets)]


def pearson_r(pred: Sequence[float], obs: Sequence[float],
              bucket_values: Optional[Sequence[float]] = None,
              n_buckets: int = settings.PREVALENCE_BUCKETS) -> List[CorrelationResult]:
    """
    Pearson correlation overall and per equal-count quantile bucket

    Args:
        pred: Predicted values
        obs: Observed values
        bucket_values: Optional value (e.g. prevalence) per pair; NaN pairs skip bucketing
        n_buckets: Number of equally sized buckets

    Returns:
        "overall" result first, then one result per bucket from low to high
    """
    pred_array = np.asarray(pred, dtype=float)
    obs_array = np.asarray(obs, dtype=float)
    if len(pred_array) != len(obs_array):
        raise InputValidationError("pred and obs must have equal length")
    results = [_correlation(pred_array, obs_array, "overall")]
    if bucket_values is None:
        return results

    values = np.asarray(bucket_values, dtype=float)
    if len(values) != len(pred_array):
        raise InputValidationError("bucket_values must match pred in length")
    usable = np.flatnonzero(np.isfinite(values))
    order = usable[np.argsort(values[usable], kind="stable")]
    for label, indices in zip(bucket_labels(n_buckets), np.array_split(order, n_buckets)):
        results.append(_correlation(pred_array[indices], obs_array[indices], label))
    return results


def regression_metrics(pred: Sequence[float], obs: Sequence[float]) -> RegressionMetrics:
    """
    Mean squared error, mean absolute error and R2 = 1 - SS_res / SS_tot
    """
    pred_array = np.asarray(pred, dtype=float)
    obs_array = np.asarray(obs, dtype=float)
    if len(pred_array) == 0 or len(pred_array) != len(obs_array):
        raise InputValidationError("pred and obs must be non-empty and of equal length")
    residuals = obs_array - pred_array
    centered = obs_array - obs_array.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0.0:
        raise ZeroVarianceError("R2 undefined for constant observations")
    return RegressionMetrics(
        n=len(pred_array),
        mse=float(np.mean(residuals ** 2)),
        mae=float(np.mean(np.abs(residuals))),
        r2=1.0 - float(residuals @ residuals) / ss_tot
    )


def grouped_mean_sem(rows: Rows, keys: Sequence[str], value: str) -> List[GroupSummary]:
    """
    Mean and standard error of the mean (sample SD / sqrt(n)) per group

    Singleton groups report sem as missing.
    """
    df = _frame(rows)
    summaries = []
    for group_key, group in df.groupby(list(keys), sort=True):
        group_key = group_key if isinstance(group_key, tuple) else (group_key,)
        values = group[value].astype(float)
        n = len(values)
        sem = float(values.std(ddof=1) / math.sqrt(n)) if n >= 2 else None
        summaries.append(GroupSummary(
            keys={k: str(v) for k, v in zip(keys, group_key)},
            n=n,
            mean=float(values.mean()),
            sem=sem
        ))
    return summaries


def load_prevalence(file_path: str) -> Dict[str, float]:
    """Read a `word<TAB>prevalence` TSV; an optional header line and `#` comment lines are skipped"""
    df = read_csv_checked(file_path, PREVALENCE_COLUMNS, sep="\t", dtype=str, names=PREVALENCE_COLUMNS,
                          quoting=csv.QUOTE_NONE, comment="#")
    values = pd.to_numeric(df["prevalence"], errors="coerce")
    if len(df) and pd.isna(values.iloc[0]):
        df, values = df.iloc[1:], values.iloc[1:]  # header
    bad = df["word"].isna() | values.isna()
    if bad.any():
        row = df[bad].iloc[0]
        raise FileFormatError(f"{file_path}: expected word<TAB>prevalence, found {row['word']!r}, {row['prevalence']!r}")
    return dict(zip(df["word"].str.lower(), values.astype(float).tolist()))


def load_observations(file_path: str, prevalence: Optional[Dict[str, float]] = None) -> pd.DataFrame:
    """
    Read observation rows; prevalence from the table fills rows that lack it

    The word column, when present, is looked up in its clean form.
    """
    df = read_csv_checked(file_path, OBSERVATION_COLUMNS)
    if "group" not in df.columns:
        df["group"] = "all"
    if "word_prevalence" not in df.columns:
        df["word_prevalence"] = np.nan
    if prevalence is not None and "word" in df.columns:
        looked_up = df["word"].astype(str).map(lambda w: prevalence.get(clean_form(w), np.nan))
        df["word_prevalence"] = df["word_prevalence"].fillna(looked_up)
    df["reader_id"] = df["reader_id"].astype(str)
    df["group"] = df["group"].astype(str)
    if (df["fprt_ms"] < 0).any():
        raise InputValidationError(f"{file_path}: fprt_ms must be >= 0")
    return df


def analyze_observations(df: pd.DataFrame) -> pd.DataFrame:
    """
    Fit every supported formula per group (each group and "all")

    Returns:
        Long-format coefficients table
    """
    groups = sorted(df["group"].unique())
    targets = [(g, df[df["group"] == g]) for g in groups]
    if len(groups) > 1:
        targets.append(("all", df))

    rows = []
    for group, subset in targets:
        for formula in settings.ANALYSIS_FORMULAS.values():
            if "gaze_weight" in formula.split("~", 1)[1] and subset["gaze_weight"].nunique() < 2:
                logger.warning(f"Skipping '{formula}' for group {group}: single gaze weight level")
                continue
            if "word_prevalence" in formula and subset["word_prevalence"].isna().all():
                logger.warning(f"Skipping '{formula}' for group {group}: no prevalence values")
                continue
            result = fit_reader_intercept_ols(subset, formula, group=group)
            for coefficient in result.coefficients:
                rows.append({
                    "formula": result.formula,
                    "group": group,
                    "term": coefficient.name,
                    "estimate": coefficient.estimate,
                    "std_error": coefficient.std_error,
                    "ci_low": coefficient.ci_low,
                    "ci_high": coefficient.ci_high,
                    "p_value": coefficient.p_value,
                    "n_rows": result.n_rows,
                    "n_readers": result.n_readers,
                    "n_dropped": result.n_dropped,
                    "r_squared": result.r_squared,
                    "r_squared_label": result.r_squared_label,
                })
    return pd.DataFrame(rows)


def summaries_frame(summaries: Sequence[GroupSummary], extra: Optional[Dict[str, Any]] = None) -> pd.DataFrame:
    """Flatten GroupSummary objects into a long-format table"""
    rows = []
    for summary in summaries:
        rows.append({**(extra or {}), **summary.keys, "n": summary.n, "mean": summary.mean, "sem": summary.sem})
    return pd.DataFrame(rows)


def load_ratings(file_path: str) -> pd.DataFrame:
    """Read a rating file (reader_id, group, gaze_weight, dimension, rating)"""
    df = read_csv_checked(file_path, RATING_COLUMNS)
    if "group" not in df.columns:
        df["group"] = "all"
    return df
