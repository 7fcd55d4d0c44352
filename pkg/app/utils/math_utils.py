"""
Math utilities: least squares with standard errors and collinearity diagnosis
"""

import logging
from typing import List, NamedTuple, Sequence
import numpy as np
from ..core.exceptions import RankDeficiencyError

logger = logging.getLogger(__name__)


class LeastSquaresFit(NamedTuple):
    coefficients: np.ndarray
    standard_errors: np.ndarray
    residuals: np.ndarray
    r_squared: float
    dof: int


def collinear_columns(design: np.ndarray, names: Sequence[str]) -> List[str]:
    """
    Name the columns that add no rank when appended left to right

    Args:
        design: n x p design matrix
        names: Column names

    Returns:
        Names of the dependent columns (empty when full rank)
    """
    dependent = []
    kept: List[int] = []
    for j in range(design.shape[1]):
        candidate = kept + [j]
        if np.linalg.matrix_rank(design[:, candidate]) == len(candidate):
            kept.append(j)
        else:
            dependent.append(names[j])
    return dependent


def least_squares(design: np.ndarray, target: np.ndarray, names: Sequence[str]) -> LeastSquaresFit:
    """
    Ordinary least squares with classical standard errors

    Args:
        design: n x p design matrix (intercept column included by the caller)
        target: n targets
        names: Column names, used in rank-deficiency errors

    Returns:
        LeastSquaresFit

    Raises:
        RankDeficiencyError: naming the collinear columns
    """
    n, p = design.shape
    if n <= p or np.linalg.matrix_rank(design) < p:
        dependent = collinear_columns(design, names)
        if not dependent:
            dependent = [f"need more than {p} rows, got {n}"]
        raise RankDeficiencyError(dependent)

    coefficients, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
    residuals = target - design @ coefficients
    rss = float(residuals @ residuals)
    sigma2 = rss / (n - p)
    covariance = sigma2 * np.linalg.inv(design.T @ design)
    standard_errors = np.sqrt(np.clip(np.diag(covariance), 0.0, None))

    centered = target - target.mean()
    tss = float(centered @ centered)
    r_squared = 1.0 - rss / tss if tss > 0 else 1.0
    return LeastSquaresFit(coefficients, standard_errors, residuals, r_squared, n - p)
