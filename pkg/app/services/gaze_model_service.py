"""
Gaze model service: lexical features, z-score normalization and the
linear regression predicting normalized first-pass reading time
"""

import logging
import math
from collections import defaultdict
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union
import numpy as np
from ..config.settings import settings
from ..core.exceptions import FileFormatError, InputValidationError, ZeroVarianceError
from ..models.analysis import CorrelationResult, RegressionMetrics
from ..models.eyetracking import MeasureRecord
from ..models.gaze import GazeFeatures, GazeTrainingRow, LinearGazeModel
from ..models.metrics import FrequencyLexicon
from ..models.text import Word
from ..utils.file_utils import read_model_file, write_model_file
from ..utils.math_utils import least_squares
from .analysis_service import pearson_r, regression_metrics
from .metrics_service import zipf_score
from .text_service import clean_form

logger = logging.getLogger(__name__)

WordLike = Union[Word, str]


def _surface(word: WordLike) -> str:
    return word.surface if isinstance(word, Word) else word


def extract_features(words: Sequence[WordLike], i: int, lexicon: FrequencyLexicon) -> GazeFeatures:
    """
    Features of word i and its two predecessors

    Missing predecessors get length 0 and the lexicon mean Zipf.

    Args:
        words: Word sequence (Word objects or surfaces)
        i: Index of the current word
        lexicon: Frequency lexicon for Zipf scores

    Returns:
        GazeFeatures
    """
    if not 0 <= i < len(words):
        raise InputValidationError(f"word index {i} out of range for {len(words)} words")
    lengths = []
    zipfs = []
    for offset in range(3):
        j = i - offset
        if j >= 0:
            surface = _surface(words[j])
            lengths.append(float(len(surface)))
            zipfs.append(zipf_score(surface, lexicon)[0])
        else:
            lengths.append(0.0)
            zipfs.append(lexicon.mean_zipf)
    return GazeFeatures(
        len_0=lengths[0], len_1=lengths[1], len_2=lengths[2],
        zipf_0=zipfs[0], zipf_1=zipfs[1], zipf_2=zipfs[2]
    )


def zscore_fit(values: Sequence[float]) -> Tuple[float, float]:
    """
    Mean and population standard deviation

    Raises:
        InputValidationError: fewer than two values
        ZeroVarianceError: no spread
    """
    if len(values) < 2:
        raise InputValidationError("z-score fit needs at least 2 values")
    array = np.asarray(values, dtype=float)
    mu = float(array.mean())
    sigma = float(array.std())
    if sigma == 0.0:
        raise ZeroVarianceError("Cannot z-normalize values without spread")
    return mu, sigma


def zscore_apply(value: float, mu: float, sigma: float) -> float:
    return (value - mu) / sigma


def zscore_invert(z: float, mu: float, sigma: float) -> float:
    return z * sigma + mu


def fit_gaze_model(rows: Sequence[Union[GazeTrainingRow, Tuple[GazeFeatures, float]]]) -> LinearGazeModel:
    """
    Ordinary least squares on z-normalized FPRT targets

    Args:
        rows: (features, fprt_ms) pairs or GazeTrainingRow objects

    Returns:
        LinearGazeModel with standard errors on the normalized scale

    Raises:
        RankDeficiencyError: naming the collinear feature columns
    """
    pairs = [(r.features, r.fprt_ms) if isinstance(r, GazeTrainingRow) else r for r in rows]
    if len(pairs) < 7:
        raise InputValidationError(f"Gaze model needs at least 7 records, got {len(pairs)}")

    targets_ms = [fprt for _, fprt in pairs]
    mu, sigma = zscore_fit(targets_ms)
    target = (np.asarray(targets_ms, dtype=float) - mu) / sigma
    design = np.column_stack([np.ones(len(pairs)), np.asarray([f.as_vector() for f, _ in pairs], dtype=float)])

    fit = least_squares(design, target, ["intercept"] + settings.GAZE_FEATURE_NAMES)
    logger.info(f"Fitted gaze model on {len(pairs)} records (training R2 {fit.r_squared:.3f})")
    return LinearGazeModel(
        weights=[float(w) for w in fit.coefficients[1:]],
        intercept=float(fit.coefficients[0]),
        mu=mu,
        sigma=sigma,
        standard_errors=[float(s) for s in fit.standard_errors]
    )


def raw_coefficients(model: LinearGazeModel) -> Tuple[float, List[float]]:
    """Intercept and weights expressed in milliseconds"""
    return model.intercept * model.sigma + model.mu, [w * model.sigma for w in model.weights]


def predict_from_features(model: LinearGazeModel, features: GazeFeatures) -> float:
    return model.intercept + sum(w * x for w, x in zip(model.weights, features.as_vector()))


def predict_word_fprt(model: LinearGazeModel, words: Sequence[WordLike], i: int,
                      lexicon: FrequencyLexicon) -> float:
    """Predicted normalized FPRT of word i from the word and its two predecessors"""
    return predict_from_features(model, extract_features(words, i, lexicon))


def predict_sequence_gaze_score(model: LinearGazeModel, words: Sequence[WordLike],
                                lexicon: FrequencyLexicon) -> float:
    """Gaze score: sum of predicted normalized FPRTs, 0 for an empty sequence"""
    return sum(predict_word_fprt(model, words, i, lexicon) for i in range(len(words)))


class LinearGazePredictor:
    """Gaze predictor contract over a LinearGazeModel; predictions cached per word trigram"""

    def __init__(self, model: LinearGazeModel, lexicon: FrequencyLexicon,
                 cache_size: int = settings.GAZE_CACHE_SIZE):
        self.model = model
        self.lexicon = lexicon
        self._cached_trigram = lru_cache(maxsize=cache_size)(self._predict_trigram)

    def predict_word(self, words: Sequence[str], index: int) -> float:
        if not 0 <= index < len(words):
            raise InputValidationError(f"word index {index} out of range for {len(words)} words")
        return self._cached_trigram(tuple(words[max(index - 2, 0):index + 1]))

    def _predict_trigram(self, trigram: Tuple[str, ...]) -> float:
        # features only look two words back, so the trigram stands in for the prefix
        return predict_word_fprt(self.model, trigram, len(trigram) - 1, self.lexicon)

    def cache_info(self):
        """Hit and size statistics of the trigram cache"""
        return self._cached_trigram.cache_info()

    def score_sequence(self, words: Sequence[str]) -> float:
        return sum(self.predict_word(words, i) for i in range(len(words)))


def records_from_measures(records: Sequence[MeasureRecord], lexicon: FrequencyLexicon,
                          include_skipped: bool = settings.INCLUDE_SKIPPED_AS_ZERO) -> List[GazeTrainingRow]:
    """
    Training rows from measure records

    Each (reader, text) word sequence is rebuilt from the records so that
    skipped words still serve as context. Skipped words are excluded as
    targets unless include_skipped, which uses 0 ms.
    """
    by_trial: Dict[Tuple[str, str], List[MeasureRecord]] = defaultdict(list)
    for record in records:
        by_trial[(record.reader_id, record.text_id)].append(record)

    rows = []
    excluded = 0
    for (reader_id, text_id) in sorted(by_trial):
        trial = sorted(by_trial[(reader_id, text_id)], key=lambda r: r.word_index)
        words = [r.word for r in trial]
        for position, record in enumerate(trial):
            if record.skipped or record.fprt_ms is None:
                if not include_skipped:
                    excluded += 1
                    continue
                fprt = 0.0
            else:
                fprt = record.fprt_ms
            rows.append(GazeTrainingRow(
                features=extract_features(words, position, lexicon),
                fprt_ms=fprt,
                text_id=text_id,
                reader_id=reader_id,
                word=record.word
            ))
    if excluded:
        logger.info(f"Excluded {excluded} skipped words from gaze model targets")
    return rows


def split_by_text(rows: Sequence[GazeTrainingRow], test_fraction: float,
                  seed: int = 0) -> Tuple[List[GazeTrainingRow], List[GazeTrainingRow]]:
    """
    Hold out a fraction of texts (not words) for evaluation

    Returns:
        Tuple of (train rows, test rows)
    """
    if not 0.0 <= test_fraction < 1.0:
        raise InputValidationError("test_fraction must lie in [0, 1)")
    text_ids = sorted({r.text_id for r in rows})
    n_test = int(round(len(text_ids) * test_fraction))
    if test_fraction > 0 and n_test == 0 and len(text_ids) > 1:
        n_test = 1
    rng = np.random.default_rng(seed)
    held_out = set(rng.permutation(text_ids)[:n_test].tolist()) if n_test else set()
    train = [r for r in rows if r.text_id not in held_out]
    test = [r for r in rows if r.text_id in held_out]
    logger.info(f"Split {len(text_ids)} texts: {len(text_ids) - len(held_out)} train, {len(held_out)} test")
    return train, test


def evaluate_gaze_model(model: LinearGazeModel, rows: Sequence[GazeTrainingRow],
                        prevalence: Optional[Dict[str, float]] = None,
                        n_buckets: int = settings.PREVALENCE_BUCKETS) -> Tuple[RegressionMetrics, List[CorrelationResult]]:
    """
    MSE/MAE/R2 on normalized targets plus overall and bucketed Pearson r

    Buckets are equal-count quantiles of word prevalence when a prevalence
    table is given, otherwise of the current word's Zipf frequency; rows
    without a prevalence value only enter the overall correlation.
    """
    predicted = [predict_from_features(model, r.features) for r in rows]
    observed = [zscore_apply(r.fprt_ms, model.mu, model.sigma) for r in rows]
    metrics = regression_metrics(predicted, observed)

    if prevalence is not None:
        bucket_values = [prevalence.get(clean_form(r.word), math.nan) for r in rows]
    else:
        bucket_values = [r.features.zipf_0 for r in rows]
    correlations = pearson_r(predicted, observed, bucket_values=bucket_values, n_buckets=n_buckets)
    return metrics, correlations


def save_gaze_model(model: LinearGazeModel, file_path: str) -> None:
    """Persist weights, intercept and normalization parameters"""
    payload = {
        "features": settings.GAZE_FEATURE_NAMES,
        "weights": model.weights,
        "intercept": model.intercept,
        "mu": model.mu,
        "sigma": model.sigma,
    }
    write_model_file(file_path, settings.GAZE_MODEL_MAGIC, payload)


def load_gaze_model(file_path: str) -> LinearGazeModel:
    payload = read_model_file(file_path, settings.GAZE_MODEL_MAGIC)
    if payload.get("features") != settings.GAZE_FEATURE_NAMES:
        raise FileFormatError(f"{file_path}: unexpected feature list {payload.get('features')}")
    try:
        return LinearGazeModel(weights=payload["weights"], intercept=payload["intercept"],
                               mu=payload["mu"], sigma=payload["sigma"])
    except (KeyError, ValueError) as e:
        raise FileFormatError(f"{file_path}: invalid gaze model payload: {e}")
