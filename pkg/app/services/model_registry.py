"""
Model registry: load the configured language model, gaze model and lexicon once per process
"""

import logging
from functools import lru_cache
from typing import Optional
from ..config.settings import settings
from ..models.metrics import FrequencyLexicon
from .gaze_model_service import LinearGazePredictor, load_gaze_model
from .lm_service import NGramScorer, load_ngram
from .metrics_service import load_lexicon

logger = logging.getLogger(__name__)


@lru_cache(maxsize=4)
def get_language_model(path: Optional[str] = None) -> NGramScorer:
    path = path or settings.get_lm_path()
    logger.info(f"Loading language model from {path}")
    return NGramScorer(load_ngram(path))


@lru_cache(maxsize=4)
def get_lexicon(path: Optional[str] = None) -> FrequencyLexicon:
    path = path or settings.get_lexicon_path()
    logger.info(f"Loading lexicon from {path}")
    return load_lexicon(path)


@lru_cache(maxsize=4)
def get_gaze_predictor(model_path: Optional[str] = None, lexicon_path: Optional[str] = None) -> LinearGazePredictor:
    model_path = model_path or settings.get_gaze_model_path()
    logger.info(f"Loading gaze model from {model_path}")
    return LinearGazePredictor(load_gaze_model(model_path), get_lexicon(lexicon_path))


def clear_cache() -> None:
    """Forget loaded models (after retraining or a path change)"""
    get_language_model.cache_clear()
    get_lexicon.cache_clear()
    get_gaze_predictor.cache_clear()
