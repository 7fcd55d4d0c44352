"""
Request data models for the HTTP API
"""

from typing import List, Optional, Tuple
from pydantic import BaseModel, Field
from ..config.settings import settings


class GenerateRequest(BaseModel):
    """Guided generation request"""
    prompt: str = ""
    gaze_weight: float = 0.0
    top_k: int = Field(default=settings.DEFAULT_TOP_K, ge=1)
    beam_size: int = Field(default=settings.DEFAULT_BEAM_SIZE, ge=1)
    max_tokens: int = Field(default=settings.DEFAULT_MAX_TOKENS, ge=1)
    defer_incomplete_word: bool = False


class TextStatsRequest(BaseModel):
    """Readability statistics request"""
    texts: List[str] = Field(min_length=1)


class ReadingMeasuresRequest(BaseModel):
    """Word-level scanpath: (word_index or null, fixation duration ms) in time order"""
    scanpath: List[Tuple[Optional[int], float]]
    n_words: int = Field(ge=0)
    strict_first_pass: bool = False


class GazeScoreRequest(BaseModel):
    """Gaze score request for an arbitrary text"""
    text: str
