"""
Guided decoding models
"""

from typing import List, Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, field_validator
from ..config.settings import settings


class CandidateSequence(BaseModel):
    """Beam element: a partial generation with its scores"""
    model_config = ConfigDict(frozen=True)

    token_ids: Tuple[int, ...] = ()
    words: Tuple[str, ...] = ()
    token_score: float = Field(default=0.0, le=0.0)  # cumulative log probability
    gaze_score: float = 0.0  # summed normalized FPRT
    finished: bool = False
    finish_reason: Optional[str] = None  # "eos" or "length"


class DecoderConfig(BaseModel):
    """Decoder parameters; defaults mirror k=8, beam size 8"""

    top_k: int = Field(default=settings.DEFAULT_TOP_K, ge=1)
    beam_size: int = Field(default=settings.DEFAULT_BEAM_SIZE, ge=1)
    gaze_weight: float = 0.0
    max_tokens: int = Field(default=settings.DEFAULT_MAX_TOKENS, ge=1)
    eos_id: Optional[int] = None  # taken from the language model when unset
    prompt: str = ""
    defer_incomplete_word: bool = False

    @field_validator("gaze_weight")
    @classmethod
    def weight_in_range(cls, value: float) -> float:
        limit = settings.GAZE_WEIGHT_LIMIT
        if not -limit <= value <= limit:
            raise ValueError(f"gaze_weight must lie in [-{limit}, +{limit}]")
        return value


class TraceStep(BaseModel):
    """Scores of the best beam after one decoding step"""

    step: int
    token_score: float
    gaze_score: float
    total_score: float


class GenerationResult(BaseModel):
    """One generation record (a JSON-lines row)"""

    prompt: str
    gaze_weight: float
    k: int
    beam_size: int
    text: str
    token_score: float
    gaze_score: float
    total_score: float
    trace: List[TraceStep]
    token_ids: List[int] = Field(default_factory=list)
    n_tokens: int = 0
    n_words: int = 0
    finish_reason: Optional[str] = None
