"""
Gaze model data models
"""

from typing import List, Optional
from pydantic import BaseModel, Field, field_validator


class GazeFeatures(BaseModel):
    """Length and Zipf frequency of the current word and its two predecessors"""

    len_0: float = Field(ge=0)
    len_1: float = Field(ge=0)
    len_2: float = Field(ge=0)
    zipf_0: float
    zipf_1: float
    zipf_2: float

    def as_vector(self) -> List[float]:
        return [self.len_0, self.len_1, self.len_2, self.zipf_0, self.zipf_1, self.zipf_2]


class GazeTrainingRow(BaseModel):
    """One training target for the gaze model"""

    features: GazeFeatures
    fprt_ms: float
    text_id: str = ""
    reader_id: str = ""
    word: str = ""


class LinearGazeModel(BaseModel):
    """OLS weights predicting z-normalized FPRT, plus the normalization parameters (ms)"""

    weights: List[float] = Field(min_length=6, max_length=6)
    intercept: float
    mu: float
    sigma: float = Field(gt=0)
    # Standard errors of [intercept, *weights] on the normalized scale; not persisted
    standard_errors: Optional[List[float]] = None

    @field_validator("standard_errors")
    @classmethod
    def check_standard_errors(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None and len(value) != 7:
            raise ValueError("standard_errors must hold intercept plus 6 weights")
        return value
