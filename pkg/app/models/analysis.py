"""
Statistical analysis models
"""

from typing import Dict, List, Optional
from pydantic import BaseModel, Field, model_validator


class ObservationRow(BaseModel):
    """Observed FPRT of one word for one reader"""

    reader_id: str
    group: str = "all"
    gaze_weight: float = 0.0
    text_id: str = ""
    word_index: int
    word: str = ""
    fprt_ms: float = Field(ge=0)
    word_length: int = Field(ge=0)  # characters, punctuation included
    word_prevalence: Optional[float] = None


class CoefficientEstimate(BaseModel):
    """One coefficient with its 95% confidence interval"""

    name: str
    estimate: float
    std_error: float
    ci_low: float
    ci_high: float
    p_value: Optional[float] = None  # two-sided, Student t

    @model_validator(mode="after")
    def check_interval(self) -> "CoefficientEstimate":
        if not self.ci_low <= self.estimate <= self.ci_high:
            raise ValueError(f"confidence interval of {self.name} does not contain the estimate")
        return self


class RegressionResult(BaseModel):
    """Fixed-effect estimates of an FPRT regression with per-reader intercepts"""

    formula: str
    group: str = "all"
    n_rows: int
    n_readers: int
    n_dropped: int = 0
    coefficients: List[CoefficientEstimate]
    reader_intercepts: Dict[str, float] = Field(default_factory=dict)
    r_squared: float
    r_squared_label: str = "R2 of OLS with fixed reader intercepts (approximates random intercepts)"

    def coefficient(self, name: str) -> CoefficientEstimate:
        for coefficient in self.coefficients:
            if coefficient.name == name:
                return coefficient
        raise KeyError(name)


class CorrelationResult(BaseModel):
    """Pearson r of one bucket with Fisher-z 95% CI"""

    bucket: str
    n: int
    r: float
    ci_low: float
    ci_high: float


class RegressionMetrics(BaseModel):
    """Prediction quality metrics"""

    n: int
    mse: float
    mae: float
    r2: float


class GroupSummary(BaseModel):
    """Mean and standard error of the mean of one group"""

    keys: Dict[str, str]
    n: int
    mean: float
    sem: Optional[float] = None  # undefined for singleton groups
