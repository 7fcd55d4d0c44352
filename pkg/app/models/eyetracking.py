"""
Eye-tracking models: samples, fixations, areas of interest and reading measures
"""

from typing import List, Optional
from pydantic import BaseModel, ConfigDict, Field, model_validator


class GazeSample(BaseModel):
    """Raw gaze sample; invalid samples mark tracking loss or blinks"""
    model_config = ConfigDict(frozen=True)

    t: float  # ms
    x: Optional[float] = None  # px
    y: Optional[float] = None  # px
    valid: bool = True


class FixationEvent(BaseModel):
    """Fixation detected by I-DT"""
    model_config = ConfigDict(frozen=True)

    onset: float  # ms
    duration: float  # ms
    x: float  # centroid px
    y: float


class AreaOfInterest(BaseModel):
    """Screen bounding box of one word"""
    model_config = ConfigDict(frozen=True)

    word_index: int
    page: int = 0
    x_min: float
    y_min: float
    x_max: float
    y_max: float
    word: str = ""

    @model_validator(mode="after")
    def check_box(self) -> "AreaOfInterest":
        if self.x_max < self.x_min or self.y_max < self.y_min:
            raise ValueError(f"AOI of word {self.word_index} has an inverted box")
        return self


class WordMeasures(BaseModel):
    """Reading measures of one word within one trial"""

    word_index: int
    fprt_ms: Optional[float] = None
    go_past_ms: Optional[float] = None
    n_fixations: int = 0
    skipped: bool = True


class MeasureRecord(BaseModel):
    """Reading measures keyed by reader, text and word"""

    reader_id: str
    text_id: str
    word_index: int
    word: str = ""
    fprt_ms: Optional[float] = None
    go_past_ms: Optional[float] = None
    n_fixations: int = 0
    skipped: bool = False

    @model_validator(mode="after")
    def check_measures(self) -> "MeasureRecord":
        if self.skipped and (self.fprt_ms is not None or self.go_past_ms is not None):
            raise ValueError("skipped words carry no duration measures")
        if self.fprt_ms is not None and self.go_past_ms is not None and self.fprt_ms > self.go_past_ms:
            raise ValueError("fprt_ms must not exceed go_past_ms")
        return self


class TrialMetadata(BaseModel):
    """Sidecar JSON describing one trial (one page of one text read by one reader)"""

    reader_id: str
    text_id: str
    samples_file: str
    aoi_file: str
    page: Optional[int] = None
    pixels_per_degree: float = Field(gt=0)
    group: Optional[str] = None  # "L1" / "L2"
    gaze_weight: Optional[float] = None
    removed: bool = False
    partially_removed: bool = False
    comprehension_correct: Optional[int] = None
    comprehension_total: Optional[int] = None


class ReaderQuality(BaseModel):
    """Data quality of one reader"""

    reader_id: str
    n_trials: int
    n_samples: int
    n_invalid: int
    loss_percent: float
    trials_removed: int
    trials_partially_removed: int
    comprehension_accuracy: Optional[float] = None


class DataQualityReport(BaseModel):
    """Overall and per-reader data quality"""

    n_trials: int
    trials_removed: int
    trials_partially_removed: int
    loss_percent: float
    loss_percent_min: float
    loss_percent_max: float
    comprehension_accuracy: Optional[float] = None
    comprehension_accuracy_min: Optional[float] = None
    comprehension_accuracy_max: Optional[float] = None
    readers: List[ReaderQuality]
