"""
Text metric models
"""

import math
from typing import Dict, Optional
from pydantic import BaseModel, Field, PrivateAttr, model_validator


class FrequencyLexicon(BaseModel):
    """Word (lowercased, edge punctuation stripped) -> occurrence count"""

    counts: Dict[str, int]
    total: int = Field(gt=0)

    _mean_zipf: float = PrivateAttr(default=0.0)

    @model_validator(mode="after")
    def check_counts(self) -> "FrequencyLexicon":
        if not self.counts:
            raise ValueError("lexicon must not be empty")
        if any(count < 1 for count in self.counts.values()):
            raise ValueError("lexicon counts must be >= 1")
        self._mean_zipf = sum(math.log10(c / self.total * 1e9) for c in self.counts.values()) / len(self.counts)
        return self

    @property
    def mean_zipf(self) -> float:
        """Mean Zipf score over the listed words"""
        return self._mean_zipf


class TextStats(BaseModel):
    """Document-level readability statistics"""

    word_count: int
    sentence_count: int
    mean_word_length: float  # chars, punctuation included
    mean_zipf: Optional[float] = None  # known words only
    unknown_word_count: int = 0
    mean_sentence_length: float  # words
    mtld: Optional[float] = None
    fkgl: float
