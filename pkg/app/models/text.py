"""
Text unit models: words and token/word alignments
"""

from typing import Dict, List, Optional, Tuple
from pydantic import BaseModel, ConfigDict, field_validator


class Word(BaseModel):
    """Whitespace-delimited word with its position in the document"""
    model_config = ConfigDict(frozen=True)

    surface: str
    index: int  # 0-based position in document
    char_span: Tuple[int, int]  # [start, end) character offsets
    sentence_index: int

    @field_validator("surface")
    @classmethod
    def surface_not_empty(cls, value: str) -> str:
        if not value:
            raise ValueError("word surface must be non-empty")
        return value


class TokenAlignment(BaseModel):
    """Mapping between token positions and word positions"""
    model_config = ConfigDict(frozen=True)

    token_to_word: List[Optional[int]]  # None marks a whitespace-only gap token
    word_to_tokens: Dict[int, List[int]]
