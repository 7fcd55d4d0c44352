"""
Pluggable model contracts used by the guided decoder
"""

from typing import List, Protocol, Sequence

import numpy as np


class LanguageModel(Protocol):
    """Source of token scores: next-token log probabilities over a fixed vocabulary"""

    @property
    def eos_id(self) -> int:
        ...

    def vocab_size(self) -> int:
        ...

    def generatable_ids(self) -> List[int]:
        """Ids that may be emitted during decoding (reserved BOS/UNK excluded)"""
        ...

    def next_token_logprobs(self, context: Sequence[int]) -> np.ndarray:
        """Natural-log probabilities of every vocabulary id given the context"""
        ...

    def encode(self, text: str) -> List[int]:
        ...

    def decode(self, token_ids: Sequence[int]) -> str:
        ...


class GazePredictor(Protocol):
    """Predicts normalized FPRT of a word from the word and its preceding context only"""

    def predict_word(self, words: Sequence[str], index: int) -> float:
        ...

    def score_sequence(self, words: Sequence[str]) -> float:
        ...
