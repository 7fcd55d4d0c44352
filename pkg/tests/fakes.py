"""
Small deterministic stand-ins for the decoder contracts
"""

from typing import List, Optional, Sequence
import numpy as np


class TableLM:
    """
    Bigram language model over a handful of pieces with seeded random log probabilities

    Id 0 is EOS. Pieces starting with a space begin a word.
    """

    def __init__(self, pieces: Sequence[str], seed: int, masked: Optional[Sequence[int]] = None):
        self.pieces = ["</s>"] + list(pieces)
        rng = np.random.default_rng(seed)
        size = len(self.pieces)
        logits = rng.normal(0.0, 1.5, size=(size + 1, size))
        for token in masked or []:
            logits[:, token] = -np.inf
        self.table = []
        for row in logits:
            top = row.max()
            values = row - (top + np.log(np.exp(row - top).sum()))
            values.setflags(write=False)
            self.table.append(values)

    @property
    def eos_id(self) -> int:
        return 0

    def vocab_size(self) -> int:
        return len(self.pieces)

    def generatable_ids(self) -> List[int]:
        return list(range(len(self.pieces)))

    def next_token_logprobs(self, context: Sequence[int]) -> np.ndarray:
        last = context[-1] + 1 if context else 0
        return self.table[last]

    def encode(self, text: str) -> List[int]:
        ids = []
        for word in text.split():
            ids.append(self.pieces.index(" " + word))
        return ids

    def decode(self, token_ids: Sequence[int]) -> str:
        text = "".join(self.pieces[t] for t in token_ids if t != 0)
        return text[1:] if text.startswith(" ") else text


class LengthGaze:
    """Predicts (characters - 3) for every word; depends on the word alone"""

    def predict_word(self, words: Sequence[str], index: int) -> float:
        return len(words[index]) - 3.0

    def score_sequence(self, words: Sequence[str]) -> float:
        return sum(self.predict_word(words, i) for i in range(len(words)))


class ContextGaze:
    """Prediction depends on the word and its predecessor"""

    def predict_word(self, words: Sequence[str], index: int) -> float:
        previous = len(words[index - 1]) if index > 0 else 0
        return 0.5 * len(words[index]) - 0.25 * previous - 1.0

    def score_sequence(self, words: Sequence[str]) -> float:
        return sum(self.predict_word(words, i) for i in range(len(words)))
