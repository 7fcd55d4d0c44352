"""
Text unit service: word segmentation, token/word alignment and
distribution of word-level values over subword tokens
"""

import logging
import re
from typing import Dict, List, Optional, Sequence, Union
from ..core.exceptions import AlignmentError, InputValidationError
from ..models.text import TokenAlignment, Word

logger = logging.getLogger(__name__)

_WORD_PATTERN = re.compile(r"\S+")
_EDGE_PUNCTUATION = re.compile(r"^[^\w]+|[^\w]+$", re.UNICODE)
_SENTENCE_END = (".", "!", "?")


def segment_words(text: str) -> List[Word]:
    """
    Split text into whitespace-delimited words with sentence ids

    Punctuation stays attached to the word. A sentence ends at a word whose
    last character is ".", "!" or "?" (the word run is always followed by
    whitespace or the end of the text). Abbreviations are not special-cased.

    Args:
        text: Document text

    Returns:
        List of Word objects, empty for empty text
    """
    words = []
    sentence_index = 0
    for index, match in enumerate(_WORD_PATTERN.finditer(text)):
        surface = match.group(0)
        words.append(Word(
            surface=surface,
            index=index,
            char_span=(match.start(), match.end()),
            sentence_index=sentence_index
        ))
        if surface.endswith(_SENTENCE_END):
            sentence_index += 1
    return words


def word_surfaces(text: str) -> List[str]:
    """Surfaces of segment_words without building Word objects"""
    return _WORD_PATTERN.findall(text)


def count_sentences(words: Sequence[Word]) -> int:
    """Number of sentences spanned by segmented words"""
    if not words:
        return 0
    return words[-1].sentence_index + 1


def clean_form(word: Union[str, Word]) -> str:
    """Lowercased form with leading/trailing punctuation stripped (internal hyphens and apostrophes kept)"""
    surface = word.surface if isinstance(word, Word) else word
    return _EDGE_PUNCTUATION.sub("", surface).lower()


def align_tokens_to_words(tokens: Sequence[str], words: Sequence[Word]) -> TokenAlignment:
    """
    Assign every token piece to the word containing its first character

    Whitespace inside pieces (word-start markers) is ignored; the remaining
    characters of all pieces must reproduce the characters of the words in order.

    Args:
        tokens: Token pieces in order
        words: Segmented words of the same text

    Returns:
        TokenAlignment; whitespace-only pieces map to None

    Raises:
        AlignmentError: naming the first token that cannot be aligned
    """
    # Non-whitespace characters of the document and the word each belongs to
    chars: List[str] = []
    owner: List[int] = []
    for word in words:
        for ch in word.surface:
            chars.append(ch)
            owner.append(word.index)

    token_to_word: List[Optional[int]] = []
    word_to_tokens: Dict[int, List[int]] = {}
    position = 0
    for token_index, piece in enumerate(tokens):
        stripped = "".join(piece.split())
        if not stripped:
            token_to_word.append(None)
            continue
        end = position + len(stripped)
        if end > len(chars) or "".join(chars[position:end]) != stripped:
            raise AlignmentError(token_index)
        word_index = owner[position]
        token_to_word.append(word_index)
        word_to_tokens.setdefault(word_index, []).append(token_index)
        position = end

    if position != len(chars):
        raise AlignmentError(
            len(tokens),
            f"Tokens end at character {position} but words contain {len(chars)} characters"
        )

    return TokenAlignment(token_to_word=token_to_word, word_to_tokens=word_to_tokens)


def distribute_word_value(value: float, n_subwords: int) -> List[float]:
    """
    Spread a word-level value uniformly over its subword tokens

    Args:
        value: Word value (ms or normalized units)
        n_subwords: Number of tokens of the word

    Returns:
        n_subwords copies of value / n_subwords
    """
    if n_subwords < 1:
        raise InputValidationError("n_subwords must be >= 1")
    return [value / n_subwords] * n_subwords
