"""
Byte-pair style subword tokenizer for the built-in language model

Pieces that start a word carry a leading space; continuation pieces do not.
Frequent words end up as single pieces, rare words stay split into subwords.
"""

import logging
from collections import Counter, defaultdict
from functools import lru_cache
from typing import Dict, Iterable, List, Sequence, Set, Tuple
from ..config.settings import settings
from ..core.exceptions import TokenizationError
from ..models.language_model import EOS_PIECE, RESERVED_PIECES, Vocabulary
from .text_service import word_surfaces

logger = logging.getLogger(__name__)

Pair = Tuple[str, str]


def _initial_symbols(word: str) -> Tuple[str, ...]:
    return (" " + word[0],) + tuple(word[1:])


def learn_bpe(texts: Iterable[str], num_merges: int, min_pair_count: int = 2) -> List[Pair]:
    """
    Learn BPE merges over whitespace words

    Args:
        texts: Training texts
        num_merges: Maximum number of merges
        min_pair_count: Stop once the most frequent pair is rarer than this

    Returns:
        Merges in rank order; ties go to the lexicographically smallest pair
    """
    word_counts = Counter(w for text in texts for w in word_surfaces(text))
    entries: List[List[object]] = [[_initial_symbols(w), c] for w, c in sorted(word_counts.items())]

    pair_counts: Counter = Counter()
    where: Dict[Pair, Set[int]] = defaultdict(set)
    for idx, (symbols, count) in enumerate(entries):
        for pair in zip(symbols, symbols[1:]):
            pair_counts[pair] += count
            where[pair].add(idx)

    merges: List[Pair] = []
    for _ in range(num_merges):
        if not pair_counts:
            break
        best, best_count = min(pair_counts.items(), key=lambda kv: (-kv[1], kv[0]))
        if best_count < min_pair_count:
            break
        merges.append(best)
        merged_symbol = best[0] + best[1]
        for idx in sorted(where.pop(best, set())):
            symbols, count = entries[idx]
            for pair in zip(symbols, symbols[1:]):
                pair_counts[pair] -= count
                if pair_counts[pair] <= 0:
                    del pair_counts[pair]
                where[pair].discard(idx)
            new_symbols = _merge_pair(symbols, best, merged_symbol)
            entries[idx][0] = new_symbols
            for pair in zip(new_symbols, new_symbols[1:]):
                pair_counts[pair] += count
                where[pair].add(idx)

    logger.info(f"Learned {len(merges)} BPE merges from {len(word_counts)} word types")
    return merges


def _merge_pair(symbols: Sequence[str], pair: Pair, merged: str) -> Tuple[str, ...]:
    out = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == pair[0] and symbols[i + 1] == pair[1]:
            out.append(merged)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def build_vocabulary(texts: Iterable[str], merges: Sequence[Pair]) -> Vocabulary:
    """
    Vocabulary of every seen character (word-start and continuation forms) plus merged pieces

    Ids are assigned after the reserved pieces in sorted piece order.
    """
    pieces: Set[str] = set()
    for text in texts:
        for ch in "".join(word_surfaces(text)):
            pieces.add(ch)
            pieces.add(" " + ch)
    for left, right in merges:
        pieces.add(left + right)
    pieces.difference_update(RESERVED_PIECES)
    return Vocabulary(pieces=RESERVED_PIECES + sorted(pieces))


class BPETokenizer:
    """Applies learned merges; every piece must belong to the vocabulary"""

    def __init__(self, vocabulary: Vocabulary, merges: Sequence[Pair]):
        self.vocabulary = vocabulary
        self.ranks: Dict[Pair, int] = {tuple(pair): rank for rank, pair in enumerate(merges)}
        self._cached_pieces = lru_cache(maxsize=settings.TOKENIZER_CACHE_SIZE)(self._pieces)

    def tokenize_word(self, word: str) -> Tuple[str, ...]:
        """Pieces of one whitespace word, the first carrying the space marker"""
        return self._cached_pieces(word)

    def _pieces(self, word: str) -> Tuple[str, ...]:
        symbols = _initial_symbols(word)
        while len(symbols) > 1:
            ranked = [(self.ranks.get(pair, None), pair) for pair in zip(symbols, symbols[1:])]
            ranked = [(r, p) for r, p in ranked if r is not None]
            if not ranked:
                break
            _, pair = min(ranked)
            symbols = _merge_pair(symbols, pair, pair[0] + pair[1])
        for symbol in symbols:
            if not self.vocabulary.contains(symbol):
                raise TokenizationError(f"Cannot tokenize {word!r}: piece {symbol!r} is not in the vocabulary")
        return symbols

    def tokenize(self, text: str) -> List[str]:
        """Token pieces of a text"""
        pieces: List[str] = []
        for word in word_surfaces(text):
            pieces.extend(self.tokenize_word(word))
        return pieces

    def encode(self, text: str, add_eos: bool = False) -> List[int]:
        ids = [self.vocabulary.id_of(piece) for piece in self.tokenize(text)]
        if add_eos:
            ids.append(self.vocabulary.eos_id)
        return ids

    def decode(self, token_ids: Sequence[int]) -> str:
        """Join pieces, skipping reserved ids, and drop the leading word-start space"""
        reserved = {self.vocabulary.bos_id, self.vocabulary.eos_id, self.vocabulary.unk_id}
        text = "".join(self.vocabulary.piece_of(t) for t in token_ids if t not in reserved)
        return text[1:] if text.startswith(" ") else text

    def training_sequences(self, texts: Iterable[str]) -> List[List[str]]:
        """One piece sequence per text, terminated by EOS"""
        return [self.tokenize(text) + [EOS_PIECE] for text in texts]
