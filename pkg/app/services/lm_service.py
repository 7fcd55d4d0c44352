"""
Language model service: add-alpha n-gram training, scoring and persistence
"""

import logging
import math
from collections import Counter, defaultdict
from functools import lru_cache, partial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
import numpy as np
from ..config.settings import settings
from ..core.exceptions import CorpusError, FileFormatError, InputValidationError
from ..models.language_model import RESERVED_PIECES, NGramModel, Vocabulary
from ..utils.file_utils import read_model_file, write_model_file
from .tokenizer_service import BPETokenizer, build_vocabulary, learn_bpe

logger = logging.getLogger(__name__)


def train_ngram(corpus: Sequence[Sequence[str]],
                order: int,
                alpha: float,
                vocabulary: Optional[Vocabulary] = None,
                merges: Optional[Sequence[Tuple[str, str]]] = None) -> NGramModel:
    """
    Count n-grams of every order up to `order` over token piece sequences

    Args:
        corpus: Token piece sequences (EOS pieces included by the caller)
        order: n >= 1
        alpha: Add-alpha smoothing constant > 0
        vocabulary: Fixed vocabulary; built from the corpus pieces when omitted
        merges: BPE merges stored alongside the counts

    Returns:
        NGramModel
    """
    if order < 1:
        raise InputValidationError("order must be >= 1")
    if not alpha > 0:
        raise InputValidationError("alpha must be > 0")
    if not corpus or not any(len(seq) for seq in corpus):
        raise CorpusError("Training corpus is empty")

    if vocabulary is None:
        pieces = sorted({p for seq in corpus for p in seq} - set(RESERVED_PIECES))
        vocabulary = Vocabulary(pieces=RESERVED_PIECES + pieces)

    counts: Dict[int, Dict[Tuple[int, ...], Counter]] = {m: defaultdict(Counter) for m in range(1, order + 1)}
    padding = [vocabulary.bos_id] * (order - 1)
    n_tokens = 0
    for seq in corpus:
        padded = padding + [vocabulary.id_of(p) for p in seq]
        for pos in range(order - 1, len(padded)):
            token = padded[pos]
            for m in range(1, order + 1):
                counts[m][tuple(padded[pos - m + 1:pos])][token] += 1
            n_tokens += 1

    model = NGramModel(
        order=order,
        alpha=alpha,
        vocabulary=vocabulary,
        merges=list(merges or []),
        counts={m: {ctx: dict(nxt) for ctx, nxt in table.items()} for m, table in counts.items()}
    )
    logger.info(f"Trained order-{order} n-gram model on {n_tokens} tokens, vocabulary size {len(vocabulary)}")
    return model


def train_ngram_from_texts(texts: Sequence[str],
                           order: int = settings.LM_ORDER,
                           alpha: float = settings.LM_ALPHA,
                           num_merges: int = settings.BPE_MERGES) -> NGramModel:
    """
    Learn the tokenizer on the texts, then train the n-gram model; each text is one EOS-terminated sequence
    """
    texts = [t for t in texts if t.strip()]
    if not texts:
        raise CorpusError("Training corpus is empty")
    merges = learn_bpe(texts, num_merges)
    vocabulary = build_vocabulary(texts, merges)
    tokenizer = BPETokenizer(vocabulary, merges)
    return train_ngram(tokenizer.training_sequences(texts), order, alpha, vocabulary, merges)


def _context_key(model: NGramModel, context: Sequence[int]) -> Tuple[int, ...]:
    if model.order == 1:
        return ()
    padded = (model.vocabulary.bos_id,) * (model.order - 1) + tuple(context)
    return padded[len(padded) - (model.order - 1):]


def next_token_logprob_array(model: NGramModel, context: Sequence[int]) -> np.ndarray:
    """
    Log probabilities of every vocabulary id given the context

    The longest seen context is used; unseen contexts back off to the next
    lower order, down to the unigram distribution.
    """
    key = _context_key(model, context)
    if model._cache is None:
        model._cache = lru_cache(maxsize=settings.LM_CACHE_SIZE)(partial(_logprobs_for_context, model))
    return model._cache(key)


def _logprobs_for_context(model: NGramModel, key: Tuple[int, ...]) -> np.ndarray:
    size = len(model.vocabulary)
    for m in range(model.order, 0, -1):
        ctx = key[len(key) - (m - 1):]
        total = model.context_total(m, ctx)
        if total > 0 or m == 1:
            probs = np.full(size, model.alpha, dtype=float)
            for token, count in model.counts.get(m, {}).get(ctx, {}).items():
                probs[token] += count
            probs /= total + model.alpha * size
            logprobs = np.log(probs)
            break
    logprobs.setflags(write=False)
    return logprobs


def next_token_logprobs(model: NGramModel, context: Sequence[int]) -> Dict[int, float]:
    """
    Next-token distribution as natural-log probabilities

    Args:
        model: Trained NGramModel
        context: Preceding token ids (unknown pieces already mapped to UNK)

    Returns:
        Map token id -> log probability over the whole vocabulary
    """
    return {token: float(lp) for token, lp in enumerate(next_token_logprob_array(model, context))}


def sequence_logprob(model: NGramModel, tokens: Sequence[int], context: Sequence[int] = ()) -> float:
    """
    Token score: sum of log P(token_t | prefix_t)

    Args:
        model: Trained NGramModel
        tokens: Non-empty token id sequence
        context: Optional conditioning prefix

    Returns:
        Cumulative log probability
    """
    if len(tokens) == 0:
        raise InputValidationError("Cannot score an empty token sequence")
    prefix = list(context)
    score = 0.0
    for token in tokens:
        score += float(next_token_logprob_array(model, prefix)[token])
        prefix.append(token)
    return score


def save_ngram(model: NGramModel, file_path: str) -> None:
    """Persist the model as a versioned self-describing file"""
    payload = {
        "order": model.order,
        "alpha": model.alpha,
        "pieces": model.vocabulary.pieces,
        "merges": [list(pair) for pair in model.merges],
        "counts": {
            str(m): {
                " ".join(str(t) for t in ctx): {str(token): count for token, count in nxt.items()}
                for ctx, nxt in table.items()
            }
            for m, table in model.counts.items()
        },
    }
    write_model_file(file_path, settings.NGRAM_MAGIC, payload)


def load_ngram(file_path: str) -> NGramModel:
    """Load a model written by save_ngram"""
    payload = read_model_file(file_path, settings.NGRAM_MAGIC)
    try:
        counts = {
            int(m): {
                tuple(int(t) for t in ctx.split()): {int(token): int(count) for token, count in nxt.items()}
                for ctx, nxt in table.items()
            }
            for m, table in payload["counts"].items()
        }
        return NGramModel(
            order=payload["order"],
            alpha=payload["alpha"],
            vocabulary=Vocabulary(pieces=payload["pieces"]),
            merges=[tuple(pair) for pair in payload["merges"]],
            counts=counts
        )
    except (KeyError, TypeError, ValueError) as e:
        raise FileFormatError(f"{file_path}: invalid n-gram payload: {e}")


class NGramScorer:
    """Language model contract backed by an NGramModel and its BPE tokenizer"""

    def __init__(self, model: NGramModel):
        self.model = model
        self.tokenizer = BPETokenizer(model.vocabulary, model.merges)
        reserved = {model.vocabulary.bos_id, model.vocabulary.unk_id}
        self._generatable = [i for i in range(len(model.vocabulary)) if i not in reserved]

    @property
    def eos_id(self) -> int:
        return self.model.vocabulary.eos_id

    def vocab_size(self) -> int:
        return len(self.model.vocabulary)

    def generatable_ids(self) -> List[int]:
        return self._generatable

    def next_token_logprobs(self, context: Sequence[int]) -> np.ndarray:
        return next_token_logprob_array(self.model, context)

    def encode(self, text: str) -> List[int]:
        return self.tokenizer.encode(text)

    def decode(self, token_ids: Sequence[int]) -> str:
        return self.tokenizer.decode(token_ids)

    def pieces(self, token_ids: Iterable[int]) -> List[str]:
        return [self.model.vocabulary.piece_of(t) for t in token_ids]


def kl_to_uniform(logprobs: np.ndarray) -> float:
    """KL divergence of a log-probability vector from the uniform distribution"""
    probs = np.exp(logprobs)
    return float(np.sum(probs * (logprobs + math.log(len(logprobs)))))
