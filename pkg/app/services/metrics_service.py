"""
Text metrics service: Zipf frequency, MTLD, FKGL and document statistics
"""

import csv
import logging
import math
import re
from collections import Counter
from typing import Any, Dict, Iterable, List, Sequence, Tuple
import pandas as pd
from ..config.settings import settings
from ..core.exceptions import FileFormatError, InputValidationError, InsufficientRepetitionError
from ..models.metrics import FrequencyLexicon, TextStats
from ..utils.file_utils import ensure_parent_dir, read_csv_checked, read_first_line
from .analysis_service import grouped_mean_sem
from .text_service import clean_form, count_sentences, segment_words, word_surfaces

logger = logging.getLogger(__name__)

_VOWEL_GROUP = re.compile(r"[aeiouy]+")
_VOWELS = set("aeiouy")

LEXICON_COLUMNS = ["word", "count"]
LEXICON_TOTAL_PREFIX = "#total:"


def zipf_score(word: str, lexicon: FrequencyLexicon,
               floor: float = settings.ZIPF_UNKNOWN_FLOOR) -> Tuple[float, bool]:
    """
    Zipf frequency: log10 of occurrences per billion tokens

    Args:
        word: Word surface; looked up in its clean form
        lexicon: Frequency lexicon
        floor: Value returned for unknown words

    Returns:
        Tuple of (zipf value, known flag)
    """
    count = lexicon.counts.get(clean_form(word))
    if count is None:
        return floor, False
    return math.log10(count / lexicon.total * 1e9), True


def build_lexicon(texts: Iterable[str]) -> FrequencyLexicon:
    """Frequency lexicon over the clean forms of all words in the texts"""
    counts = Counter()
    for text in texts:
        for surface in word_surfaces(text):
            form = clean_form(surface)
            if form:
                counts[form] += 1
    if not counts:
        raise InputValidationError("Cannot build a lexicon from texts without words")
    return FrequencyLexicon(counts=dict(counts), total=sum(counts.values()))


def save_lexicon(lexicon: FrequencyLexicon, file_path: str) -> None:
    """Write `#total:<N>` then `word<TAB>count` lines sorted by word"""
    ensure_parent_dir(file_path)
    with open(file_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{LEXICON_TOTAL_PREFIX}{lexicon.total}\n")
        for word in sorted(lexicon.counts):
            f.write(f"{word}\t{lexicon.counts[word]}\n")
    logger.info(f"Wrote lexicon with {len(lexicon.counts)} words to {file_path}")


def load_lexicon(file_path: str) -> FrequencyLexicon:
    """Read a lexicon TSV; without a total header the listed counts are summed"""
    header = read_first_line(file_path)
    total = None
    if header.startswith(LEXICON_TOTAL_PREFIX):
        try:
            total = int(header[len(LEXICON_TOTAL_PREFIX):])
        except ValueError:
            raise FileFormatError(f"{file_path}: malformed header '{header}', expected {LEXICON_TOTAL_PREFIX}<N>")

    df = read_csv_checked(file_path, LEXICON_COLUMNS, sep="\t", dtype=str, names=LEXICON_COLUMNS,
                          skiprows=0 if total is None else 1, quoting=csv.QUOTE_NONE)
    counts = pd.to_numeric(df["count"], errors="coerce")
    bad = df["word"].isna() | counts.isna() | (counts % 1 != 0)
    if bad.any():
        row = df[bad].iloc[0]
        raise FileFormatError(f"{file_path}: expected word<TAB>integer count, found {row['word']!r}, {row['count']!r}")
    if total is None:
        total = int(counts.sum())
    try:
        return FrequencyLexicon(counts=dict(zip(df["word"], counts.astype(int).tolist())), total=total)
    except ValueError as e:
        raise FileFormatError(f"{file_path}: {e}")


def _mtld_direction(tokens: Sequence[str], threshold: float) -> Tuple[float, int]:
    factors = 0.0
    completed = 0
    types = set()
    count = 0
    for token in tokens:
        count += 1
        types.add(token)
        if len(types) / count < threshold:
            factors += 1.0
            completed += 1
            types = set()
            count = 0
    if count > 0:
        factors += (1.0 - len(types) / count) / (1.0 - threshold)
    return factors, completed


def mtld(tokens: Sequence[str], threshold: float = settings.MTLD_THRESHOLD) -> float:
    """
    Bidirectional measure of textual lexical diversity

    Args:
        tokens: Word tokens (already normalized by the caller)
        threshold: Type-token ratio at which a factor completes (strict "<")

    Returns:
        Mean of forward and backward MTLD
    """
    if len(tokens) < settings.MTLD_MIN_TOKENS:
        raise InsufficientRepetitionError(f"MTLD needs at least {settings.MTLD_MIN_TOKENS} tokens, got {len(tokens)}")
    results = []
    for direction in (list(tokens), list(reversed(tokens))):
        factors, completed = _mtld_direction(direction, threshold)
        if completed == 0:
            raise InsufficientRepetitionError("Insufficient repetition: no completed MTLD factor")
        results.append(len(tokens) / factors)
    return (results[0] + results[1]) / 2.0


def mtld_tokens(text: str) -> List[str]:
    """Clean word forms of a text used for MTLD"""
    return [form for form in (clean_form(w) for w in word_surfaces(text)) if form]


def count_syllables(word: str) -> int:
    """
    Vowel-group syllable heuristic

    Terminal silent "e" is dropped when the word has at least two groups,
    except for a consonant + "le" ending.
    """
    form = clean_form(word)
    groups = _VOWEL_GROUP.findall(form)
    count = len(groups)
    consonant_le = len(form) >= 3 and form.endswith("le") and form[-3] not in _VOWELS
    if count >= 2 and form.endswith("e") and not consonant_le:
        count -= 1
    return max(count, 1)


def fkgl(text: str) -> float:
    """
    Flesch-Kincaid grade level

    0.39 * words/sentences + 11.8 * syllables/words - 15.59
    """
    words = segment_words(text)
    if not words:
        raise InputValidationError("FKGL needs at least one word")
    n_sentences = count_sentences(words)
    n_syllables = sum(count_syllables(w.surface) for w in words)
    return 0.39 * (len(words) / n_sentences) + 11.8 * (n_syllables / len(words)) - 15.59


def compute_text_stats(text: str, lexicon: FrequencyLexicon, require_mtld: bool = True) -> TextStats:
    """
    Aggregate readability statistics of a document

    Args:
        text: Non-empty text
        lexicon: Frequency lexicon for Zipf scores
        require_mtld: Propagate MTLD errors; otherwise leave mtld empty

    Returns:
        TextStats
    """
    words = segment_words(text)
    if not words:
        raise InputValidationError("Cannot compute statistics of an empty text")

    known_zipf = []
    unknown = 0
    for word in words:
        value, known = zipf_score(word.surface, lexicon)
        if known:
            known_zipf.append(value)
        else:
            unknown += 1

    try:
        diversity = mtld(mtld_tokens(text))
    except InsufficientRepetitionError:
        if require_mtld:
            raise
        logger.warning("MTLD undefined for text; leaving it empty")
        diversity = None

    n_sentences = count_sentences(words)
    return TextStats(
        word_count=len(words),
        sentence_count=n_sentences,
        mean_word_length=sum(len(w.surface) for w in words) / len(words),
        mean_zipf=sum(known_zipf) / len(known_zipf) if known_zipf else None,
        unknown_word_count=unknown,
        mean_sentence_length=len(words) / n_sentences,
        mtld=diversity,
        fkgl=fkgl(text)
    )


def generation_stats_frame(records: Sequence[Dict[str, Any]], lexicon: FrequencyLexicon,
                           require_mtld: bool = True) -> pd.DataFrame:
    """
    One row per generation record: prompt, weight, TextStats fields and length-normalized scores

    Records with empty text (EOS right after the prompt) are skipped.
    """
    rows = []
    for record in records:
        if not record["text"].strip():
            logger.warning(f"Skipping empty generation for prompt {record.get('prompt', '')!r}")
            continue
        stats = compute_text_stats(record["text"], lexicon, require_mtld=require_mtld)
        n_tokens = record.get("n_tokens") or 0
        n_words = record.get("n_words") or stats.word_count
        rows.append({
            "prompt": record.get("prompt", ""),
            "gaze_weight": record.get("gaze_weight", 0.0),
            **stats.model_dump(),
            "token_score_per_token": record["token_score"] / n_tokens if n_tokens else None,
            "gaze_score_per_word": record["gaze_score"] / n_words if n_words else None,
        })
    return pd.DataFrame(rows)


def summarize_generations(stats: pd.DataFrame) -> pd.DataFrame:
    """Long-format mean/SEM per gaze weight of every numeric statistic (plot-ready)"""
    statistics = ["mean_word_length", "mean_zipf", "mean_sentence_length", "mtld", "fkgl",
                  "token_score_per_token", "gaze_score_per_word"]
    rows = []
    for statistic in statistics:
        column = stats[["gaze_weight", statistic]].dropna()
        if column.empty:
            continue
        for summary in grouped_mean_sem(column, ["gaze_weight"], statistic):
            rows.append({"statistic": statistic, "gaze_weight": float(summary.keys["gaze_weight"]),
                         "n": summary.n, "mean": summary.mean, "sem": summary.sem})
    return pd.DataFrame(rows, columns=["statistic", "gaze_weight", "n", "mean", "sem"])
