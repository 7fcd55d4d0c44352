"""
Simulation service for the Gaze-Guided Generation Service

Synthetic reading trials (page layout, word scanpath, raw gaze samples)
for demos and pipeline checks. Simulated first-pass times rise with word
length and fall with word frequency.
"""

import json
import logging
import os
from typing import Dict, List, Optional, Sequence, Tuple
import numpy as np
import pandas as pd
from ..config.settings import settings
from ..core.exceptions import InputValidationError
from ..models.eyetracking import AreaOfInterest, TrialMetadata
from ..models.metrics import FrequencyLexicon
from ..utils.file_utils import ensure_parent_dir, write_csv
from .fixation_service import SAMPLE_COLUMNS
from .metrics_service import zipf_score
from .text_service import clean_form, word_surfaces

logger = logging.getLogger(__name__)

CHAR_WIDTH_PX = 12.0
LINE_HEIGHT_PX = 40.0
PAGE_MARGIN_PX = 100.0
PAGE_WIDTH_PX = 1000.0
WORDS_PER_PAGE = 80


def layout_page(words: Sequence[str], page: int = 0, start_index: int = 0,
                char_width: float = CHAR_WIDTH_PX, line_height: float = LINE_HEIGHT_PX,
                margin: float = PAGE_MARGIN_PX, line_width: float = PAGE_WIDTH_PX) -> List[AreaOfInterest]:
    """
    Monospace layout; each box spans its word plus half a space on either side

    Returns:
        One AOI per word, indices starting at start_index
    """
    aois = []
    x, y = margin, margin
    for offset, word in enumerate(words):
        width = (len(word) + 1) * char_width
        if x > margin and x + width > margin + line_width:
            x, y = margin, y + line_height
        aois.append(AreaOfInterest(
            word_index=start_index + offset, page=page,
            x_min=x, y_min=y, x_max=x + width, y_max=y + line_height, word=word
        ))
        x += width
    return aois


def simulated_fprt(word: str, lexicon: FrequencyLexicon, reader_offset: float, rng: np.random.Generator,
                   noise_sd: float = 20.0) -> float:
    """200 ms + 15 ms per character - 20 ms per Zipf unit, floored at 110 ms"""
    zipf, _ = zipf_score(word, lexicon)
    value = 200.0 + 15.0 * len(clean_form(word)) - 20.0 * zipf + reader_offset + rng.normal(0.0, noise_sd)
    return float(max(110.0, value))


def simulate_scanpath(words: Sequence[str], lexicon: FrequencyLexicon, rng: np.random.Generator,
                      reader_offset: float = 0.0, skip_rate: float = 0.15,
                      regression_rate: float = 0.05) -> List[Tuple[int, float]]:
    """
    Left-to-right reading with skips of short frequent words and occasional one-word regressions

    Returns:
        (word position, duration ms) fixations
    """
    scanpath: List[Tuple[int, float]] = []
    for i, word in enumerate(words):
        zipf, _ = zipf_score(word, lexicon)
        short_and_frequent = len(clean_form(word)) <= 3 and zipf >= 6.0
        if i > 0 and short_and_frequent and rng.random() < skip_rate:
            continue
        scanpath.append((i, simulated_fprt(word, lexicon, reader_offset, rng)))
        if i > 0 and rng.random() < regression_rate:
            scanpath.append((i - 1, float(rng.uniform(120.0, 220.0))))
            scanpath.append((i, float(rng.uniform(110.0, 160.0))))
    return scanpath


def render_samples(scanpath: Sequence[Tuple[int, float]], aois: Sequence[AreaOfInterest],
                   rng: np.random.Generator, sampling_rate_hz: float = settings.SAMPLING_RATE_HZ,
                   jitter_px: float = 0.5, saccade_ms: float = 30.0,
                   blink_rate: float = 0.0, blink_ms: float = 120.0) -> pd.DataFrame:
    """
    Raw gaze samples for a scanpath: jittered fixations at word centres joined
    by linear saccades; a blink replaces a saccade with invalid samples

    Args:
        scanpath: (position in aois, duration ms) fixations
        aois: Boxes of the page
        rng: Random generator
        sampling_rate_hz: Output rate
        jitter_px: Gaussian fixation jitter
        saccade_ms: Saccade duration
        blink_rate: Probability of a blink before each fixation
        blink_ms: Blink duration

    Returns:
        Frame with t_ms, x_px, y_px, valid
    """
    period = 1000.0 / sampling_rate_hz
    xs: List[float] = []
    ys: List[float] = []
    valid: List[int] = []
    previous: Optional[Tuple[float, float]] = None
    for position, duration in scanpath:
        box = aois[position]
        target = ((box.x_min + box.x_max) / 2.0, (box.y_min + box.y_max) / 2.0)
        if previous is not None:
            if rng.random() < blink_rate:
                n = int(round(blink_ms / period))
                xs.extend([np.nan] * n)
                ys.extend([np.nan] * n)
                valid.extend([0] * n)
            else:
                n = int(round(saccade_ms / period))
                for step in range(1, n + 1):
                    fraction = step / (n + 1)
                    xs.append(previous[0] + fraction * (target[0] - previous[0]))
                    ys.append(previous[1] + fraction * (target[1] - previous[1]))
                    valid.append(1)
        n = int(round(duration / period))
        xs.extend((target[0] + rng.normal(0.0, jitter_px, n)).tolist())
        ys.extend((target[1] + rng.normal(0.0, jitter_px, n)).tolist())
        valid.extend([1] * n)
        previous = target

    t = np.arange(len(xs)) * period
    return pd.DataFrame({"t_ms": t, "x_px": xs, "y_px": ys, "valid": valid}, columns=SAMPLE_COLUMNS)


def write_trial(directory: str, name: str, metadata: TrialMetadata, samples: pd.DataFrame,
                aois: Optional[Sequence[AreaOfInterest]] = None) -> str:
    """
    Write samples, optional AOI file and the metadata sidecar; returns the sidecar path

    File references in the metadata are relative to directory.
    """
    os.makedirs(directory, exist_ok=True)
    write_csv(samples, os.path.join(directory, metadata.samples_file))
    if aois is not None:
        aoi_frame = pd.DataFrame([a.model_dump() for a in aois],
                                 columns=["word_index", "page", "x_min", "y_min", "x_max", "y_max", "word"])
        write_csv(aoi_frame, os.path.join(directory, metadata.aoi_file))
    path = os.path.join(directory, f"{name}.json")
    ensure_parent_dir(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(metadata.model_dump(exclude_none=True), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def simulate_study(texts: Sequence[Dict], lexicon: FrequencyLexicon, directory: str, n_readers: int = 4,
                   seed: int = 0, words_per_page: int = WORDS_PER_PAGE, blink_rate: float = 0.02,
                   pixels_per_degree: float = settings.PIXELS_PER_DEGREE) -> List[str]:
    """
    Simulate every reader reading every text; writes one trial per page

    Args:
        texts: Dicts with text_id, text and optionally gaze_weight
        lexicon: Frequency lexicon driving simulated reading times
        directory: Output directory
        n_readers: Readers; the first half form group L1, the rest L2 (slower)
        seed: Base seed; each (reader, text) pair gets its own stream
        words_per_page: Page size in words
        blink_rate: Blink probability per saccade
        pixels_per_degree: Recorded in each trial's metadata

    Returns:
        Sidecar paths in writing order
    """
    if n_readers < 1:
        raise InputValidationError("n_readers must be >= 1")
    offsets = np.random.default_rng(seed).normal(0.0, 25.0, n_readers)
    paths = []
    for text_number, item in enumerate(texts):
        words = word_surfaces(item["text"])
        if not words:
            logger.warning(f"Text {item['text_id']} has no words; not simulated")
            continue
        aoi_file = f"{item['text_id']}_aoi.csv"
        pages = [words[start:start + words_per_page] for start in range(0, len(words), words_per_page)]
        all_aois: List[AreaOfInterest] = []
        for page, page_words in enumerate(pages):
            all_aois.extend(layout_page(page_words, page=page, start_index=page * words_per_page))

        for reader in range(n_readers):
            reader_id = f"r{reader + 1:02d}"
            group = "L1" if reader < (n_readers + 1) // 2 else "L2"
            offset = float(offsets[reader]) + (40.0 if group == "L2" else 0.0)
            rng = np.random.default_rng([seed, reader, text_number])
            for page, page_words in enumerate(pages):
                aois = [a for a in all_aois if a.page == page]
                scanpath = simulate_scanpath(page_words, lexicon, rng, reader_offset=offset)
                samples = render_samples(scanpath, aois, rng, blink_rate=blink_rate)
                name = f"{reader_id}_{item['text_id']}_p{page}"
                metadata = TrialMetadata(
                    reader_id=reader_id,
                    text_id=item["text_id"],
                    samples_file=f"{name}_samples.csv",
                    aoi_file=aoi_file,
                    page=page,
                    pixels_per_degree=pixels_per_degree,
                    group=group,
                    gaze_weight=item.get("gaze_weight"),
                    comprehension_correct=int(rng.integers(2, 4)),
                    comprehension_total=3
                )
                write_for_first = reader == 0 and page == len(pages) - 1
                paths.append(write_trial(directory, name, metadata, samples, all_aois if write_for_first else None))
    logger.info(f"Simulated {len(paths)} trials for {n_readers} readers in {directory}")
    return paths
