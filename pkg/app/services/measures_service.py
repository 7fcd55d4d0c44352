"""
Reading measures service: first-pass reading time, go-past time, trial
extraction and data quality reporting
"""

import json
import logging
import os
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple
import numpy as np
import pandas as pd
from pydantic import ValidationError
from ..config.settings import settings
from ..core.exceptions import FileFormatError, InputValidationError
from ..models.analysis import ObservationRow
from ..models.eyetracking import (AreaOfInterest, DataQualityReport, MeasureRecord, ReaderQuality,
                                  TrialMetadata, WordMeasures)
from ..utils.file_utils import ensure_file_exists, read_csv_checked, write_csv
from .fixation_service import SAMPLE_COLUMNS, Samples, detect_fixations_idt, map_fixations_to_aois, samples_to_arrays

logger = logging.getLogger(__name__)

AOI_COLUMNS = ["word_index", "page", "x_min", "y_min", "x_max", "y_max", "word"]
MEASURE_COLUMNS = ["reader_id", "text_id", "word_index", "word", "fprt_ms", "go_past_ms", "skipped"]

Scanpath = Sequence[Tuple[Optional[int], float]]


def compute_measures(scanpath: Scanpath, n_words: int,
                     strict_first_pass: bool = settings.STRICT_FIRST_PASS) -> List[WordMeasures]:
    """
    Word-level reading measures from a word scanpath

    FPRT sums the initial run of consecutive fixations on the word. Go-past
    sums every fixation from the first one on the word up to (excluding)
    the first later fixation on a word further right, or to the end of the
    trial. Unassigned fixations (None) break the first run but count toward
    go-past.

    Args:
        scanpath: Time-ordered (word_index or None, duration ms) pairs
        n_words: Words on the page; indices lie in [0, n_words)
        strict_first_pass: Treat a word first entered after a word to its
            right as skipped

    Returns:
        One WordMeasures per word index
    """
    for index, duration in scanpath:
        if index is not None and not 0 <= index < n_words:
            raise InputValidationError(f"Scanpath word index {index} outside [0, {n_words})")
        if duration < 0:
            raise InputValidationError(f"Negative fixation duration {duration}")

    indices = [index for index, _ in scanpath]
    durations = [duration for _, duration in scanpath]
    first_visit: Dict[int, int] = {}
    counts: Dict[int, int] = defaultdict(int)
    rightmost_before: List[int] = []
    rightmost = -1
    for k, index in enumerate(indices):
        rightmost_before.append(rightmost)
        if index is None:
            continue
        counts[index] += 1
        first_visit.setdefault(index, k)
        rightmost = max(rightmost, index)

    measures = []
    for word in range(n_words):
        if word not in first_visit:
            measures.append(WordMeasures(word_index=word))
            continue
        start = first_visit[word]
        if strict_first_pass and rightmost_before[start] > word:
            measures.append(WordMeasures(word_index=word, n_fixations=counts[word]))
            continue

        fprt = 0.0
        k = start
        while k < len(indices) and indices[k] == word:
            fprt += durations[k]
            k += 1

        go_past = 0.0
        k = start
        while k < len(indices) and not (indices[k] is not None and indices[k] > word):
            go_past += durations[k]
            k += 1

        measures.append(WordMeasures(word_index=word, fprt_ms=fprt, go_past_ms=go_past,
                                     n_fixations=counts[word], skipped=False))
    return measures


# ---------------------------------------------------------------------------
# Trial files
# ---------------------------------------------------------------------------

def load_trial_metadata(file_path: str) -> TrialMetadata:
    """Read one trial sidecar JSON"""
    ensure_file_exists(file_path)
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            return TrialMetadata(**json.load(f))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise FileFormatError(f"{file_path}: {e}")
    except ValidationError as e:
        raise FileFormatError(f"{file_path}: invalid trial metadata: {e}")


def load_samples(file_path: str) -> pd.DataFrame:
    """Read a `t_ms,x_px,y_px,valid` sample file"""
    df = read_csv_checked(file_path, SAMPLE_COLUMNS)
    df["valid"] = df["valid"].fillna(0).astype(int)
    return df


def load_aois(file_path: str) -> List[AreaOfInterest]:
    """Read a `word_index,page,x_min,y_min,x_max,y_max,word` AOI file"""
    df = read_csv_checked(file_path, AOI_COLUMNS, dtype={"word": str})
    try:
        return [
            AreaOfInterest(word_index=int(r.word_index), page=int(r.page), x_min=float(r.x_min),
                           y_min=float(r.y_min), x_max=float(r.x_max), y_max=float(r.y_max),
                           word="" if pd.isna(r.word) else str(r.word))
            for r in df.itertuples(index=False)
        ]
    except ValidationError as e:
        raise FileFormatError(f"{file_path}: {e}")


def discover_trials(directory: str) -> List[str]:
    """Sorted paths of the trial metadata files (*.json) in a directory"""
    if not os.path.isdir(directory):
        raise InputValidationError(f"Trial directory not found: {directory}")
    return sorted(os.path.join(directory, name) for name in os.listdir(directory) if name.endswith(".json"))


def _resolve(base_dir: str, file_path: str) -> str:
    return file_path if os.path.isabs(file_path) else os.path.join(base_dir, file_path)


def page_aois(metadata: TrialMetadata, aois: Sequence[AreaOfInterest]) -> List[AreaOfInterest]:
    """AOIs of the trial's page ordered by word index"""
    selected = [a for a in aois if metadata.page is None or a.page == metadata.page]
    return sorted(selected, key=lambda a: a.word_index)


def extract_trial_measures(metadata: TrialMetadata, samples: Samples, aois: Sequence[AreaOfInterest],
                           strict_first_pass: bool = settings.STRICT_FIRST_PASS,
                           dispersion_threshold: float = settings.IDT_DISPERSION_DEG,
                           min_duration: float = settings.IDT_MIN_DURATION_MS,
                           sampling_rate_hz: float = settings.SAMPLING_RATE_HZ) -> List[MeasureRecord]:
    """
    Samples -> fixations -> word scanpath -> measure records for one trial (one page)

    Word indices in the records are those of the AOI file; measures are
    computed over the page's words in index order.
    """
    words = page_aois(metadata, aois)
    if not words:
        raise InputValidationError(f"No AOIs for page {metadata.page} of text {metadata.text_id}")
    fixations = detect_fixations_idt(samples, dispersion_threshold, min_duration,
                                     metadata.pixels_per_degree, sampling_rate_hz)
    position = {a.word_index: p for p, a in enumerate(words)}
    scanpath = [
        (None if index is None else position[index], fixation.duration)
        for fixation, index in map_fixations_to_aois(fixations, words)
    ]
    measures = compute_measures(scanpath, len(words), strict_first_pass)
    return [
        MeasureRecord(
            reader_id=metadata.reader_id,
            text_id=metadata.text_id,
            word_index=aoi.word_index,
            word=aoi.word,
            fprt_ms=m.fprt_ms,
            go_past_ms=m.go_past_ms,
            n_fixations=m.n_fixations,
            skipped=m.skipped
        )
        for aoi, m in zip(words, measures)
    ]


def observation_rows(metadata: TrialMetadata, records: Sequence[MeasureRecord]) -> List[ObservationRow]:
    """Analysis rows of the fixated words of a trial that carries group and gaze weight"""
    if metadata.group is None or metadata.gaze_weight is None:
        return []
    return [
        ObservationRow(
            reader_id=r.reader_id,
            group=metadata.group,
            gaze_weight=metadata.gaze_weight,
            text_id=r.text_id,
            word_index=r.word_index,
            word=r.word,
            fprt_ms=r.fprt_ms,
            word_length=len(r.word)
        )
        for r in records if not r.skipped and r.fprt_ms is not None
    ]


def extract_directory(directory: str, strict_first_pass: bool = settings.STRICT_FIRST_PASS
                      ) -> Tuple[List[MeasureRecord], List[ObservationRow], DataQualityReport]:
    """
    Process every trial of a directory; removed trials only enter the quality report

    Returns:
        Tuple of (measure records, observation rows, data quality report)
    """
    records: List[MeasureRecord] = []
    observations: List[ObservationRow] = []
    quality_inputs: List[Tuple[TrialMetadata, pd.DataFrame]] = []
    aoi_cache: Dict[str, List[AreaOfInterest]] = {}

    paths = discover_trials(directory)
    if not paths:
        raise InputValidationError(f"No trial metadata (*.json) in {directory}")
    for path in paths:
        metadata = load_trial_metadata(path)
        base_dir = os.path.dirname(path)
        samples = load_samples(_resolve(base_dir, metadata.samples_file))
        quality_inputs.append((metadata, samples))
        if metadata.removed:
            logger.info(f"Trial {os.path.basename(path)} is marked removed; skipping measures")
            continue
        aoi_path = _resolve(base_dir, metadata.aoi_file)
        if aoi_path not in aoi_cache:
            aoi_cache[aoi_path] = load_aois(aoi_path)
        trial_records = extract_trial_measures(metadata, samples, aoi_cache[aoi_path], strict_first_pass)
        records.extend(trial_records)
        observations.extend(observation_rows(metadata, trial_records))

    logger.info(f"Extracted {len(records)} measure records from {len(paths)} trials")
    return records, observations, data_quality_report(quality_inputs)


# ---------------------------------------------------------------------------
# Data quality
# ---------------------------------------------------------------------------

def _percent(part: int, whole: int) -> float:
    return 100.0 * part / whole if whole else 0.0


def data_quality_report(trials: Sequence[Tuple[TrialMetadata, Samples]]) -> DataQualityReport:
    """
    Data loss and trial removal per reader and overall

    Loss is the share of invalid samples in the raw data of every trial,
    removed trials included. Min and max run across readers.
    """
    per_reader: Dict[str, Dict[str, int]] = defaultdict(lambda: defaultdict(int))
    for metadata, samples in trials:
        _, _, _, valid = samples_to_arrays(samples)
        stats = per_reader[metadata.reader_id]
        stats["n_trials"] += 1
        stats["n_samples"] += len(valid)
        stats["n_invalid"] += int(np.count_nonzero(~valid))
        stats["removed"] += int(metadata.removed)
        stats["partially_removed"] += int(metadata.partially_removed)
        if metadata.comprehension_total:
            stats["correct"] += metadata.comprehension_correct or 0
            stats["answered"] += metadata.comprehension_total

    readers = []
    for reader_id in sorted(per_reader):
        stats = per_reader[reader_id]
        readers.append(ReaderQuality(
            reader_id=reader_id,
            n_trials=stats["n_trials"],
            n_samples=stats["n_samples"],
            n_invalid=stats["n_invalid"],
            loss_percent=_percent(stats["n_invalid"], stats["n_samples"]),
            trials_removed=stats["removed"],
            trials_partially_removed=stats["partially_removed"],
            comprehension_accuracy=_percent(stats["correct"], stats["answered"]) if stats["answered"] else None
        ))

    n_samples = sum(r.n_samples for r in readers)
    n_invalid = sum(r.n_invalid for r in readers)
    losses = [r.loss_percent for r in readers]
    accuracies = [r.comprehension_accuracy for r in readers if r.comprehension_accuracy is not None]
    answered = sum(per_reader[r]["answered"] for r in per_reader)
    correct = sum(per_reader[r]["correct"] for r in per_reader)
    return DataQualityReport(
        n_trials=sum(r.n_trials for r in readers),
        trials_removed=sum(r.trials_removed for r in readers),
        trials_partially_removed=sum(r.trials_partially_removed for r in readers),
        loss_percent=_percent(n_invalid, n_samples),
        loss_percent_min=min(losses) if losses else 0.0,
        loss_percent_max=max(losses) if losses else 0.0,
        comprehension_accuracy=_percent(correct, answered) if answered else None,
        comprehension_accuracy_min=min(accuracies) if accuracies else None,
        comprehension_accuracy_max=max(accuracies) if accuracies else None,
        readers=readers
    )


# ---------------------------------------------------------------------------
# Measure files
# ---------------------------------------------------------------------------

def measures_frame(records: Sequence[MeasureRecord]) -> pd.DataFrame:
    """Measure records in file layout, skipped as 0/1"""
    df = pd.DataFrame([r.model_dump() for r in records], columns=MEASURE_COLUMNS + ["n_fixations"])
    df["skipped"] = df["skipped"].astype(int)
    return df


def write_measures(records: Sequence[MeasureRecord], file_path: str) -> None:
    write_csv(measures_frame(records), file_path)


def read_measures(file_path: str) -> List[MeasureRecord]:
    """Read a measure CSV; empty duration fields are undefined measures"""
    df = read_csv_checked(file_path, MEASURE_COLUMNS, dtype={"reader_id": str, "text_id": str, "word": str})
    records = []
    try:
        for r in df.itertuples(index=False):
            n_fixations = getattr(r, "n_fixations", 0)
            records.append(MeasureRecord(
                reader_id=r.reader_id,
                text_id=r.text_id,
                word_index=int(r.word_index),
                word="" if pd.isna(r.word) else r.word,
                fprt_ms=None if pd.isna(r.fprt_ms) else float(r.fprt_ms),
                go_past_ms=None if pd.isna(r.go_past_ms) else float(r.go_past_ms),
                n_fixations=0 if pd.isna(n_fixations) else int(n_fixations),
                skipped=bool(int(r.skipped))
            ))
    except (ValidationError, ValueError) as e:
        raise FileFormatError(f"{file_path}: {e}")
    return records


def observations_frame(rows: Sequence[ObservationRow]) -> pd.DataFrame:
    columns = list(ObservationRow.model_fields)
    return pd.DataFrame([r.model_dump() for r in rows], columns=columns)


def quality_frame(report: DataQualityReport) -> pd.DataFrame:
    """Per-reader rows followed by an "all" row carrying the min/max columns"""
    rows = [r.model_dump() for r in report.readers]
    overall = report.model_dump(exclude={"readers"})
    overall["reader_id"] = "all"
    rows.append(overall)
    return pd.DataFrame(rows)
