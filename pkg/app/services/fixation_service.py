"""
Fixation service: dispersion-threshold (I-DT) fixation detection and
mapping of fixations to word areas of interest
"""

import logging
from typing import List, Optional, Sequence, Tuple, Union
import numpy as np
import pandas as pd
from ..config.settings import settings
from ..core.exceptions import InputValidationError
from ..models.eyetracking import AreaOfInterest, FixationEvent, GazeSample

logger = logging.getLogger(__name__)

SAMPLE_COLUMNS = ["t_ms", "x_px", "y_px", "valid"]

Samples = Union[pd.DataFrame, Sequence[GazeSample]]


def samples_to_arrays(samples: Samples) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Convert samples to (t, x, y, valid) arrays

    A sample is usable only when it is flagged valid and has both coordinates.
    """
    if isinstance(samples, pd.DataFrame):
        missing = [c for c in SAMPLE_COLUMNS if c not in samples.columns]
        if missing:
            raise InputValidationError(f"Sample frame lacks columns: {missing}")
        t = samples["t_ms"].to_numpy(dtype=float)
        x = pd.to_numeric(samples["x_px"], errors="coerce").to_numpy(dtype=float)
        y = pd.to_numeric(samples["y_px"], errors="coerce").to_numpy(dtype=float)
        valid = samples["valid"].astype(int).to_numpy() != 0
    else:
        t = np.array([s.t for s in samples], dtype=float)
        x = np.array([np.nan if s.x is None else s.x for s in samples], dtype=float)
        y = np.array([np.nan if s.y is None else s.y for s in samples], dtype=float)
        valid = np.array([s.valid for s in samples], dtype=bool)
    valid = valid & np.isfinite(x) & np.isfinite(y)
    return t, x, y, valid


def detect_fixations_idt(samples: Samples,
                         dispersion_threshold: float = settings.IDT_DISPERSION_DEG,
                         min_duration: float = settings.IDT_MIN_DURATION_MS,
                         pixels_per_degree: float = settings.PIXELS_PER_DEGREE,
                         sampling_rate_hz: float = settings.SAMPLING_RATE_HZ) -> List[FixationEvent]:
    """
    Detect fixations with the dispersion-threshold algorithm

    A window grows while (max x - min x) + (max y - min y) stays within
    dispersion_threshold * pixels_per_degree. Invalid samples close the window.
    A window lasting at least min_duration becomes a fixation at the centroid
    of its samples and detection resumes after it; otherwise the window start
    advances by one sample. Duration counts one sample period for the last
    sample, so 200 samples at 1000 Hz last 200 ms.

    Args:
        samples: Sample frame (t_ms, x_px, y_px, valid) or GazeSample list
        dispersion_threshold: Degrees of visual angle
        min_duration: Milliseconds
        pixels_per_degree: Screen geometry
        sampling_rate_hz: Recording rate

    Returns:
        Time-ordered, non-overlapping fixations

    Raises:
        InputValidationError: unsorted timestamps or non-positive geometry
    """
    if pixels_per_degree <= 0:
        raise InputValidationError(f"pixels_per_degree must be > 0, got {pixels_per_degree}")
    if sampling_rate_hz <= 0:
        raise InputValidationError(f"sampling_rate_hz must be > 0, got {sampling_rate_hz}")
    t, x, y, valid = samples_to_arrays(samples)
    if len(t) > 1 and np.any(np.diff(t) < 0):
        raise InputValidationError("Sample timestamps are not sorted")

    max_dispersion = dispersion_threshold * pixels_per_degree
    period = 1000.0 / sampling_rate_hz
    ts, xs, ys, ok = t.tolist(), x.tolist(), y.tolist(), valid.tolist()
    n = len(ts)

    fixations: List[FixationEvent] = []
    i = 0
    while i < n:
        if not ok[i]:
            i += 1
            continue
        x_lo = x_hi = xs[i]
        y_lo = y_hi = ys[i]
        j = i
        while j + 1 < n and ok[j + 1]:
            nx, ny = xs[j + 1], ys[j + 1]
            dispersion = (max(x_hi, nx) - min(x_lo, nx)) + (max(y_hi, ny) - min(y_lo, ny))
            if dispersion > max_dispersion:
                break
            x_lo, x_hi = min(x_lo, nx), max(x_hi, nx)
            y_lo, y_hi = min(y_lo, ny), max(y_hi, ny)
            j += 1
        duration = ts[j] - ts[i] + period
        if duration >= min_duration:
            fixations.append(FixationEvent(
                onset=ts[i],
                duration=duration,
                x=float(np.mean(x[i:j + 1])),
                y=float(np.mean(y[i:j + 1]))
            ))
            i = j + 1
        else:
            i += 1

    logger.debug(f"I-DT found {len(fixations)} fixations in {n} samples")
    return fixations


def default_snap_radius(aois: Sequence[AreaOfInterest]) -> float:
    """One line height: the median AOI height"""
    if not aois:
        return 0.0
    return float(np.median([a.y_max - a.y_min for a in aois]))


def map_fixations_to_aois(fixations: Sequence[FixationEvent], aois: Sequence[AreaOfInterest],
                          snap_radius: Optional[float] = None) -> List[Tuple[FixationEvent, Optional[int]]]:
    """
    Assign each fixation to a word

    The centroid is tested for containment first. An uncontained centroid
    snaps to the nearest box when its Euclidean distance is within
    snap_radius, otherwise the fixation stays unassigned (None). Ties go to
    the smaller word index.

    Args:
        fixations: Detected fixations
        aois: Word boxes of the page the fixations belong to
        snap_radius: Pixels; defaults to the median AOI height

    Returns:
        (fixation, word_index or None) pairs in input order
    """
    if not aois:
        return [(f, None) for f in fixations]
    ordered = sorted(aois, key=lambda a: a.word_index)
    boxes = np.array([[a.x_min, a.y_min, a.x_max, a.y_max] for a in ordered], dtype=float)
    indices = [a.word_index for a in ordered]
    radius = default_snap_radius(ordered) if snap_radius is None else snap_radius

    mapped: List[Tuple[FixationEvent, Optional[int]]] = []
    unassigned = 0
    for fixation in fixations:
        dx = np.maximum.reduce([boxes[:, 0] - fixation.x, np.zeros(len(boxes)), fixation.x - boxes[:, 2]])
        dy = np.maximum.reduce([boxes[:, 1] - fixation.y, np.zeros(len(boxes)), fixation.y - boxes[:, 3]])
        distance = np.hypot(dx, dy)
        # argmin returns the first minimum, i.e. the smallest word index; contained boxes have distance 0
        nearest = int(np.argmin(distance))
        if distance[nearest] <= radius:
            mapped.append((fixation, indices[nearest]))
        else:
            mapped.append((fixation, None))
            unassigned += 1
    if unassigned:
        logger.warning(f"{unassigned} of {len(fixations)} fixations fall outside every AOI")
    return mapped
