"""
Guided decoding service: beam search over candidates ranked by
token score + gaze weight * gaze score, and an exhaustive-search oracle
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple
import numpy as np
from ..config.settings import settings
from ..core.contracts import GazePredictor, LanguageModel
from ..core.exceptions import InputValidationError, SearchSpaceError
from ..models.decoding import CandidateSequence, DecoderConfig, GenerationResult, TraceStep
from .text_service import word_surfaces

logger = logging.getLogger(__name__)


def total_score(candidate: CandidateSequence, gaze_weight: float) -> float:
    """Token score plus gaze weight times gaze score"""
    return candidate.token_score + gaze_weight * candidate.gaze_score


def _rank_key(candidate: CandidateSequence, gaze_weight: float) -> Tuple[float, Tuple[int, ...]]:
    # Highest total first; ties go to the lexicographically smallest token ids
    return -total_score(candidate, gaze_weight), candidate.token_ids


def gaze_score_of(words: Sequence[str], gaze: Optional[GazePredictor], finished: bool,
                  defer_incomplete_word: bool = False) -> float:
    """
    Gaze score of a candidate's full word sequence

    With defer_incomplete_word, the last word of an unfinished candidate
    does not contribute until a later token completes it.
    """
    if gaze is None or not words:
        return 0.0
    if defer_incomplete_word and not finished:
        words = words[:-1]
    return gaze.score_sequence(words)


def _extend(parent: CandidateSequence, token: int, logprob: float, lm: LanguageModel,
            gaze: Optional[GazePredictor], config: DecoderConfig, eos_id: int) -> CandidateSequence:
    token_ids = parent.token_ids + (token,)
    if token == eos_id:
        finished, reason = True, "eos"
    elif len(token_ids) >= config.max_tokens:
        finished, reason = True, "length"
    else:
        finished, reason = False, None
    # Recompute over all words so a token completing a word revises that word's prediction
    words = tuple(word_surfaces(lm.decode(token_ids)))
    return CandidateSequence(
        token_ids=token_ids,
        words=words,
        token_score=parent.token_score + logprob,
        gaze_score=gaze_score_of(words, gaze, finished, config.defer_incomplete_word),
        finished=finished,
        finish_reason=reason
    )


def top_k_tokens(logprobs: np.ndarray, candidate_ids: Sequence[int], k: int) -> List[int]:
    """The k most probable candidate ids with finite log probability; ties by smaller id"""
    ids = np.asarray(candidate_ids, dtype=int)
    values = logprobs[ids]
    finite = np.isfinite(values)
    ids, values = ids[finite], values[finite]
    order = np.lexsort((ids, -values))[:k]
    return ids[order].tolist()


def _eos_id(lm: LanguageModel, config: DecoderConfig) -> int:
    return config.eos_id if config.eos_id is not None else lm.eos_id


def beam_step(beams: Sequence[CandidateSequence], lm: LanguageModel, gaze: Optional[GazePredictor],
              config: DecoderConfig, prompt_ids: Optional[Sequence[int]] = None) -> List[CandidateSequence]:
    """
    Expand every unfinished beam with its top-k next tokens and keep the best beam_size candidates

    Finished beams stay in the pool and compete with the expansions.

    Args:
        beams: Current beams
        lm: Token score source
        gaze: Gaze predictor, or None for token scores only
        config: Decoder configuration
        prompt_ids: Encoded prompt; encoded from config.prompt when omitted

    Returns:
        New beams ordered best first
    """
    unfinished = [b for b in beams if not b.finished]
    if not unfinished:
        raise InputValidationError("beam_step needs at least one unfinished beam")
    if prompt_ids is None:
        prompt_ids = lm.encode(config.prompt) if config.prompt else []
    eos_id = _eos_id(lm, config)
    candidate_ids = lm.generatable_ids()

    pool = [b for b in beams if b.finished]
    for beam in unfinished:
        logprobs = lm.next_token_logprobs(list(prompt_ids) + list(beam.token_ids))
        for token in top_k_tokens(logprobs, candidate_ids, config.top_k):
            pool.append(_extend(beam, token, float(logprobs[token]), lm, gaze, config, eos_id))

    pool.sort(key=lambda c: _rank_key(c, config.gaze_weight))
    return pool[:config.beam_size]


def _result(best: CandidateSequence, lm: LanguageModel, config: DecoderConfig,
            trace: List[TraceStep]) -> GenerationResult:
    return GenerationResult(
        prompt=config.prompt,
        gaze_weight=config.gaze_weight,
        k=config.top_k,
        beam_size=config.beam_size,
        text=lm.decode(best.token_ids),
        token_score=best.token_score,
        gaze_score=best.gaze_score,
        total_score=total_score(best, config.gaze_weight),
        trace=trace,
        token_ids=list(best.token_ids),
        n_tokens=len(best.token_ids),
        n_words=len(best.words),
        finish_reason=best.finish_reason
    )


def _warn_weight(gaze_weight: float) -> None:
    if abs(gaze_weight) > settings.GAZE_WEIGHT_WARN:
        logger.warning(
            f"Gaze weight {gaze_weight:+g} is outside [-{settings.GAZE_WEIGHT_WARN:g}, +{settings.GAZE_WEIGHT_WARN:g}]; "
            "expect repetitive output"
        )


def generate(lm: LanguageModel, gaze: Optional[GazePredictor], config: DecoderConfig) -> GenerationResult:
    """
    Guided beam search until every beam has emitted EOS or reached max_tokens

    Args:
        lm: Token score source
        gaze: Gaze predictor; None disables gaze guidance
        config: Decoder configuration (prompt included)

    Returns:
        Best finished candidate by total score with the per-step trace of the leading beam
    """
    _warn_weight(config.gaze_weight)
    prompt_ids = lm.encode(config.prompt) if config.prompt else []

    beams = [CandidateSequence()]
    trace: List[TraceStep] = []
    step = 0
    while any(not b.finished for b in beams):
        step += 1
        beams = beam_step(beams, lm, gaze, config, prompt_ids)
        if not beams:
            raise InputValidationError("Language model produced no finite continuation")
        leader = beams[0]
        trace.append(TraceStep(step=step, token_score=leader.token_score, gaze_score=leader.gaze_score,
                               total_score=total_score(leader, config.gaze_weight)))

    finished = [b for b in beams if b.finished]
    best = min(finished or beams, key=lambda c: _rank_key(c, config.gaze_weight))
    logger.debug(f"Generated {len(best.token_ids)} tokens for weight {config.gaze_weight:+g}")
    return _result(best, lm, config, trace)


def exhaustive_generate(lm: LanguageModel, gaze: Optional[GazePredictor], config: DecoderConfig,
                        limit: int = settings.EXHAUSTIVE_SEARCH_LIMIT) -> GenerationResult:
    """
    Exact maximizer of the total score over every sequence ending in EOS or reaching max_tokens

    Raises:
        SearchSpaceError: when vocab^max_tokens exceeds the guard
    """
    candidate_ids = lm.generatable_ids()
    space = len(candidate_ids) ** config.max_tokens
    if space > limit:
        raise SearchSpaceError(f"Search space {len(candidate_ids)}^{config.max_tokens} exceeds {limit}")
    prompt_ids = lm.encode(config.prompt) if config.prompt else []
    eos_id = _eos_id(lm, config)

    best: Optional[CandidateSequence] = None
    best_key = None
    stack = [CandidateSequence()]
    while stack:
        parent = stack.pop()
        logprobs = lm.next_token_logprobs(list(prompt_ids) + list(parent.token_ids))
        for token in candidate_ids:
            logprob = float(logprobs[token])
            if not math.isfinite(logprob):
                continue
            child = _extend(parent, token, logprob, lm, gaze, config, eos_id)
            if child.finished:
                key = _rank_key(child, config.gaze_weight)
                if best_key is None or key < best_key:
                    best, best_key = child, key
            else:
                stack.append(child)

    if best is None:
        raise InputValidationError("Language model produced no finite sequence")
    trace = [TraceStep(step=len(best.token_ids), token_score=best.token_score, gaze_score=best.gaze_score,
                       total_score=total_score(best, config.gaze_weight))]
    return _result(best, lm, config, trace)


def generate_sweep(lm: LanguageModel, gaze: Optional[GazePredictor], prompts: Sequence[str],
                   gaze_weights: Sequence[float], base_config: DecoderConfig,
                   workers: int = 1) -> List[GenerationResult]:
    """
    Generate for every (prompt, weight) pair; results keep prompt-major, weight-minor order
    """
    configs = [
        DecoderConfig(**{**base_config.model_dump(), "prompt": prompt, "gaze_weight": weight})
        for prompt in prompts for weight in gaze_weights
    ]
    logger.info(f"Running {len(configs)} generation jobs with {workers} worker(s)")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda c: generate(lm, gaze, c), configs))
    return [generate(lm, gaze, c) for c in configs]
