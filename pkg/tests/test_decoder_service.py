import json
import logging
import math
import numpy as np
import pytest
from pydantic import ValidationError
from app.core.exceptions import SearchSpaceError
from app.models.decoding import CandidateSequence, DecoderConfig
from app.services.decoder_service import (beam_step, exhaustive_generate, generate, generate_sweep,
                                          top_k_tokens, total_score)
from app.services.text_service import word_surfaces
from tests.fakes import ContextGaze, LengthGaze, TableLM

PIECE_SETS = [
    [" a", "b", " cc"],
    [" the", " ox", "en"],
    [" go", "ne", " x", " run"],
    [" i", " am", "ber"],
]
WEIGHTS = [-2.0, -1.0, 0.0, 1.0, 2.0]


def _instances(n=100):
    for seed in range(n):
        pieces = PIECE_SETS[seed % len(PIECE_SETS)]
        gaze = LengthGaze() if seed % 2 == 0 else ContextGaze()
        yield TableLM(pieces, seed), gaze


def _path_token_score(lm, token_ids):
    score = 0.0
    for i, token in enumerate(token_ids):
        score += float(lm.next_token_logprobs(list(token_ids[:i]))[token])
    return score


def test_full_beam_matches_exhaustive_search():
    max_tokens = 3
    for lm, gaze in _instances():
        vocab = lm.vocab_size()
        for weight in (-2.0, 0.0, 2.0):
            config = DecoderConfig(top_k=vocab, beam_size=vocab ** max_tokens, max_tokens=max_tokens,
                                   gaze_weight=weight)
            beam = generate(lm, gaze, config)
            exact = exhaustive_generate(lm, gaze, config)
            assert beam.token_ids == exact.token_ids
            assert beam.total_score == exact.total_score


def test_beam_result_is_a_sound_candidate():
    for lm, gaze in _instances(40):
        config = DecoderConfig(top_k=2, beam_size=2, max_tokens=4, gaze_weight=1.5)
        result = generate(lm, gaze, config)
        exact = exhaustive_generate(lm, gaze, config)
        assert result.total_score <= exact.total_score + 1e-9
        assert math.isclose(result.token_score, _path_token_score(lm, result.token_ids), abs_tol=1e-9)
        assert math.isclose(result.gaze_score, gaze.score_sequence(word_surfaces(result.text)), abs_tol=1e-9)
        assert math.isclose(result.total_score, result.token_score + 1.5 * result.gaze_score, abs_tol=1e-9)
        if result.finish_reason == "eos":
            assert result.token_ids[-1] == lm.eos_id
        else:
            assert result.finish_reason == "length" and result.n_tokens == 4


def test_gaze_score_of_optimum_grows_with_weight():
    for lm, gaze in _instances():
        gaze_scores = []
        token_scores = {}
        for weight in WEIGHTS:
            result = exhaustive_generate(lm, gaze, DecoderConfig(max_tokens=3, gaze_weight=weight))
            gaze_scores.append(result.gaze_score)
            token_scores[weight] = result.token_score
        for lower, higher in zip(gaze_scores, gaze_scores[1:]):
            assert higher >= lower - 1e-9
        assert all(token_scores[0.0] >= score - 1e-9 for score in token_scores.values())


def test_zero_weight_ignores_gaze_model():
    for lm, gaze in _instances(30):
        config = DecoderConfig(top_k=2, beam_size=3, max_tokens=5, gaze_weight=0.0)
        guided = generate(lm, gaze, config)
        plain = generate(lm, None, config)
        assert guided.text == plain.text
        assert guided.token_ids == plain.token_ids
        assert guided.total_score == guided.token_score


def test_greedy_decoding_follows_most_probable_token():
    lm = TableLM([" a", "b", " cc"], seed=11)
    result = generate(lm, None, DecoderConfig(top_k=1, beam_size=1, max_tokens=6))
    context = []
    while len(context) < 6:
        logprobs = lm.next_token_logprobs(context)
        token = int(max(range(lm.vocab_size()), key=lambda t: (logprobs[t], -t)))
        context.append(token)
        if token == lm.eos_id:
            break
    assert result.token_ids == context
    assert len(result.trace) == len(context)


def test_masked_tokens_are_never_emitted():
    for seed in range(20):
        lm = TableLM([" a", "b", " cc"], seed, masked=[2])
        config = DecoderConfig(top_k=4, beam_size=8, max_tokens=4, gaze_weight=1.0)
        assert 2 not in generate(lm, LengthGaze(), config).token_ids
        assert 2 not in exhaustive_generate(lm, LengthGaze(), config).token_ids


def test_top_k_tokens_breaks_ties_by_id():
    import numpy as np
    logprobs = np.log(np.array([0.1, 0.3, 0.3, 0.3]))
    assert top_k_tokens(logprobs, [0, 1, 2, 3], 2) == [1, 2]
    logprobs[1] = -np.inf
    assert top_k_tokens(logprobs, [0, 1, 2, 3], 5) == [2, 3, 0]


def test_exhaustive_search_guard():
    lm = TableLM([" a", "b", " cc"], seed=0)
    with pytest.raises(SearchSpaceError):
        exhaustive_generate(lm, None, DecoderConfig(max_tokens=12))
    with pytest.raises(SearchSpaceError):
        exhaustive_generate(lm, None, DecoderConfig(max_tokens=3), limit=63)


def test_weight_outside_limit_is_rejected():
    with pytest.raises(ValidationError):
        DecoderConfig(gaze_weight=5.5)
    with pytest.raises(ValidationError):
        DecoderConfig(gaze_weight=-5.5)
    assert DecoderConfig(gaze_weight=5.0).gaze_weight == 5.0


def test_large_weight_logs_warning(caplog):
    lm = TableLM([" a", "b", " cc"], seed=3)
    with caplog.at_level(logging.WARNING, logger="app.services.decoder_service"):
        generate(lm, LengthGaze(), DecoderConfig(max_tokens=3, gaze_weight=4.0))
    assert "expect repetitive output" in caplog.text
    caplog.clear()
    with caplog.at_level(logging.WARNING, logger="app.services.decoder_service"):
        generate(lm, LengthGaze(), DecoderConfig(max_tokens=3, gaze_weight=3.0))
    assert "expect repetitive output" not in caplog.text


def test_completing_token_revises_word_prediction():
    lm = TableLM([" ab", "cd", " e"], seed=5)
    parent = CandidateSequence(token_ids=(1,), words=("ab",), token_score=-1.0, gaze_score=-1.0)
    config = DecoderConfig(top_k=4, beam_size=16, max_tokens=5, gaze_weight=1.0)
    children = {c.token_ids: c for c in beam_step([parent], lm, LengthGaze(), config)}
    joined = children[(1, 2)]
    assert joined.words == ("abcd",)
    assert joined.gaze_score == 1.0
    assert children[(1, 3)].words == ("ab", "e")
    assert children[(1, 3)].gaze_score == -3.0
    assert children[(1, 0)].finished and children[(1, 0)].finish_reason == "eos"


def test_deferred_scoring_skips_open_word():
    lm = TableLM([" ab", "cd", " e"], seed=5)
    parent = CandidateSequence(token_ids=(1,), words=("ab",), token_score=-1.0)
    config = DecoderConfig(top_k=4, beam_size=16, max_tokens=5, gaze_weight=1.0, defer_incomplete_word=True)
    children = {c.token_ids: c for c in beam_step([parent], lm, LengthGaze(), config)}
    assert children[(1, 2)].gaze_score == 0.0
    assert children[(1, 3)].gaze_score == -1.0
    assert children[(1, 0)].gaze_score == -1.0


def test_finished_beams_compete_with_expansions():
    lm = TableLM([" a", "b", " cc"], seed=2)
    done = CandidateSequence(token_ids=(0,), token_score=-0.01, finished=True, finish_reason="eos")
    open_beam = CandidateSequence(token_ids=(1,), words=("a",), token_score=-5.0)
    beams = beam_step([done, open_beam], lm, None, DecoderConfig(top_k=4, beam_size=2, max_tokens=5))
    assert beams[0] == done
    assert all(total_score(b, 0.0) <= done.token_score for b in beams[1:])


def test_prompt_conditions_continuation():
    lm = TableLM([" a", "b", " cc"], seed=9)
    config = DecoderConfig(top_k=1, beam_size=1, max_tokens=1, prompt="cc")
    result = generate(lm, None, config)
    logprobs = lm.next_token_logprobs([3])
    assert result.token_ids == [int(max(range(4), key=lambda t: (logprobs[t], -t)))]
    assert result.prompt == "cc"


def test_sweep_keeps_prompt_major_order():
    lm = TableLM([" a", "b", " cc"], seed=4)
    base = DecoderConfig(top_k=2, beam_size=2, max_tokens=4)
    prompts = ["a", "cc"]
    weights = [-1.0, 0.0, 1.0]
    parallel = generate_sweep(lm, ContextGaze(), prompts, weights, base, workers=2)
    sequential = generate_sweep(lm, ContextGaze(), prompts, weights, base)
    assert [(r.prompt, r.gaze_weight) for r in parallel] == [(p, w) for p in prompts for w in weights]
    assert [r.text for r in parallel] == [r.text for r in sequential]


def test_zero_weight_matches_plain_decoding_on_corpus_prompts(corpus_lm, corpus_texts):
    rng = np.random.default_rng(20)
    lines = rng.choice(len(corpus_texts), size=20, replace=False)
    prompts = [" ".join(word_surfaces(corpus_texts[i])[:int(rng.integers(2, 6))]) for i in lines]
    kept = {"prompt", "text", "token_ids", "token_score", "total_score", "n_tokens", "n_words", "finish_reason"}
    for prompt in prompts:
        config = DecoderConfig(prompt=prompt, gaze_weight=0.0, max_tokens=12)
        guided = generate(corpus_lm, LengthGaze(), config).model_dump(include=kept)
        plain = generate(corpus_lm, None, config).model_dump(include=kept)
        assert json.dumps(guided, sort_keys=True) == json.dumps(plain, sort_keys=True), prompt
