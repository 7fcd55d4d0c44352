"""
Command line interface for the Gaze-Guided Generation Service

Exit codes: 0 success, 2 input or validation error, 3 numeric failure.
"""

import argparse
import json
import logging
import os
import sys
from typing import Dict, List, Optional, Sequence
import pandas as pd
from pydantic import ValidationError
from .config.settings import settings
from .core.exceptions import GazeGenError, InputValidationError
from .models.decoding import DecoderConfig
from .services.analysis_service import (analyze_observations, grouped_mean_sem, load_observations,
                                        load_prevalence, load_ratings, summaries_frame)
from .services.decoder_service import exhaustive_generate, generate, generate_sweep
from .services.gaze_model_service import (LinearGazePredictor, evaluate_gaze_model, fit_gaze_model,
                                          load_gaze_model, records_from_measures, save_gaze_model, split_by_text)
from .services.lm_service import NGramScorer, load_ngram, save_ngram, train_ngram_from_texts
from .services.measures_service import (extract_directory, observations_frame, quality_frame, read_measures,
                                        write_measures)
from .services.metrics_service import (build_lexicon, generation_stats_frame, load_lexicon, save_lexicon,
                                       summarize_generations)
from .services.simulation_service import WORDS_PER_PAGE, simulate_study
from .utils.file_utils import ensure_file_exists, read_jsonl, read_text_lines, write_csv, write_jsonl

logger = logging.getLogger("app.cli")


def load_prompts(file_path: str) -> List[str]:
    """Prompts from a JSON list of strings or a text file with one prompt per line"""
    ensure_file_exists(file_path)
    if file_path.endswith(".json"):
        with open(file_path, "r", encoding="utf-8") as f:
            try:
                prompts = json.load(f)
            except (json.JSONDecodeError, UnicodeDecodeError) as e:
                raise InputValidationError(f"{file_path}: {e}")
        if not isinstance(prompts, list) or not all(isinstance(p, str) for p in prompts):
            raise InputValidationError(f"{file_path}: expected a JSON list of strings")
        return prompts
    return read_text_lines(file_path)


def load_texts(file_path: str) -> List[Dict]:
    """Texts to simulate: generation records (.jsonl) or plain text lines"""
    if file_path.endswith(".jsonl"):
        return [
            {"text_id": f"gen{n:03d}", "text": r["text"], "gaze_weight": r.get("gaze_weight")}
            for n, r in enumerate(read_jsonl(file_path))
        ]
    return [{"text_id": f"text{n:03d}", "text": t} for n, t in enumerate(read_text_lines(file_path))]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_train_lm(args: argparse.Namespace) -> int:
    texts = read_text_lines(args.corpus)
    model = train_ngram_from_texts(texts, order=args.order, alpha=args.alpha, num_merges=args.merges)
    save_ngram(model, args.out)
    logger.info(f"Language model written to {args.out}")
    return 0


def cmd_build_lexicon(args: argparse.Namespace) -> int:
    texts: List[str] = []
    for path in args.corpus:
        texts.extend(read_text_lines(path))
    lexicon = build_lexicon(texts)
    save_lexicon(lexicon, args.out)
    logger.info(f"Lexicon with {len(lexicon.counts)} words ({lexicon.total} tokens) written to {args.out}")
    return 0


def cmd_train_gaze(args: argparse.Namespace) -> int:
    lexicon = load_lexicon(args.lexicon)
    rows = records_from_measures(read_measures(args.measures), lexicon, include_skipped=args.include_skipped)
    train_rows, test_rows = split_by_text(rows, args.test_fraction, seed=args.seed)
    model = fit_gaze_model(train_rows)
    save_gaze_model(model, args.out)
    logger.info(f"Gaze model fitted on {len(train_rows)} words, written to {args.out}")
    if test_rows:
        metrics, correlations = evaluate_gaze_model(model, test_rows)
        logger.info(f"Held-out words {metrics.n}: MSE {metrics.mse:.3f}, MAE {metrics.mae:.3f}, R2 {metrics.r2:.3f}, "
                    f"r {correlations[0].r:.3f}")
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    lm = NGramScorer(load_ngram(args.lm))
    gaze: Optional[LinearGazePredictor] = None
    if args.gaze_model:
        if not args.lexicon:
            raise InputValidationError("--gaze-model needs --lexicon")
        gaze = LinearGazePredictor(load_gaze_model(args.gaze_model), load_lexicon(args.lexicon))

    prompts = load_prompts(args.prompts) if args.prompts else [args.prompt]
    base = DecoderConfig(top_k=args.top_k, beam_size=args.beam_size, max_tokens=args.max_tokens,
                         defer_incomplete_word=args.defer_incomplete_word)
    if args.exhaustive:
        results = [
            exhaustive_generate(lm, gaze, DecoderConfig(**{**base.model_dump(), "prompt": p, "gaze_weight": w}))
            for p in prompts for w in args.gaze_weight
        ]
    else:
        results = generate_sweep(lm, gaze, prompts, args.gaze_weight, base, workers=args.workers)

    records = [r.model_dump(exclude={"token_ids"} if not args.with_token_ids else None) for r in results]
    if args.out:
        write_jsonl(records, args.out)
    else:
        for record in records:
            sys.stdout.write(json.dumps(record, sort_keys=True) + "\n")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    lexicon = load_lexicon(args.lexicon)
    texts = load_texts(args.texts)
    simulate_study(texts, lexicon, args.out_dir, n_readers=args.readers, seed=args.seed,
                   words_per_page=args.words_per_page, blink_rate=args.blink_rate)
    return 0


def cmd_extract_measures(args: argparse.Namespace) -> int:
    records, observations, report = extract_directory(args.trials, strict_first_pass=args.strict_first_pass)
    write_measures(records, args.out)
    if args.observations:
        write_csv(observations_frame(observations), args.observations)
    if args.quality:
        write_csv(quality_frame(report), args.quality)
    logger.info(f"Data loss {report.loss_percent:.2f}% (readers {report.loss_percent_min:.2f}-"
                f"{report.loss_percent_max:.2f}%), {report.trials_removed} trials removed")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    lexicon = load_lexicon(args.lexicon)
    if args.texts.endswith(".jsonl"):
        records = read_jsonl(args.texts)
    else:
        records = [{"text": t, "token_score": 0.0, "gaze_score": 0.0} for t in read_text_lines(args.texts)]
    stats = generation_stats_frame(records, lexicon, require_mtld=not args.allow_short_texts)
    write_csv(stats, args.out)
    if args.summary:
        write_csv(summarize_generations(stats), args.summary)
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    prevalence = load_prevalence(args.prevalence) if args.prevalence else None
    observations = load_observations(args.observations, prevalence)
    os.makedirs(args.out_dir, exist_ok=True)

    logger.info("Reader intercepts are estimated as fixed effects approximating random intercepts")
    write_csv(analyze_observations(observations), os.path.join(args.out_dir, "coefficients.csv"))
    fprt = summaries_frame(grouped_mean_sem(observations, ["group", "gaze_weight"], "fprt_ms"),
                           extra={"statistic": "fprt_ms"})
    write_csv(fprt, os.path.join(args.out_dir, "fprt_summary.csv"))
    if args.ratings:
        ratings = load_ratings(args.ratings)
        summary = summaries_frame(grouped_mean_sem(ratings, ["group", "dimension", "gaze_weight"], "rating"),
                                  extra={"statistic": "rating"})
        write_csv(summary, os.path.join(args.out_dir, "ratings_summary.csv"))
    return 0


def cmd_eval_gaze(args: argparse.Namespace) -> int:
    lexicon = load_lexicon(args.lexicon)
    model = load_gaze_model(args.gaze_model)
    rows = records_from_measures(read_measures(args.measures), lexicon)
    prevalence = load_prevalence(args.prevalence) if args.prevalence else None
    metrics, correlations = evaluate_gaze_model(model, rows, prevalence=prevalence, n_buckets=args.buckets)

    table = [
        {"statistic": name, "bucket": "overall", "n": metrics.n, "value": getattr(metrics, name),
         "ci_low": None, "ci_high": None}
        for name in ("mse", "mae", "r2")
    ]
    table.extend(
        {"statistic": "pearson_r", "bucket": c.bucket, "n": c.n, "value": c.r, "ci_low": c.ci_low, "ci_high": c.ci_high}
        for c in correlations
    )
    write_csv(pd.DataFrame(table), args.out)
    logger.info(f"Gaze model on {metrics.n} words: MSE {metrics.mse:.3f}, MAE {metrics.mae:.3f}, R2 {metrics.r2:.3f}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def create_parser() -> argparse.ArgumentParser:
    """Create argument parser"""
    parser = argparse.ArgumentParser(
        prog="python -m app",
        description="Gaze-guided text generation: train, generate, extract reading measures, analyze"
    )
    parser.add_argument("--log-level", default=settings.LOG_LEVEL,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], type=str.upper,
                        help="Logging level (default from GAZEGEN_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-lm", help="Train the BPE tokenizer and n-gram language model")
    p.add_argument("--corpus", default=settings.CORPUS_FILE, help="Corpus, one sequence per line")
    p.add_argument("--order", type=int, default=settings.LM_ORDER)
    p.add_argument("--alpha", type=float, default=settings.LM_ALPHA, help="Add-alpha smoothing constant")
    p.add_argument("--merges", type=int, default=settings.BPE_MERGES, help="Number of BPE merges")
    p.add_argument("--out", default=settings.get_lm_path())
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("build-lexicon", help="Count word frequencies for Zipf scores")
    p.add_argument("--corpus", nargs="+", default=[settings.CORPUS_FILE])
    p.add_argument("--out", default=settings.get_lexicon_path())
    p.set_defaults(func=cmd_build_lexicon)

    p = sub.add_parser("train-gaze", help="Fit the linear gaze model on a measure CSV")
    p.add_argument("--measures", required=True)
    p.add_argument("--lexicon", default=settings.get_lexicon_path())
    p.add_argument("--out", default=settings.get_gaze_model_path())
    p.add_argument("--test-fraction", type=float, default=settings.GAZE_TEST_FRACTION,
                   help="Share of texts held out for evaluation (0 trains on all)")
    p.add_argument("--include-skipped", action="store_true", help="Train on skipped words as 0 ms")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_gaze)

    p = sub.add_parser("generate", help="Guided beam search, one JSON line per (prompt, weight)")
    p.add_argument("--lm", default=settings.get_lm_path())
    p.add_argument("--gaze-model", default=None, help="Omit to decode on token scores only")
    p.add_argument("--lexicon", default=None)
    source = p.add_mutually_exclusive_group()
    source.add_argument("--prompt", default="")
    source.add_argument("--prompts", default=None, help="JSON list or text file of prompts")
    p.add_argument("--gaze-weight", type=float, nargs="+", default=[0.0])
    p.add_argument("--top-k", type=int, default=settings.DEFAULT_TOP_K)
    p.add_argument("--beam-size", type=int, default=settings.DEFAULT_BEAM_SIZE)
    p.add_argument("--max-tokens", type=int, default=settings.DEFAULT_MAX_TOKENS)
    p.add_argument("--defer-incomplete-word", action="store_true",
                   help="Score a word only once a later token completes it")
    p.add_argument("--exhaustive", action="store_true", help="Exact search (tiny vocabularies only)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--with-token-ids", action="store_true")
    p.add_argument("--out", default=None, help="JSON-lines output (stdout when omitted)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="Write synthetic reading trials for texts")
    p.add_argument("--texts", required=True, help="Generation records (.jsonl) or text lines")
    p.add_argument("--lexicon", default=settings.get_lexicon_path())
    p.add_argument("--out-dir", required=True)
    p.add_argument("--readers", type=int, default=4)
    p.add_argument("--words-per-page", type=int, default=WORDS_PER_PAGE)
    p.add_argument("--blink-rate", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("extract-measures", help="Samples -> fixations -> FPRT/go-past per word")
    p.add_argument("--trials", required=True, help="Directory of trial metadata JSON files")
    p.add_argument("--out", required=True, help="Measure CSV")
    p.add_argument("--observations", default=None, help="Analysis rows CSV for trials with group and weight")
    p.add_argument("--quality", default=None, help="Data quality CSV")
    p.add_argument("--strict-first-pass", action="store_true", default=settings.STRICT_FIRST_PASS)
    p.set_defaults(func=cmd_extract_measures)

    p = sub.add_parser("stats", help="Readability statistics per text")
    p.add_argument("--texts", required=True, help="Generation records (.jsonl) or text lines")
    p.add_argument("--lexicon", default=settings.get_lexicon_path())
    p.add_argument("--out", required=True)
    p.add_argument("--summary", default=None, help="Mean/SEM per gaze weight (long format)")
    p.add_argument("--allow-short-texts", action="store_true", help="Report MTLD as empty instead of failing")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("analyze", help="FPRT regressions with reader intercepts and grouped summaries")
    p.add_argument("--observations", required=True)
    p.add_argument("--prevalence", default=None, help="word<TAB>prevalence TSV")
    p.add_argument("--ratings", default=None)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("eval-gaze", help="MSE/MAE/R2 and bucketed Pearson r of a gaze model")
    p.add_argument("--gaze-model", default=settings.get_gaze_model_path())
    p.add_argument("--measures", required=True)
    p.add_argument("--lexicon", default=settings.get_lexicon_path())
    p.add_argument("--prevalence", default=None)
    p.add_argument("--buckets", type=int, default=settings.PREVALENCE_BUCKETS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_gaze)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    parser = create_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=settings.LOG_FORMAT,
                        stream=sys.stderr, force=True)
    try:
        return args.func(args)
    except GazeGenError as e:
        logger.error(f"{args.command} failed: {e}")
        return e.exit_code
    except ValidationError as e:
        logger.error(f"{args.command} failed: invalid parameters: {e}")
        return InputValidationError.exit_code
