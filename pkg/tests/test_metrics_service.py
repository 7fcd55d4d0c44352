import math
import numpy as np
import pandas as pd
import pytest
from app.core.exceptions import FileFormatError, InputValidationError, InsufficientRepetitionError
from app.models.metrics import FrequencyLexicon
from app.services.metrics_service import (build_lexicon, compute_text_stats, count_syllables, fkgl,
                                          generation_stats_frame, load_lexicon, mtld, mtld_tokens,
                                          save_lexicon, summarize_generations, zipf_score)

MTLD_FIXTURE = "the cat sat on the mat the dog sat on the rug"


def test_zipf_formula_cases():
    lexicon = FrequencyLexicon(counts={"often": 100, "rare": 1}, total=1_000_000)
    assert zipf_score("often", lexicon) == (pytest.approx(5.0, abs=1e-12), True)
    assert zipf_score("Rare!", lexicon) == (pytest.approx(3.0, abs=1e-12), True)
    assert zipf_score("unseen", lexicon) == (1.0, False)


def test_zipf_monotone_and_scale_free():
    rng = np.random.default_rng(0)
    for _ in range(100):
        count = int(rng.integers(1, 1000))
        total = int(rng.integers(1000, 10 ** 6))
        factor = int(rng.integers(2, 50))
        base = FrequencyLexicon(counts={"w": count, "x": count + 1}, total=total)
        scaled = FrequencyLexicon(counts={"w": count * factor}, total=total * factor)
        assert zipf_score("w", base)[0] == pytest.approx(zipf_score("w", scaled)[0], abs=1e-12)
        assert zipf_score("x", base)[0] > zipf_score("w", base)[0]


def test_mtld_hand_traced_fixture():
    tokens = MTLD_FIXTURE.split()
    assert mtld(tokens) == pytest.approx(12.0, abs=1e-12)
    assert mtld(list(reversed(tokens))) == pytest.approx(12.0, abs=1e-12)


def test_mtld_direction_symmetry():
    rng = np.random.default_rng(1)
    vocabulary = [f"w{i}" for i in range(12)]
    for _ in range(100):
        tokens = rng.choice(vocabulary, size=int(rng.integers(30, 80))).tolist()
        assert mtld(tokens) == pytest.approx(mtld(tokens[::-1]), abs=1e-9)


def test_mtld_needs_repetition():
    with pytest.raises(InsufficientRepetitionError):
        mtld([f"w{i}" for i in range(20)])
    with pytest.raises(InsufficientRepetitionError):
        mtld(["a", "a", "a"])


def test_mtld_tokens_use_clean_forms():
    assert mtld_tokens("The cat, the CAT!") == ["the", "cat", "the", "cat"]


@pytest.mark.parametrize("word,expected", [
    ("cat", 1), ("make", 1), ("readable", 3), ("table", 2), ("the", 1), ("rhythm", 1), ("Cat.", 1),
    ("agree", 1), ("canoe", 1), ("whale", 1),
])
def test_count_syllables(word, expected):
    assert count_syllables(word) == expected


def test_fkgl_fixture():
    assert fkgl("The cat sat.") == pytest.approx(-2.62, abs=0.01)


def test_fkgl_ratio_invariance_and_monotonicity():
    rng = np.random.default_rng(2)
    short_words = ["cat", "dog", "sat", "ran", "fox"]
    long_words = ["elephant", "umbrella", "tomato", "potato", "banana"]
    for _ in range(100):
        sentences = []
        for _ in range(int(rng.integers(1, 5))):
            sentences.append(" ".join(rng.choice(short_words, size=int(rng.integers(3, 9)))) + ".")
        text = " ".join(sentences)
        assert fkgl(text + " " + text) == pytest.approx(fkgl(text), abs=1e-9)
        if "cat" in text:
            assert fkgl(text.replace("cat", "elephant")) > fkgl(text)
    assert fkgl("The banana sat.") > fkgl("The cat sat.")
    assert fkgl(" ".join(long_words) + ".") > fkgl(" ".join(short_words) + ".")


def test_fkgl_rejects_empty_text():
    with pytest.raises(InputValidationError):
        fkgl("   ")


def test_text_stats(tiny_texts):
    lexicon = build_lexicon(tiny_texts)
    stats = compute_text_stats("The cat sat on the mat. The dog sat on the rug.", lexicon)
    assert stats.word_count == 12
    assert stats.sentence_count == 2
    assert stats.mean_sentence_length == 6.0
    assert stats.mean_word_length == pytest.approx(3.0)
    assert stats.mtld == pytest.approx(12.0)
    assert stats.unknown_word_count == 0

    with_unknown = compute_text_stats("The zebra sat on the mat. The dog sat on the rug.", lexicon)
    assert with_unknown.unknown_word_count == 1
    known = [zipf_score(w, lexicon)[0] for w in "The sat on the mat. The dog sat on the rug.".split()]
    assert with_unknown.mean_zipf == pytest.approx(sum(known) / len(known))


def test_text_stats_short_text(tiny_texts):
    lexicon = build_lexicon(tiny_texts)
    with pytest.raises(InsufficientRepetitionError):
        compute_text_stats("The cat sat.", lexicon)
    stats = compute_text_stats("The cat sat.", lexicon, require_mtld=False)
    assert stats.mtld is None
    assert stats.fkgl == pytest.approx(-2.62, abs=0.01)
    with pytest.raises(InputValidationError):
        compute_text_stats("", lexicon)


def test_lexicon_round_trip(tmp_path, tiny_texts):
    lexicon = build_lexicon(tiny_texts)
    assert lexicon.counts["the"] == 5
    assert lexicon.counts["mat"] == 2
    assert lexicon.total == sum(len(t.split()) for t in tiny_texts)
    path = str(tmp_path / "lexicon.tsv")
    save_lexicon(lexicon, path)
    loaded = load_lexicon(path)
    assert loaded.counts == lexicon.counts and loaded.total == lexicon.total
    assert math.isclose(loaded.mean_zipf, lexicon.mean_zipf)


def test_lexicon_keeps_quotes_and_null_words(tmp_path):
    path = tmp_path / "lexicon.tsv"
    path.write_text("#total:100\n\"quoted\t3\nnull\t4\nNA\t5\n")
    lexicon = load_lexicon(str(path))
    assert lexicon.counts == {"\"quoted": 3, "null": 4, "NA": 5}
    assert lexicon.total == 100


def test_lexicon_file_errors(tmp_path):
    path = tmp_path / "lexicon.tsv"
    path.write_text("the\t10\ncat\t2\n")
    assert load_lexicon(str(path)).total == 12
    path.write_text("the 10\n")
    with pytest.raises(FileFormatError):
        load_lexicon(str(path))
    path.write_text("the\tmany\n")
    with pytest.raises(FileFormatError):
        load_lexicon(str(path))
    path.write_text("#total:many\nthe\t10\n")
    with pytest.raises(FileFormatError):
        load_lexicon(str(path))
    path.write_text("the\t10\tx\n")
    with pytest.raises(FileFormatError):
        load_lexicon(str(path))
    path.write_bytes(b"the\t10\n\xff\t2\n")
    with pytest.raises(FileFormatError):
        load_lexicon(str(path))
    with pytest.raises(InputValidationError):
        build_lexicon(["", "  "])


def test_generation_summary(tiny_texts):
    lexicon = build_lexicon(tiny_texts)
    records = [
        {"prompt": "p", "gaze_weight": -2.0, "text": "the cat sat on the mat.", "token_score": -6.0,
         "gaze_score": -1.5, "n_tokens": 6, "n_words": 6},
        {"prompt": "q", "gaze_weight": -2.0, "text": "the dog sat on the rug.", "token_score": -9.0,
         "gaze_score": -3.0, "n_tokens": 6, "n_words": 6},
        {"prompt": "p", "gaze_weight": 2.0, "text": "a cat and a dog met on the mat.", "token_score": -12.0,
         "gaze_score": 2.0, "n_tokens": 9, "n_words": 9},
    ]
    stats = generation_stats_frame(records, lexicon, require_mtld=False)
    assert stats["token_score_per_token"].tolist() == [-1.0, -1.5, -12.0 / 9]
    summary = summarize_generations(stats)
    assert "mtld" not in set(summary["statistic"])
    per_token = summary[summary["statistic"] == "token_score_per_token"].reset_index(drop=True)
    assert per_token["gaze_weight"].tolist() == [-2.0, 2.0]
    assert per_token["mean"][0] == pytest.approx(-1.25)
    assert per_token["sem"][0] == pytest.approx(0.25)
    assert per_token["n"].tolist() == [2, 1]
    assert pd.isna(per_token["sem"][1])
