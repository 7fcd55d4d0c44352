import numpy as np
import pandas as pd
import pytest
from app.core.exceptions import FileFormatError, InputValidationError, RankDeficiencyError, ZeroVarianceError
from app.services.analysis_service import (analyze_observations, fit_reader_intercept_ols, grouped_mean_sem,
                                           load_observations, load_prevalence, pearson_r, regression_metrics,
                                           resolve_formula)

WEIGHT_EFFECTS = {-2.0: -10.0, 0.0: 0.0, 2.0: 30.0}


def _weight_rows(rng, n_readers=12, rows_per_reader=500, noise=5.0):
    offsets = rng.normal(0.0, 20.0, n_readers)
    offsets -= offsets.mean()
    frames = []
    for reader, offset in enumerate(offsets):
        weights = rng.choice([-2.0, 0.0, 2.0], size=rows_per_reader)
        effect = np.array([WEIGHT_EFFECTS[w] for w in weights])
        frames.append(pd.DataFrame({
            "reader_id": f"r{reader:02d}",
            "gaze_weight": weights,
            "word_index": np.arange(rows_per_reader),
            "fprt_ms": 100.0 + effect + offset + rng.normal(0.0, noise, rows_per_reader),
            "word_length": rng.integers(1, 12, size=rows_per_reader),
        }))
    return pd.concat(frames, ignore_index=True)


def _lexical_rows(rng, n_readers=6, rows_per_reader=200, noise=10.0):
    frames = []
    for reader in range(n_readers):
        length = rng.integers(1, 13, size=rows_per_reader)
        prevalence = rng.uniform(0.5, 3.0, size=rows_per_reader)
        frames.append(pd.DataFrame({
            "reader_id": f"r{reader}",
            "group": "L1" if reader % 2 == 0 else "L2",
            "gaze_weight": rng.choice([-2.0, 0.0, 2.0], size=rows_per_reader),
            "word_index": np.arange(rows_per_reader),
            "fprt_ms": 150.0 + 12.0 * length - 20.0 * prevalence + 5.0 * reader + rng.normal(0, noise, rows_per_reader),
            "word_length": length,
            "word_prevalence": prevalence,
        }))
    return pd.concat(frames, ignore_index=True)


def test_confidence_intervals_cover_true_effects():
    truth = {"intercept": 100.0, "gaze_weight[-2]": -10.0, "gaze_weight[+2]": 30.0}
    covered = {name: 0 for name in truth}
    for seed in range(200):
        result = fit_reader_intercept_ols(_weight_rows(np.random.default_rng(seed)), "gaze_weight")
        for name, value in truth.items():
            coefficient = result.coefficient(name)
            if coefficient.ci_low <= value <= coefficient.ci_high:
                covered[name] += 1
    assert all(count >= 180 for count in covered.values()), covered


def test_zero_noise_recovers_effects():
    rows = _weight_rows(np.random.default_rng(0), n_readers=4, rows_per_reader=50, noise=0.0)
    result = fit_reader_intercept_ols(rows, "fprt ~ gaze_weight + (1|reader)")
    assert result.coefficient("intercept").estimate == pytest.approx(100.0, abs=1e-6)
    assert result.coefficient("gaze_weight[-2]").estimate == pytest.approx(-10.0, abs=1e-6)
    assert result.coefficient("gaze_weight[+2]").estimate == pytest.approx(30.0, abs=1e-6)
    assert result.r_squared == pytest.approx(1.0)
    assert result.n_readers == 4 and len(result.reader_intercepts) == 4
    assert np.mean(list(result.reader_intercepts.values())) == pytest.approx(100.0, abs=1e-6)


def test_lexical_effect_signs():
    result = fit_reader_intercept_ols(_lexical_rows(np.random.default_rng(1)), "baseline")
    assert result.coefficient("word_length").estimate > 0
    assert result.coefficient("word_prevalence").estimate < 0
    assert result.coefficient("word_length").p_value < 0.001
    for coefficient in result.coefficients:
        assert coefficient.ci_low <= coefficient.estimate <= coefficient.ci_high


def test_constant_shift_moves_intercept_only():
    rows = _lexical_rows(np.random.default_rng(2))
    base = fit_reader_intercept_ols(rows, "full")
    shifted = fit_reader_intercept_ols(rows.assign(fprt_ms=rows["fprt_ms"] + 50.0), "full")
    for before, after in zip(base.coefficients, shifted.coefficients):
        if before.name == "intercept":
            assert after.estimate == pytest.approx(before.estimate + 50.0, abs=1e-9)
        else:
            assert after.estimate == pytest.approx(before.estimate, abs=1e-9)


def test_adding_predictors_never_lowers_r_squared():
    rows = _lexical_rows(np.random.default_rng(3))
    narrow = fit_reader_intercept_ols(rows, "gaze_weight")
    wide = fit_reader_intercept_ols(rows, "full")
    assert wide.r_squared >= narrow.r_squared - 1e-12


def test_rank_deficiency_names_column():
    rows = _lexical_rows(np.random.default_rng(4)).assign(word_length=4)
    with pytest.raises(RankDeficiencyError) as info:
        fit_reader_intercept_ols(rows, "baseline")
    assert info.value.columns == ["word_length"]


def test_invalid_designs():
    rows = _lexical_rows(np.random.default_rng(5))
    with pytest.raises(InputValidationError):
        fit_reader_intercept_ols(rows[rows["reader_id"] == "r0"], "baseline")
    with pytest.raises(InputValidationError):
        fit_reader_intercept_ols(rows[rows["gaze_weight"] != 0.0], "gaze_weight")
    with pytest.raises(InputValidationError):
        resolve_formula("fprt ~ word_length")


def test_rows_without_prevalence_are_dropped():
    rows = _lexical_rows(np.random.default_rng(6))
    rows.loc[:9, "word_prevalence"] = np.nan
    result = fit_reader_intercept_ols(rows, "baseline")
    assert result.n_dropped == 10
    assert result.n_rows == len(rows) - 10


def test_pearson_exact_relations():
    pred = np.random.default_rng(7).normal(size=30)
    assert pearson_r(pred, 2 * pred + 1)[0].r == pytest.approx(1.0)
    assert pearson_r(pred, -pred)[0].r == pytest.approx(-1.0)


def test_pearson_matches_textbook_formula():
    rng = np.random.default_rng(8)
    for _ in range(20):
        pred, obs = rng.normal(size=50), rng.normal(size=50)
        expected = np.sum((pred - pred.mean()) * (obs - obs.mean())) / np.sqrt(
            np.sum((pred - pred.mean()) ** 2) * np.sum((obs - obs.mean()) ** 2))
        result = pearson_r(pred, obs)[0]
        assert result.r == pytest.approx(expected, abs=1e-12)
        assert result.n == 50
        assert result.ci_low < result.r < result.ci_high
        assert pearson_r(3 * pred + 7, obs)[0].r == pytest.approx(result.r, abs=1e-12)
        assert pearson_r(pred, -obs)[0].r == pytest.approx(-result.r, abs=1e-12)


def test_pearson_buckets_split_by_quantile():
    rng = np.random.default_rng(9)
    pred, obs = rng.normal(size=30), rng.normal(size=30)
    prevalence = np.arange(32, dtype=float)[:30]
    prevalence[0] = np.nan
    results = pearson_r(pred, obs, bucket_values=prevalence)
    assert [r.bucket for r in results] == ["overall", "low", "medium", "high"]
    assert [r.n for r in results] == [30, 10, 10, 9]
    assert results[1].r == pytest.approx(pearson_r(pred[1:11], obs[1:11])[0].r, abs=1e-12)


def test_pearson_zero_variance():
    with pytest.raises(ZeroVarianceError):
        pearson_r([1.0, 2.0, 3.0], [5.0, 5.0, 5.0])
    with pytest.raises(InputValidationError):
        pearson_r([1.0, 2.0], [1.0, 2.0])


def test_regression_metrics():
    perfect = regression_metrics([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert (perfect.mse, perfect.mae, perfect.r2) == (0.0, 0.0, 1.0)
    assert regression_metrics([2.5] * 4, [1.0, 2.0, 3.0, 4.0]).r2 == pytest.approx(0.0)
    hand = regression_metrics([1.0, 2.0, 2.0, 5.0], [1.0, 2.0, 3.0, 4.0])
    assert (hand.mse, hand.mae) == (0.5, 0.5)
    assert hand.r2 == pytest.approx(0.6)
    with pytest.raises(ZeroVarianceError):
        regression_metrics([1.0, 2.0], [3.0, 3.0])
    with pytest.raises(InputValidationError):
        regression_metrics([], [])


def test_grouped_mean_sem():
    rows = pd.DataFrame({"gaze_weight": [0.0, 0.0, 2.0], "fprt_ms": [4.0, 6.0, 9.0]})
    summaries = grouped_mean_sem(rows, ["gaze_weight"], "fprt_ms")
    assert [(s.keys["gaze_weight"], s.n, s.mean, s.sem) for s in summaries] == [
        ("0.0", 2, 5.0, pytest.approx(1.0)),
        ("2.0", 1, 9.0, None),
    ]


def test_analyze_observations_per_group(tmp_path):
    rows = _lexical_rows(np.random.default_rng(10))
    rows["word"] = [f"w{i % 7}" for i in range(len(rows))]
    path = tmp_path / "observations.csv"
    rows.drop(columns=["word_prevalence"]).to_csv(path, index=False)
    prevalence_path = tmp_path / "prevalence.tsv"
    prevalence_path.write_text("word\tprevalence\n" + "".join(f"w{i}\t{0.5 + i * 0.3}\n" for i in range(6)))

    plain = analyze_observations(load_observations(str(path)))
    assert set(plain["formula"]) == {"fprt ~ gaze_weight + (1|reader)"}
    assert set(plain["group"]) == {"L1", "L2", "all"}

    prevalence = load_prevalence(str(prevalence_path))
    assert prevalence["w2"] == pytest.approx(1.1)
    observations = load_observations(str(path), prevalence)
    assert observations["word_prevalence"].isna().sum() == (rows["word"] == "w6").sum()
    full = analyze_observations(observations)
    assert len(set(full["formula"])) == 3
    assert (full["n_dropped"][full["formula"] != "fprt ~ gaze_weight + (1|reader)"] > 0).all()
    assert {"estimate", "ci_low", "ci_high", "p_value", "r_squared_label"} <= set(full.columns)


def test_prevalence_file_format(tmp_path):
    path = tmp_path / "prevalence.tsv"
    path.write_text("# source: survey\nFox\t2.5\nnull\t1.0\n")
    assert load_prevalence(str(path)) == {"fox": 2.5, "null": 1.0}
    path.write_text("word\tprevalence\nfox\thigh\n")
    with pytest.raises(FileFormatError):
        load_prevalence(str(path))
    path.write_text("fox 2.5\n")
    with pytest.raises(FileFormatError):
        load_prevalence(str(path))
