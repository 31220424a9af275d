"""Edit distance, CER/MR scoring, and the prediction file round trip."""

from __future__ import annotations

import itertools
import json

import pytest

from platesynth.errors import EvaluationError
from platesynth.metrics import (
    EvalReport,
    cer,
    evaluate_predictions,
    evaluate_run,
    levenshtein,
    miss_rate,
    read_predictions,
    write_predictions,
)
from platesynth.splits import DatasetSplit


def _brute_force_distance(a: str, b: str) -> int:
    """Exponential reference via memoized recursion on prefixes."""
    memo: dict[tuple[int, int], int] = {}

    def rec(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        if (i, j) not in memo:
            cost = 0 if a[i - 1] == b[j - 1] else 1
            memo[(i, j)] = min(
                rec(i - 1, j) + 1, rec(i, j - 1) + 1, rec(i - 1, j - 1) + cost
            )
        return memo[(i, j)]

    return rec(len(a), len(b))


def test_levenshtein_textbook_pair():
    assert levenshtein("kitten", "sitting") == 3
    assert levenshtein("sitting", "kitten") == 3


def test_levenshtein_edges():
    assert levenshtein("", "") == 0
    assert levenshtein("", "abc") == 3
    assert levenshtein("abc", "") == 3
    assert levenshtein("abc", "abc") == 0


def test_levenshtein_exhaustive_small_alphabet():
    """Every pair of strings up to length 4 over {a, b} matches the oracle."""
    words = [""]
    for length in (1, 2, 3, 4):
        words += ["".join(w) for w in itertools.product("ab", repeat=length)]
    for a in words:
        for b in words:
            assert levenshtein(a, b) == _brute_force_distance(a, b)


def test_levenshtein_axioms(rng):
    alphabet = list("ABC123-")
    words = [
        "".join(rng.choice(alphabet, size=rng.integers(0, 9)))
        for _ in range(40)
    ]
    for a in words:
        assert levenshtein(a, a) == 0
    for a, b in itertools.combinations(words, 2):
        d = levenshtein(a, b)
        assert d == levenshtein(b, a)
        assert d >= abs(len(a) - len(b))
        assert d <= max(len(a), len(b))
        if a != b:
            assert d >= 1
    for a, b, c in itertools.combinations(words[:15], 3):
        assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


def test_cer_fixture():
    assert cer("B-AB124", "B-AB123") == pytest.approx(1 / 7)
    assert cer("", "ABCDEFGH") == 1.0
    assert cer("M-X1", "M-X1") == 0.0
    with pytest.raises(EvaluationError):
        cer("B-A1", "")


def test_miss_rate_fixture():
    assert miss_rate([True, True, True, False]) == 0.25
    assert miss_rate([True]) == 0.0
    with pytest.raises(EvaluationError):
        miss_rate([])


def _labels(count=8):
    return {f"synthetic/seq/{i:06d}": f"B-AB{100 + i}" for i in range(count)}


def test_evaluate_all_correct():
    labels = _labels()
    report = evaluate_predictions(dict(labels), labels)
    assert report.n_samples == len(labels)
    assert report.corpus_cer == 0.0
    assert report.macro_cer == 0.0
    assert report.miss_rate == 0.0
    assert report.n_true == len(labels)


def test_evaluate_missing_prediction_counts_as_empty():
    labels = _labels(4)
    predictions = dict(labels)
    dropped = sorted(labels)[0]
    del predictions[dropped]
    report = evaluate_predictions(predictions, labels)
    sample = next(s for s in report.samples if s.sample_id == dropped)
    assert sample.prediction == ""
    assert sample.distance == len(labels[dropped])
    assert report.miss_rate == 0.25


def test_evaluate_rejects_unknown_sample_id():
    labels = _labels(3)
    predictions = dict(labels)
    predictions["synthetic/seq/999999"] = "B-XY1"
    with pytest.raises(EvaluationError, match="unknown"):
        evaluate_predictions(predictions, labels)


def test_evaluate_rejects_empty_label():
    with pytest.raises(EvaluationError, match="empty"):
        evaluate_predictions({}, {"a": ""})
    with pytest.raises(EvaluationError, match="no reference"):
        evaluate_predictions({}, {})


def test_corpus_vs_macro_cer_disagree_on_mixed_lengths():
    labels = {"a": "AB", "b": "ABCDEFGH"}
    predictions = {"a": "XX", "b": "ABCDEFGH"}
    report = evaluate_predictions(predictions, labels)
    assert report.corpus_cer == pytest.approx(2 / 10)
    assert report.macro_cer == pytest.approx((1.0 + 0.0) / 2)


def test_large_benchmark_fixture():
    """647 8-char labels; 582 predictions 6 edits off, 65 predictions 5 off."""
    labels = {}
    predictions = {}
    for i in range(647):
        sample_id = f"real/cam/{i:06d}"
        label = f"HH-A{1000 + i}"  # 8 characters
        assert len(label) == 8
        labels[sample_id] = label
        wrong = 6 if i < 582 else 5
        predictions[sample_id] = "?" * wrong + label[wrong:]
    report = evaluate_predictions(predictions, labels, data_type="real")
    assert report.total_chars == 647 * 8
    assert report.total_distance == 582 * 6 + 65 * 5
    assert report.total_distance == 3817
    assert f"{report.corpus_cer * 100:.2f}%" == "73.74%"
    assert report.miss_rate == 1.0
    table = report.to_table()
    assert "corpus CER     73.74%" in table
    assert "miss rate MR   100.00%" in table


def test_report_table_subset_naming():
    labels = _labels(2)
    by_subset = evaluate_predictions(dict(labels), labels, subset_id=25)
    assert "(subset 25)" in by_subset.to_table()
    full = evaluate_predictions(dict(labels), labels, subset_id=100)
    assert "(subset full)" in full.to_table()
    unspecified = evaluate_predictions(dict(labels), labels)
    assert "(subset full)" in unspecified.to_table()


def test_report_json_is_deterministic_and_parses():
    labels = _labels(3)
    report = evaluate_predictions(dict(labels), labels)
    text = report.to_json()
    assert text == report.to_json()
    payload = json.loads(text)
    assert payload["n_samples"] == 3
    assert payload["samples"][0]["exact"] is True
    assert text.endswith("\n")


def test_predictions_file_round_trip(tmp_path):
    predictions = {"b/2": "M-X1", "a/1": "B-AB123"}
    path = tmp_path / "predictions.tsv"
    write_predictions(predictions, path)
    assert read_predictions(path) == predictions
    # Writes sorted by sample id.
    lines = path.read_text().splitlines()
    assert lines == ["a/1\tB-AB123", "b/2\tM-X1"]


def test_predictions_file_rejects_duplicates(tmp_path):
    path = tmp_path / "predictions.tsv"
    path.write_text("a\tX\na\tY\n")
    with pytest.raises(EvaluationError, match="duplicate"):
        read_predictions(path)


def test_predictions_file_rejects_missing_tab(tmp_path):
    path = tmp_path / "predictions.tsv"
    path.write_text("just-an-id\n")
    with pytest.raises(EvaluationError, match="expected"):
        read_predictions(path)


def _split_for(labels, test_ids):
    rest = sorted(set(labels) - set(test_ids))
    return DatasetSplit(
        data_type="synthetic",
        subset_id=50,
        train=tuple(rest),
        validation=(),
        test=tuple(sorted(test_ids)),
        seed=5,
    )


def test_evaluate_run_restricts_to_split_test(tmp_path):
    labels = _labels(6)
    test_ids = sorted(labels)[:2]
    split = _split_for(labels, test_ids)
    predictions = {sid: labels[sid] for sid in labels}
    predictions[test_ids[0]] = "WRONG-1"
    path = tmp_path / "predictions.tsv"
    write_predictions(predictions, path)
    report = evaluate_run(path, labels, split)
    assert report.n_samples == 2
    assert report.data_type == "synthetic"
    assert report.subset_id == 50
    assert report.miss_rate == 0.5


def test_evaluate_run_rejects_unknown_ids_even_outside_split(tmp_path):
    labels = _labels(4)
    split = _split_for(labels, sorted(labels)[:1])
    path = tmp_path / "predictions.tsv"
    write_predictions({"not/a/sample": "B-A1"}, path)
    with pytest.raises(EvaluationError, match="unknown"):
        evaluate_run(path, labels, split)


def test_evaluate_run_rejects_split_ids_missing_from_labels(tmp_path):
    labels = _labels(4)
    split = _split_for({**labels, "ghost/0": "B-A1"}, ["ghost/0"])
    path = tmp_path / "predictions.tsv"
    write_predictions({}, path)
    with pytest.raises(EvaluationError, match="missing"):
        evaluate_run(path, labels, split)
