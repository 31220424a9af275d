"""Recognition metrics: edit distance, character error rate, miss rate.

Predictions are judged against the full label string, dash included.
Corpus CER is total edit distance over total reference characters; the
macro variant averages per-sample rates.  Miss rate counts any sample
whose prediction is not an exact label match.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .errors import EvaluationError
from .splits import DatasetSplit


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit insert, delete, and substitute costs."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    current = [0] * (len(b) + 1)
    for i, ch_a in enumerate(a, start=1):
        current[0] = i
        for j, ch_b in enumerate(b, start=1):
            cost = 0 if ch_a == ch_b else 1
            current[j] = min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + cost,
            )
        previous, current = current, previous
    return previous[len(b)]


def cer(prediction: str, label: str) -> float:
    """Edit distance normalized by label length."""
    if not label:
        raise EvaluationError("reference label is empty")
    return levenshtein(prediction, label) / len(label)


def miss_rate(outcomes: list[bool]) -> float:
    """Fraction of samples whose prediction was not an exact match."""
    if not outcomes:
        raise EvaluationError("no samples to score")
    return sum(1 for hit in outcomes if not hit) / len(outcomes)


@dataclass(frozen=True)
class SampleScore:
    sample_id: str
    label: str
    prediction: str
    distance: int
    cer: float
    exact: bool


@dataclass(frozen=True)
class EvalReport:
    data_type: str
    subset_id: int | None
    n_samples: int
    n_true: int
    n_false: int
    total_distance: int
    total_chars: int
    corpus_cer: float
    macro_cer: float
    miss_rate: float
    samples: tuple[SampleScore, ...]

    def to_json(self) -> str:
        payload = {
            "data_type": self.data_type,
            "subset_id": self.subset_id,
            "n_samples": self.n_samples,
            "n_true": self.n_true,
            "n_false": self.n_false,
            "total_distance": self.total_distance,
            "total_chars": self.total_chars,
            "corpus_cer": self.corpus_cer,
            "macro_cer": self.macro_cer,
            "miss_rate": self.miss_rate,
            "samples": [
                {
                    "sample_id": s.sample_id,
                    "label": s.label,
                    "prediction": s.prediction,
                    "distance": s.distance,
                    "cer": s.cer,
                    "exact": s.exact,
                }
                for s in self.samples
            ],
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def to_table(self) -> str:
        subset = "full" if self.subset_id in (None, 100) else str(self.subset_id)
        lines = [
            f"evaluation: {self.data_type} (subset {subset})",
            f"  samples        {self.n_samples}",
            f"  exact matches  {self.n_true}",
            f"  misses         {self.n_false}",
            f"  corpus CER     {self.corpus_cer * 100:.2f}%",
            f"  macro CER      {self.macro_cer * 100:.2f}%",
            f"  miss rate MR   {self.miss_rate * 100:.2f}%",
        ]
        return "\n".join(lines) + "\n"


def read_predictions(path) -> dict[str, str]:
    """Read a tab-separated sample_id/prediction file (UTF-8, LF)."""
    path = Path(path)
    predictions: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise EvaluationError(f"{path}:{line_no}: expected <sample_id>\\t<prediction>")
            sample_id, prediction = line.split("\t", 1)
            if sample_id in predictions:
                raise EvaluationError(f"{path}:{line_no}: duplicate prediction for {sample_id}")
            predictions[sample_id] = prediction
    return predictions


def write_predictions(predictions: Mapping[str, str], path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sample_id in sorted(predictions):
            fh.write(f"{sample_id}\t{predictions[sample_id]}\n")


def evaluate_predictions(
    predictions: Mapping[str, str],
    labels: Mapping[str, str],
    data_type: str = "synthetic",
    subset_id: int | None = None,
) -> EvalReport:
    """Score predictions against reference labels.

    Every labeled sample is scored; a sample with no prediction counts as
    an empty string.  Predictions for unknown sample ids are rejected so
    stray output cannot inflate results.
    """
    if not labels:
        raise EvaluationError("no reference labels to evaluate against")
    unknown = sorted(set(predictions) - set(labels))
    if unknown:
        raise EvaluationError(
            f"predictions reference unknown sample ids: {', '.join(unknown[:5])}"
        )

    scores: list[SampleScore] = []
    total_distance = 0
    total_chars = 0
    for sample_id in sorted(labels):
        label = labels[sample_id]
        if not label:
            raise EvaluationError(f"sample {sample_id} has an empty label")
        prediction = predictions.get(sample_id, "")
        distance = levenshtein(prediction, label)
        total_distance += distance
        total_chars += len(label)
        scores.append(
            SampleScore(
                sample_id=sample_id,
                label=label,
                prediction=prediction,
                distance=distance,
                cer=distance / len(label),
                exact=prediction == label,
            )
        )

    n_true = sum(1 for s in scores if s.exact)
    n_false = len(scores) - n_true
    return EvalReport(
        data_type=data_type,
        subset_id=subset_id,
        n_samples=len(scores),
        n_true=n_true,
        n_false=n_false,
        total_distance=total_distance,
        total_chars=total_chars,
        corpus_cer=total_distance / total_chars,
        macro_cer=sum(s.cer for s in scores) / len(scores),
        miss_rate=n_false / len(scores),
        samples=tuple(scores),
    )


def evaluate_run(
    predictions_path,
    labels: Mapping[str, str],
    split: DatasetSplit | None = None,
) -> EvalReport:
    """Score a predictions file, restricted to a split's test members."""
    predictions = read_predictions(predictions_path)
    unknown = sorted(set(predictions) - set(labels))
    if unknown:
        raise EvaluationError(
            f"predictions reference unknown sample ids: {', '.join(unknown[:5])}"
        )
    if split is not None:
        test_ids = set(split.test)
        missing = sorted(tid for tid in test_ids if tid not in labels)
        if missing:
            raise EvaluationError(
                f"split test ids missing from labels: {', '.join(missing[:5])}"
            )
        labels = {sid: labels[sid] for sid in test_ids}
        predictions = {
            sid: text for sid, text in predictions.items() if sid in test_ids
        }
        data_type = split.data_type
        subset_id = split.subset_id
    else:
        data_type = "synthetic"
        subset_id = None
    return evaluate_predictions(predictions, labels, data_type, subset_id)
