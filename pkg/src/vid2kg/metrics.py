"""Evaluation of predicted fact sets against (T, F) ground truth.

Scoring is locally closed-world: a prediction counts against the model only
when it violates an explicitly negated fact.  Atoms outside T and F are
ignored by default, because the ground truth says nothing about them; strict
mode counts them as false positives for sensitivity analysis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from vid2kg.errors import DataError

AGGREGATION_MODES = ("micro", "macro")


@dataclass(frozen=True)
class EvalResult:
    tp: int
    fp: int
    fn: int
    tn: int
    f1: float
    positive_accuracy: float
    negative_accuracy: float
    total_accuracy: float


def _ratio(num: float, den: float, empty: float) -> float:
    return num / den if den else empty


def result_from_counts(tp: int, fp: int, fn: int, tn: int) -> EvalResult:
    """Derive the four metrics; 0/0 is 0 for f1 and 1 for the accuracies."""
    return EvalResult(
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        f1=_ratio(2 * tp, 2 * tp + fp + fn, 0.0),
        positive_accuracy=_ratio(tp, tp + fn, 1.0),
        negative_accuracy=_ratio(tn, tn + fp, 1.0),
        total_accuracy=_ratio(tp + tn, tp + fp + fn + tn, 1.0),
    )


def evaluate_example(predicted, truth_t, truth_f, strict: bool = False) -> EvalResult:
    """Score one video's predicted facts against its ground truth.

    truth_f carries negated atoms; a prediction "violates" one when it equals
    the negated fact with polarity flipped.  With strict=True, predictions
    outside T and F are false positives instead of being ignored.
    """
    predicted = set(predicted)
    truth_t = set(truth_t)
    truth_f = set(truth_f)
    for atom in predicted | truth_t:
        if atom.negated:
            raise DataError(f"negated atom {atom} in a positive set")
    for atom in truth_f:
        if not atom.negated:
            raise DataError(f"non-negated atom {atom} in the negated truth set")
    unnegated_f = {a.unnegated() for a in truth_f}
    tp = len(predicted & truth_t)
    fn = len(truth_t - predicted)
    violations = len(predicted & unnegated_f)
    tn = len(truth_f) - violations
    fp = violations
    if strict:
        fp += len(predicted - truth_t - unnegated_f)
    return result_from_counts(tp, fp, fn, tn)


def evaluate_corpus(results, mode: str = "micro") -> EvalResult:
    """Aggregate per-example results.

    micro sums the counts and derives the metrics once; macro averages the
    per-example metrics (the counts in a macro result are still the sums).
    """
    results = list(results)
    if not results:
        raise DataError("cannot aggregate an empty result list")
    if mode not in AGGREGATION_MODES:
        raise DataError(f"aggregation mode must be one of {AGGREGATION_MODES}")
    tp = sum(r.tp for r in results)
    fp = sum(r.fp for r in results)
    fn = sum(r.fn for r in results)
    tn = sum(r.tn for r in results)
    if mode == "micro":
        return result_from_counts(tp, fp, fn, tn)
    n = len(results)
    return EvalResult(
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        f1=sum(r.f1 for r in results) / n,
        positive_accuracy=sum(r.positive_accuracy for r in results) / n,
        negative_accuracy=sum(r.negative_accuracy for r in results) / n,
        total_accuracy=sum(r.total_accuracy for r in results) / n,
    )


def sweep_thresholds(scored_examples, thresholds, mode: str = "micro"):
    """Evaluate score maps at several thresholds.

    scored_examples is a list of (scores, truth_t, truth_f) triples where
    scores maps non-negated atoms to probabilities; at each threshold the
    predicted set is the atoms scoring strictly above it.  Returns a list of
    (threshold, EvalResult).
    """
    out = []
    for threshold in thresholds:
        per_example = [
            evaluate_example(
                {atom for atom, score in scores.items() if score > threshold},
                truth_t,
                truth_f,
            )
            for scores, truth_t, truth_f in scored_examples
        ]
        out.append((threshold, evaluate_corpus(per_example, mode)))
    return out


_COLUMNS = (
    ("F1-score", "f1"),
    ("Positive Accuracy", "positive_accuracy"),
    ("Negative Accuracy", "negative_accuracy"),
    ("Total Accuracy", "total_accuracy"),
)


def report_to_obj(result: EvalResult) -> dict:
    return {
        "tp": result.tp,
        "fp": result.fp,
        "fn": result.fn,
        "tn": result.tn,
        "f1": result.f1,
        "positive_accuracy": result.positive_accuracy,
        "negative_accuracy": result.negative_accuracy,
        "total_accuracy": result.total_accuracy,
    }


def report_json(result: EvalResult) -> str:
    return json.dumps(report_to_obj(result), indent=2, sort_keys=True) + "\n"


def report_table(result: EvalResult) -> str:
    """Two-row table of the headline metrics as percentages, 2 decimals."""
    cells = [
        (header, f"{getattr(result, attr) * 100.0:.2f}")
        for header, attr in _COLUMNS
    ]
    widths = [max(len(h), len(v)) for h, v in cells]
    head = "  ".join(h.ljust(w) for (h, _), w in zip(cells, widths))
    body = "  ".join(v.ljust(w) for (_, v), w in zip(cells, widths))
    return f"{head}\n{body}"
