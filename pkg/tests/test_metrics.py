"""Evaluation metrics over predicted fact sets."""

import math
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vid2kg.atoms import Atom, Term
from vid2kg.errors import DataError
from vid2kg.metrics import (
    EvalResult,
    evaluate_corpus,
    evaluate_example,
    report_json,
    report_table,
    report_to_obj,
    result_from_counts,
    sweep_thresholds,
)


def A(pred, *args, neg=False):
    return Atom(Term(pred), tuple(Term(a) for a in args), neg)


class TestEvaluateExample:
    def test_perfect_prediction(self):
        t = {A("run", "man"), A("hold", "man", "cup")}
        f = {A("run", "cup", neg=True)}
        r = evaluate_example(t, t, f)
        assert (r.tp, r.fp, r.fn, r.tn) == (2, 0, 0, 1)
        assert r.f1 == 1.0
        assert r.positive_accuracy == 1.0
        assert r.negative_accuracy == 1.0
        assert r.total_accuracy == 1.0

    def test_empty_prediction(self):
        t = {A("run", "man")}
        f = {A("run", "cup", neg=True), A("red", "man", neg=True)}
        r = evaluate_example(set(), t, f)
        assert (r.tp, r.fp, r.fn, r.tn) == (0, 0, 1, 2)
        assert r.f1 == 0.0
        assert r.positive_accuracy == 0.0
        assert r.negative_accuracy == 1.0

    def test_hand_enumerated_counts(self):
        # |T|=2 with one hit; |F|=3 with one violated
        t = {A("run", "man"), A("sit", "dog")}
        f = {
            A("red", "man", neg=True),
            A("sit", "man", neg=True),
            A("run", "dog", neg=True),
        }
        predicted = {A("run", "man"), A("red", "man")}
        r = evaluate_example(predicted, t, f)
        assert (r.tp, r.fn, r.fp, r.tn) == (1, 1, 1, 2)
        assert r.f1 == 0.5
        assert r.positive_accuracy == 0.5
        assert r.negative_accuracy == 2.0 / 3.0
        assert r.total_accuracy == 0.6

    def test_unlabeled_predictions_are_ignored_by_default(self):
        t = {A("run", "man")}
        f = {A("red", "man", neg=True)}
        predicted = {A("run", "man"), A("fly", "man"), A("hold", "man", "cup")}
        relaxed = evaluate_example(predicted, t, f)
        assert (relaxed.tp, relaxed.fp, relaxed.fn, relaxed.tn) == (1, 0, 0, 1)
        strict = evaluate_example(predicted, t, f, strict=True)
        assert (strict.tp, strict.fp, strict.fn, strict.tn) == (1, 2, 0, 1)

    def test_both_empty_truth_sets(self):
        r = evaluate_example(set(), set(), set())
        assert (r.tp, r.fp, r.fn, r.tn) == (0, 0, 0, 0)
        assert r.f1 == 0.0
        assert r.positive_accuracy == 1.0
        assert r.negative_accuracy == 1.0
        assert r.total_accuracy == 1.0

    def test_polarity_is_validated(self):
        with pytest.raises(DataError, match="negated"):
            evaluate_example({A("run", "man", neg=True)}, set(), set())
        with pytest.raises(DataError, match="negated"):
            evaluate_example(set(), {A("run", "man", neg=True)}, set())
        with pytest.raises(DataError, match="negated"):
            evaluate_example(set(), set(), {A("run", "man")})

    @given(
        hits=st.integers(0, 5),
        misses=st.integers(0, 5),
        violated=st.integers(0, 5),
        honored=st.integers(0, 5),
    )
    @settings(max_examples=60, deadline=None)
    def test_counts_partition_the_truth_sets(self, hits, misses, violated, honored):
        t = {A("p", f"t{i}") for i in range(hits + misses)}
        f = {A("p", f"f{i}", neg=True) for i in range(violated + honored)}
        predicted = {A("p", f"t{i}") for i in range(hits)}
        predicted |= {A("p", f"f{i}") for i in range(violated)}
        r = evaluate_example(predicted, t, f)
        assert r.tp + r.fn == len(t)
        assert r.fp + r.tn == len(f)
        assert (r.tp, r.fn, r.fp, r.tn) == (hits, misses, violated, honored)

    def test_adding_a_correct_prediction_never_lowers_f1(self):
        t = {A("p", f"t{i}") for i in range(4)}
        f = {A("q", f"f{i}", neg=True) for i in range(3)}
        predicted = {A("p", "t0"), A("q", "f0")}
        base = evaluate_example(predicted, t, f).f1
        for atom in sorted(t - predicted, key=Atom.sort_key):
            improved = evaluate_example(predicted | {atom}, t, f).f1
            assert improved >= base


class TestEvaluateCorpus:
    def results(self):
        return [
            result_from_counts(1, 0, 1, 0),
            result_from_counts(0, 1, 0, 1),
        ]

    def test_single_example_micro_equals_macro(self):
        r = result_from_counts(3, 1, 2, 4)
        micro = evaluate_corpus([r], "micro")
        macro = evaluate_corpus([r], "macro")
        assert micro == r
        assert macro == r

    def test_micro_sums_counts_first(self):
        micro = evaluate_corpus(self.results(), "micro")
        assert (micro.tp, micro.fp, micro.fn, micro.tn) == (1, 1, 1, 1)
        assert micro.f1 == 2 * 1 / (2 * 1 + 1 + 1)

    def test_macro_averages_metrics(self):
        # example metrics: f1 = 2/3 and 0; pos = 1/2 and 1 (0/0); neg = 1 (0/0) and 1/2
        macro = evaluate_corpus(self.results(), "macro")
        assert abs(macro.f1 - (2.0 / 3.0 + 0.0) / 2.0) < 1e-12
        assert macro.positive_accuracy == 0.75
        assert macro.negative_accuracy == 0.75
        # counts are still the corpus sums
        assert (macro.tp, macro.fp, macro.fn, macro.tn) == (1, 1, 1, 1)

    def test_all_perfect_corpus(self):
        perfect = [result_from_counts(2, 0, 0, 1) for _ in range(4)]
        assert evaluate_corpus(perfect, "micro").f1 == 1.0
        assert evaluate_corpus(perfect, "macro").f1 == 1.0

    def test_order_invariance(self):
        rs = [
            result_from_counts(1, 2, 3, 4),
            result_from_counts(4, 3, 2, 1),
            result_from_counts(0, 0, 5, 5),
        ]
        for mode in ("micro", "macro"):
            baseline = evaluate_corpus(rs, mode)
            for perm in permutations(rs):
                assert evaluate_corpus(list(perm), mode) == baseline

    def test_identical_examples_agree_across_modes(self):
        rs = [result_from_counts(2, 1, 1, 3)] * 5
        micro = evaluate_corpus(rs, "micro")
        macro = evaluate_corpus(rs, "macro")
        assert abs(micro.f1 - macro.f1) < 1e-12
        assert abs(micro.total_accuracy - macro.total_accuracy) < 1e-12

    def test_empty_and_bad_mode_rejected(self):
        with pytest.raises(DataError, match="empty"):
            evaluate_corpus([])
        with pytest.raises(DataError, match="mode"):
            evaluate_corpus([result_from_counts(1, 1, 1, 1)], "median")


class TestSweep:
    def test_threshold_sweep_uses_strict_inequality(self):
        t = {A("run", "man")}
        f = {A("red", "man", neg=True)}
        scores = {A("run", "man"): 0.7, A("red", "man"): 0.4}
        swept = sweep_thresholds([(scores, t, f)], [0.3, 0.4, 0.7, 0.9])
        by_threshold = {th: r for th, r in swept}
        assert (by_threshold[0.3].tp, by_threshold[0.3].fp) == (1, 1)
        # 0.4 exactly: the 0.4-scored atom is excluded
        assert (by_threshold[0.4].tp, by_threshold[0.4].fp) == (1, 0)
        # 0.7 exactly: everything excluded
        assert (by_threshold[0.7].tp, by_threshold[0.7].fp) == (0, 0)
        assert by_threshold[0.9].f1 == 0.0


class TestReports:
    def test_report_obj_and_json(self):
        r = result_from_counts(1, 1, 1, 2)
        obj = report_to_obj(r)
        assert obj["tp"] == 1 and obj["tn"] == 2
        assert obj["f1"] == r.f1
        text = report_json(r)
        assert text.endswith("\n")
        assert '"total_accuracy"' in text

    def test_table_formats_percentages(self):
        r = result_from_counts(1, 1, 1, 2)
        table = report_table(r)
        head, body = table.splitlines()
        assert "F1-score" in head
        assert "Positive Accuracy" in head
        assert "Negative Accuracy" in head
        assert "Total Accuracy" in head
        # f1 = 0.5 → 50.00; neg = 2/3 → 66.67; total = 0.6 → 60.00
        assert "50.00" in body
        assert "66.67" in body
        assert "60.00" in body

    def test_zero_counts_table(self):
        table = report_table(result_from_counts(0, 0, 0, 0))
        assert "100.00" in table  # the accuracies' 0/0 convention
        assert "0.00" in table  # f1's


class TestResultFromCounts:
    @given(
        tp=st.integers(0, 20),
        fp=st.integers(0, 20),
        fn=st.integers(0, 20),
        tn=st.integers(0, 20),
    )
    @settings(max_examples=80, deadline=None)
    def test_derived_metrics_match_their_definitions(self, tp, fp, fn, tn):
        r = result_from_counts(tp, fp, fn, tn)
        assert isinstance(r, EvalResult)
        if 2 * tp + fp + fn:
            assert math.isclose(r.f1, 2 * tp / (2 * tp + fp + fn))
        else:
            assert r.f1 == 0.0
        if tp + fn:
            assert math.isclose(r.positive_accuracy, tp / (tp + fn))
        else:
            assert r.positive_accuracy == 1.0
        if tn + fp:
            assert math.isclose(r.negative_accuracy, tn / (tn + fp))
        else:
            assert r.negative_accuracy == 1.0
        assert 0.0 <= r.f1 <= 1.0
        assert 0.0 <= r.total_accuracy <= 1.0
