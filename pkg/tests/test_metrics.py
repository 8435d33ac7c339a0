import numpy as np
import pytest

from cardiolearn.errors import DomainError, ShapeError, UndefinedMetricError
from cardiolearn.metrics import ConfusionMatrix, compute_metrics, confusion, roc_auc


def brute_force_counts(y_true, y_pred):
    tp = fp = fn = tn = 0
    for t, p in zip(y_true, y_pred):
        if t == 1 and p == 1:
            tp += 1
        elif t == 0 and p == 1:
            fp += 1
        elif t == 1 and p == 0:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def pairwise_auc(y_true, scores):
    """O(n^2) enumeration of positive-negative pairs, ties worth one half."""
    wins = 0.0
    pairs = 0
    for i, ti in enumerate(y_true):
        if ti != 1:
            continue
        for j, tj in enumerate(y_true):
            if tj != 0:
                continue
            pairs += 1
            if scores[i] > scores[j]:
                wins += 1.0
            elif scores[i] == scores[j]:
                wins += 0.5
    return wins / pairs


class TestConfusion:
    def test_perfect_prediction(self):
        cm = confusion((1, 0, 1), (1, 0, 1))
        assert (cm.tp, cm.tn, cm.fp, cm.fn) == (2, 1, 0, 0)

    def test_mixed_example(self):
        cm = confusion((1, 1, 1, 0, 0), (1, 0, 1, 0, 1))
        assert (cm.tp, cm.fn, cm.tn, cm.fp) == (2, 1, 1, 1)

    def test_degenerate_all_wrong(self):
        cm = confusion((0, 0, 0, 0), (1, 1, 1, 1))
        assert (cm.fp, cm.tp, cm.fn, cm.tn) == (4, 0, 0, 0)

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            confusion((1, 0), (1, 0, 1))

    def test_non_binary_value(self):
        with pytest.raises(DomainError):
            confusion((1, 2), (1, 0))

    def test_swap_transposes(self):
        rng = np.random.default_rng(3)
        y = rng.integers(0, 2, 50)
        p = rng.integers(0, 2, 50)
        a = confusion(y, p)
        b = confusion(p, y)
        assert (a.tp, a.tn) == (b.tp, b.tn)
        assert (a.fp, a.fn) == (b.fn, b.fp)

    def test_total_matches_rows(self):
        rng = np.random.default_rng(8)
        y = rng.integers(0, 2, 123)
        p = rng.integers(0, 2, 123)
        assert confusion(y, p).total == 123


class TestComputeMetrics:
    def test_worked_example(self):
        report = compute_metrics(ConfusionMatrix(tp=2, fp=1, fn=1, tn=1))
        assert report.accuracy == pytest.approx(0.6)
        assert report.precision == pytest.approx(2 / 3)
        assert report.recall == pytest.approx(2 / 3)
        assert report.f1 == pytest.approx(2 / 3)
        assert report.degenerate == ()

    def test_perfect_classifier(self):
        report = compute_metrics(ConfusionMatrix(tp=9, fp=0, fn=0, tn=0))
        assert (report.accuracy, report.precision, report.recall, report.f1) == (1, 1, 1, 1)

    def test_empty_positive_prediction_convention(self):
        report = compute_metrics(ConfusionMatrix(tp=0, fp=0, fn=3, tn=2))
        assert report.precision == 0.0
        assert "precision" in report.degenerate

    def test_matches_brute_force_on_random_vectors(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            n = int(rng.integers(1, 200))
            y = rng.integers(0, 2, n)
            p = rng.integers(0, 2, n)
            tp, fp, fn, tn = brute_force_counts(y, p)
            cm = confusion(y, p)
            assert (cm.tp, cm.fp, cm.fn, cm.tn) == (tp, fp, fn, tn)
            report = compute_metrics(cm)
            assert report.accuracy == (tp + tn) / n
            assert report.precision == (tp / (tp + fp) if tp + fp else 0.0)
            assert report.recall == (tp / (tp + fn) if tp + fn else 0.0)
            pr, rc = report.precision, report.recall
            assert report.f1 == (2 * pr * rc / (pr + rc) if pr + rc else 0.0)

    def test_all_metrics_within_unit_interval(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            n = int(rng.integers(1, 60))
            report = compute_metrics(confusion(rng.integers(0, 2, n), rng.integers(0, 2, n)))
            for value in (report.accuracy, report.precision, report.recall, report.f1):
                assert 0.0 <= value <= 1.0


class TestRocAuc:
    def test_perfect_separation(self):
        assert roc_auc((0, 0, 1, 1), (0.1, 0.2, 0.8, 0.9)) == 1.0

    def test_tie_convention(self):
        assert roc_auc((0, 1), (0.5, 0.5)) == 0.5

    def test_enumerated_example(self):
        assert roc_auc((0, 1, 0, 1), (0.3, 0.4, 0.6, 0.8)) == pytest.approx(0.75)

    def test_single_class_undefined(self):
        with pytest.raises(UndefinedMetricError):
            roc_auc((1, 1, 1), (0.1, 0.5, 0.9))

    def test_matches_pairwise_enumeration(self):
        rng = np.random.default_rng(7)
        for _ in range(60):
            n = int(rng.integers(2, 100))
            y = rng.integers(0, 2, n)
            if np.unique(y).size < 2:
                continue
            scores = np.round(rng.random(n), 2)  # coarse grid forces ties
            assert roc_auc(y, scores) == pytest.approx(pairwise_auc(y, scores), abs=1e-12)

    def test_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(9)
        y = rng.integers(0, 2, 80)
        scores = rng.random(80)
        base = roc_auc(y, scores)
        for transform in (lambda s: 3 * s + 1, np.exp, lambda s: s**3):
            assert roc_auc(y, transform(scores)) == pytest.approx(base, abs=1e-12)


class TestCsvRow:
    def test_table_layout(self):
        from cardiolearn.metrics import MetricReport

        report = MetricReport(accuracy=0.87, precision=0.86, recall=0.9, f1=0.88, auc=0.91)
        assert report.csv_row("knn") == "knn,0.87,0.86,0.9,0.88,0.91"
        no_auc = MetricReport(accuracy=0.5, precision=0.5, recall=0.5, f1=0.5)
        assert no_auc.csv_row("x").endswith(",")
