import numpy as np
import pytest

from rgnn.errors import DataError
from rgnn.metrics import (
    ConfusionMatrix,
    confusion,
    overall_accuracy,
    per_class_stats,
    pr_points,
    roc_points,
    trapezoid_auc,
    write_confusion_csv,
    write_curve_csv,
)


class TestConfusion:
    def test_perfect_prediction_is_diagonal(self):
        y = np.array([0, 1, 2, 1, 0])
        cm = confusion(y, y, 3)
        assert np.array_equal(cm.counts, np.diag([2, 2, 1]))

    def test_binary_layout(self):
        # TP=9, TN=8, FP=1, FN=2 with negative=0, positive=1
        y_true = np.array([1] * 9 + [0] * 8 + [0] * 1 + [1] * 2)
        y_pred = np.array([1] * 9 + [0] * 8 + [1] * 1 + [0] * 2)
        cm = confusion(y_true, y_pred, 2)
        assert np.array_equal(cm.counts, [[8, 1], [2, 9]])

    def test_total_preserved_under_shuffle(self):
        rng = np.random.default_rng(0)
        y = rng.integers(0, 4, 200)
        cm = confusion(y, rng.permutation(y), 4)
        assert cm.total == 200

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            confusion([0, 3], [0, 1], 3)
        with pytest.raises(ValueError):
            confusion([0, 1], [0, 5], 3)


class TestOverallAccuracy:
    def test_diagonal_is_one(self):
        assert overall_accuracy(ConfusionMatrix(np.diag([3, 4, 5]))) == 1.0

    def test_binary_formula(self):
        cm = ConfusionMatrix(np.array([[8, 1], [2, 9]]))
        assert overall_accuracy(cm) == pytest.approx(17 / 20)

    def test_equals_indicator_mean(self):
        rng = np.random.default_rng(1)
        y_true = rng.integers(0, 5, 500)
        y_pred = rng.integers(0, 5, 500)
        cm = confusion(y_true, y_pred, 5)
        assert overall_accuracy(cm) == pytest.approx(np.mean(y_true == y_pred))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            overall_accuracy(ConfusionMatrix(np.zeros((2, 2), dtype=np.int64)))


class TestPerClassStats:
    def test_diagonal_gives_ones(self):
        stats = per_class_stats(ConfusionMatrix(np.diag([3, 4])))
        assert all(s.precision == 1.0 and s.sensitivity == 1.0 for s in stats)

    def test_absent_prediction_flagged(self):
        cm = ConfusionMatrix(np.array([[0, 2], [0, 3]]))
        stats = per_class_stats(cm)
        assert stats[0].precision == 0.0 and not stats[0].precision_defined
        assert stats[1].precision_defined

    def test_hand_computed_matrix(self):
        cm = ConfusionMatrix(np.array([[5, 1, 0], [0, 4, 2], [1, 0, 7]]))
        stats = per_class_stats(cm)
        assert stats[0].precision == pytest.approx(5 / 6)
        assert stats[0].sensitivity == pytest.approx(5 / 6)
        assert stats[1].precision == pytest.approx(4 / 5)
        assert stats[2].sensitivity == pytest.approx(7 / 8)


class TestRoc:
    def test_perfect_separation(self):
        scores = np.array([0.9, 0.8, 0.2, 0.1])
        labels = np.array([1, 1, 0, 0])
        roc = roc_points(scores, labels)
        assert trapezoid_auc(roc) == pytest.approx(1.0)
        assert any(x == 0.0 and y == 1.0 for x, y in zip(roc.x, roc.y))

    def test_identical_scores_give_diagonal(self):
        scores = np.full(10, 0.5)
        labels = np.array([0, 1] * 5)
        roc = roc_points(scores, labels)
        assert trapezoid_auc(roc) == pytest.approx(0.5)
        assert np.allclose(roc.x[-1], 1.0) and np.allclose(roc.y[-1], 1.0)

    def test_endpoints_present(self):
        rng = np.random.default_rng(0)
        roc = roc_points(rng.uniform(size=50), rng.integers(0, 2, 50))
        assert roc.x[0] == 0.0 and roc.y[0] == 0.0
        assert roc.x[-1] == 1.0 and roc.y[-1] == 1.0

    def test_random_scores_auc_half(self):
        rng = np.random.default_rng(7)
        scores = rng.uniform(size=10_000)
        labels = np.array([0, 1] * 5000)
        auc = trapezoid_auc(roc_points(scores, labels))
        assert abs(auc - 0.5) <= 0.02

    def test_monotone_sweep(self):
        rng = np.random.default_rng(3)
        roc = roc_points(rng.normal(size=200), rng.integers(0, 2, 200))
        assert np.all(np.diff(roc.x) >= 0)
        assert np.all(np.diff(roc.y) >= 0)
        assert np.all(np.diff(roc.thresholds) < 0)

    def test_auc_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(5)
        scores = rng.normal(size=300)
        labels = rng.integers(0, 2, 300)
        a1 = trapezoid_auc(roc_points(scores, labels))
        a2 = trapezoid_auc(roc_points(np.exp(2.0 * scores), labels))
        a3 = trapezoid_auc(roc_points(np.tanh(scores) * 7 - 2, labels))
        assert a1 == pytest.approx(a2, abs=1e-12)
        assert a1 == pytest.approx(a3, abs=1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(DataError):
            roc_points(np.array([0.1, 0.9]), np.array([1, 1]))


class TestPr:
    def test_perfect_separation_precision_one(self):
        scores = np.array([0.9, 0.8, 0.2, 0.1])
        labels = np.array([1, 1, 0, 0])
        pr = pr_points(scores, labels)
        at_full_recall = pr.y[np.isclose(pr.x, 1.0)]
        assert pr.y[0] == 1.0
        assert at_full_recall.min() >= 0.5

    def test_recall_reaches_one(self):
        rng = np.random.default_rng(1)
        pr = pr_points(rng.uniform(size=100), rng.integers(0, 2, 100))
        assert pr.x[-1] == pytest.approx(1.0)

    def test_no_positives_rejected(self):
        with pytest.raises(DataError):
            pr_points(np.array([0.4, 0.6]), np.array([0, 0]))


class TestCsvEmission:
    def test_confusion_csv(self, tmp_path):
        cm = confusion([0, 1, 1], [0, 1, 0], 2)
        path = tmp_path / "cm.csv"
        write_confusion_csv(cm, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "true,pred,count"
        assert "1,0,1" in lines
        assert len(lines) == 5

    def test_curve_csv(self, tmp_path):
        roc = roc_points(np.array([0.9, 0.3, 0.6, 0.1]), np.array([1, 0, 1, 0]))
        path = tmp_path / "roc.csv"
        write_curve_csv(roc, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "threshold,x,y"
        assert len(lines) == len(roc.thresholds) + 1
        assert lines[1].startswith("inf,0.0,0.0")
