import numpy as np
import pytest

from cardiolearn.errors import ConfigurationError, ShapeError, TrainingError
from cardiolearn.svm import (
    KernelSpec,
    SvmModel,
    _kernel_matrix,
    decision_function,
    fit_smo,
    kernel_eval,
    predict,
)

#: Alphas within solver step resolution of a box bound count as at-bound
#: when classifying KKT cases.
BOUND_EPS = 1e-5


def dual_objective(model: SvmModel) -> float:
    if model.alphas.size == 0:
        return 0.0
    K = _kernel_matrix(model.kernel, model.support_vectors)
    v = model.alphas * model.signed_labels
    return float(model.alphas.sum() - 0.5 * v @ K @ v)


def project_box_hyperplane(alpha0, y, C, iters=80):
    """Euclidean projection onto {0 <= a <= C, a.y = 0} by bisection."""
    lo = -(C + np.abs(alpha0).max() + 1.0)
    hi = -lo
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.clip(alpha0 - mid * y, 0.0, C) @ y > 0:
            lo = mid
        else:
            hi = mid
    return np.clip(alpha0 - 0.5 * (lo + hi) * y, 0.0, C)


def pg_dual_oracle(X, y01, kernel, C, iters=5000):
    """Projected-gradient ascent on the dual; independent of the SMO path."""
    y = np.where(np.asarray(y01) == 1, 1.0, -1.0)
    K = _kernel_matrix(kernel, np.asarray(X, dtype=float))
    step = 1.0 / (np.linalg.norm(K, "fro") + 1.0)
    a = project_box_hyperplane(np.zeros(len(y)), y, C)
    best = -np.inf
    for _ in range(iters):
        a = project_box_hyperplane(a + step * (1.0 - y * (K @ (a * y))), y, C)
        v = a * y
        best = max(best, float(a.sum() - 0.5 * v @ K @ v))
    return best


def full_alphas(model: SvmModel, X: np.ndarray) -> np.ndarray:
    """Scatter pruned support-vector alphas back onto the training rows."""
    out = np.zeros(X.shape[0])
    for sv, a in zip(model.support_vectors, model.alphas):
        out[np.flatnonzero((X == sv).all(axis=1))[0]] = a
    return out


def random_instance(rng, max_n=30, d=3):
    while True:
        n = int(rng.integers(6, max_n + 1))
        X = rng.normal(size=(n, d))
        y01 = rng.integers(0, 2, n)
        if np.unique(y01).size == 2:
            return X, y01


class TestKernel:
    def test_rbf_same_point_is_one(self):
        spec = KernelSpec("rbf", gamma=0.3)
        a = np.array([1.5, -2.0])
        assert kernel_eval(spec, a, a) == 1.0

    def test_linear_dot_product(self):
        assert kernel_eval(KernelSpec("linear", None), np.array([1.0, 2.0]), np.array([3.0, 4.0])) == 11.0

    def test_rbf_direct_value(self):
        spec = KernelSpec("rbf", gamma=0.5)
        value = kernel_eval(spec, np.array([0.0]), np.array([2.0]))
        assert value == pytest.approx(np.exp(-2.0), abs=1e-9)

    def test_width_mismatch(self):
        with pytest.raises(ShapeError):
            kernel_eval(KernelSpec("linear", None), np.zeros(2), np.zeros(3))

    def test_bad_gamma_rejected(self):
        with pytest.raises(ConfigurationError):
            KernelSpec("rbf", gamma=0.0)

    def test_matrix_matches_pairwise_eval(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(8, 4))
        for spec in (KernelSpec("linear", None), KernelSpec("rbf", 0.4)):
            K = _kernel_matrix(spec, X)
            for i in range(8):
                for j in range(8):
                    assert K[i, j] == pytest.approx(kernel_eval(spec, X[i], X[j]), abs=1e-12)


class TestFitSmo:
    def test_two_point_analytic_solution(self):
        m = fit_smo(
            np.array([[1.0], [-1.0]]),
            np.array([1, 0]),
            KernelSpec("linear", None),
            C=10.0,
        )
        assert m.alphas.tolist() == [0.5, 0.5]
        assert abs(m.bias) < 1e-6
        assert decision_function(m, np.array([0.0])) == pytest.approx(0.0, abs=1e-9)
        assert decision_function(m, np.array([3.0])) == pytest.approx(3.0, abs=1e-9)

    def test_xor_rbf_separates(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
        y = np.array([0, 0, 1, 1])
        m = fit_smo(X, y, KernelSpec("rbf", gamma=1.0), C=10.0)
        assert np.array_equal(predict(m, X), y)

    def test_dual_equality_constraint(self):
        rng = np.random.default_rng(10)
        for trial in range(10):
            X, y01 = random_instance(rng)
            m = fit_smo(X, y01, KernelSpec("rbf", 0.5), C=1.0, seed=trial)
            assert abs(float((m.alphas * m.signed_labels).sum())) < 1e-8

    def test_box_constraint_exact(self):
        rng = np.random.default_rng(11)
        for trial in range(10):
            X, y01 = random_instance(rng)
            m = fit_smo(X, y01, KernelSpec("linear", None), C=2.5, seed=trial)
            assert np.all(m.alphas >= 0.0)
            assert np.all(m.alphas <= 2.5)

    def test_zero_alphas_pruned(self):
        rng = np.random.default_rng(12)
        X, y01 = random_instance(rng)
        m = fit_smo(X, y01, KernelSpec("rbf", 0.5), C=1.0, seed=0)
        assert np.all(m.alphas > 0.0)
        assert m.support_vectors.shape[0] == m.alphas.size == m.signed_labels.size

    def test_single_class_rejected(self):
        with pytest.raises(TrainingError):
            fit_smo(np.zeros((4, 2)), np.ones(4), KernelSpec("linear", None))

    def test_seeded_determinism(self):
        rng = np.random.default_rng(13)
        X, y01 = random_instance(rng)
        a = fit_smo(X, y01, KernelSpec("rbf", 0.5), C=1.0, seed=9)
        b = fit_smo(X, y01, KernelSpec("rbf", 0.5), C=1.0, seed=9)
        assert np.array_equal(a.alphas, b.alphas) and a.bias == b.bias

    def test_kkt_residuals_at_convergence(self):
        rng = np.random.default_rng(1234)
        checked = 0
        while checked < 20:
            X, y01 = random_instance(rng)
            C = float(rng.choice([0.5, 1.0, 10.0]))
            kernel = KernelSpec("rbf", 0.5) if checked % 2 else KernelSpec("linear", None)
            m = fit_smo(X, y01, kernel, C=C, smo_tol=1e-3, max_passes=10, seed=checked)
            if not m.converged:
                continue
            checked += 1
            margins = np.where(y01 == 1, 1.0, -1.0) * decision_function(m, X)
            alphas = full_alphas(m, X)
            tol = 1e-3 + 1e-9
            for i in range(X.shape[0]):
                if alphas[i] <= BOUND_EPS:
                    assert margins[i] >= 1.0 - tol
                elif alphas[i] >= C - BOUND_EPS:
                    assert margins[i] <= 1.0 + tol
                else:
                    assert abs(margins[i] - 1.0) <= tol

    def test_objective_non_decreasing_across_updates(self):
        rng = np.random.default_rng(21)
        for trial in range(5):
            X, y01 = random_instance(rng, max_n=16)
            m = fit_smo(
                X, y01, KernelSpec("rbf", 0.5), C=1.0, seed=trial, record_objective=True
            )
            diffs = np.diff(np.array(m.update_objectives))
            assert np.all(diffs >= -1e-9)

    def test_dual_matches_projected_gradient_oracle(self):
        rng = np.random.default_rng(77)
        for trial in range(8):
            n = int(rng.integers(6, 13))
            X = rng.normal(size=(n, 2))
            y01 = rng.integers(0, 2, n)
            if np.unique(y01).size < 2:
                continue
            kernel = KernelSpec("rbf", 0.7) if trial % 2 else KernelSpec("linear", None)
            C = float(rng.choice([0.5, 1.0, 10.0]))
            m = fit_smo(X, y01, kernel, C=C, smo_tol=1e-3, max_passes=10, seed=trial)
            oracle = pg_dual_oracle(X, y01, kernel, C)
            assert dual_objective(m) == pytest.approx(oracle, abs=1e-4)


class TestDecisionFunction:
    def test_all_alphas_zero_gives_constant_bias(self):
        m = SvmModel(
            support_vectors=np.zeros((0, 2)),
            alphas=np.zeros(0),
            signed_labels=np.zeros(0),
            bias=0.37,
            kernel=KernelSpec("linear", None),
            C=1.0,
            smo_tol=1e-3,
            max_passes=5,
        )
        for x in (np.array([0.0, 0.0]), np.array([5.0, -9.0])):
            assert decision_function(m, x) == 0.37

    def test_shape_error(self):
        m = fit_smo(
            np.array([[1.0], [-1.0]]), np.array([1, 0]), KernelSpec("linear", None), C=1.0
        )
        with pytest.raises(ShapeError):
            decision_function(m, np.zeros(3))

    def test_matrix_matches_per_row(self):
        rng = np.random.default_rng(4)
        X, y01 = random_instance(rng, max_n=15)
        m = fit_smo(X, y01, KernelSpec("rbf", 0.5), C=1.0, seed=2)
        Q = rng.normal(size=(6, X.shape[1]))
        batch = decision_function(m, Q)
        for i in range(6):
            assert batch[i] == decision_function(m, Q[i])
