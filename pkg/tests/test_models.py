import math

import numpy as np
import pytest

from gsaopt.linalg import SparseVec
from gsaopt.models import (
    LinearModel,
    apply_update,
    linreg_loss_grad,
    logistic_forward,
    logistic_loss_grad,
    loss_grad,
    softmax_forward,
    softmax_loss_grad,
)

from conftest import random_sparse

LN19 = math.log(19.0)


class TestLogistic:
    def test_zero_weights(self):
        assert logistic_forward(np.zeros(3), SparseVec([0, 2], [5.0, -1.0])) == 0.5

    def test_ln19(self):
        x = SparseVec([0], [1.0])
        assert logistic_forward(np.array([LN19]), x) == pytest.approx(0.95, abs=1e-15)

    def test_no_nan_at_extremes(self):
        x = SparseVec([0], [1.0])
        assert logistic_forward(np.array([-1000.0]), x) == 0.0
        assert logistic_forward(np.array([1000.0]), x) == 1.0
        loss, c = logistic_loss_grad(np.array([-1000.0]), x, 1)
        assert loss == pytest.approx(1000.0) and c == -1.0

    @pytest.mark.parametrize(
        "z, y, loss, coeff",
        [(0.0, 1, math.log(2), -0.5), (LN19, 1, -math.log(0.95), -0.05), (LN19, 0, -math.log(0.05), 0.95)],
    )
    def test_loss_grad_examples(self, z, y, loss, coeff):
        got_loss, got_c = logistic_loss_grad(np.array([z]), SparseVec([0], [1.0]), y)
        assert got_loss == pytest.approx(loss, rel=1e-12)
        assert got_c == pytest.approx(coeff, rel=1e-12)


class TestSoftmax:
    def test_uniform(self):
        p = softmax_forward(np.zeros((4, 3)), SparseVec([1], [2.0]))
        np.testing.assert_allclose(p, 0.25)

    def test_ratio(self):
        W = np.array([[0.0], [math.log(3)]])
        np.testing.assert_allclose(softmax_forward(W, SparseVec([0], [1.0])), [0.25, 0.75], rtol=1e-15)

    def test_row_permutation(self):
        rng = np.random.default_rng(0)
        W, x = rng.normal(size=(5, 4)), random_sparse(rng, 4, 1.0)
        perm = rng.permutation(5)
        np.testing.assert_allclose(softmax_forward(W[perm], x), softmax_forward(W, x)[perm], rtol=1e-14)

    def test_zero_weights_loss_grad(self):
        loss, c = softmax_loss_grad(np.zeros((4, 2)), SparseVec([0], [1.0]), 2)
        assert loss == pytest.approx(math.log(4))
        np.testing.assert_allclose(c, [0.25, 0.25, -0.75, 0.25])

    def test_coeff_invariants(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            L = int(rng.integers(2, 6))
            W = rng.normal(size=(L, 6)) * 3
            x = random_sparse(rng, 6, 0.7)
            k = int(rng.integers(L))
            _, c = softmax_loss_grad(W, x, k)
            assert abs(c.sum()) <= 1e-12
            assert -1 <= c[k] <= 0
            assert np.all(np.delete(c, k) >= 0)

    def test_bad_class(self):
        with pytest.raises(ValueError):
            softmax_loss_grad(np.zeros((2, 2)), SparseVec([0], [1.0]), 2)

    def test_two_class_matches_logistic(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            W = rng.normal(size=(2, 5)) * 2
            x = random_sparse(rng, 5, 0.8)
            y = int(rng.integers(2))
            ls, cs = softmax_loss_grad(W, x, y)
            ll, cl = logistic_loss_grad(W[1] - W[0], x, y)
            assert ls == pytest.approx(ll, rel=1e-10, abs=1e-14)
            # coefficient on the difference row
            assert cs[1] - cs[0] == pytest.approx(2 * cl, rel=1e-10, abs=1e-14)

    def test_extreme_logits_finite(self):
        W = np.array([[1e4], [-1e4], [0.0]])
        loss, c = softmax_loss_grad(W, SparseVec([0], [1.0]), 1)
        assert loss == pytest.approx(2e4) and np.all(np.isfinite(c))


class TestLinreg:
    def test_examples(self):
        assert linreg_loss_grad(np.zeros(1), SparseVec([0], [1.0]), 0.0) == (0.0, -0.0)
        assert linreg_loss_grad(np.zeros(1), SparseVec([0], [2.0]), 4.0) == (8.0, -4.0)

    def test_perfect_fit(self):
        w = np.array([1.0, 2.0])
        loss, c = linreg_loss_grad(w, SparseVec([0, 1], [1.0, 1.0]), 3.0)
        assert loss == 0 and c == 0


class TestModel:
    def test_shapes(self):
        with pytest.raises(ValueError):
            LinearModel("softmax", np.zeros((1, 3)))
        with pytest.raises(ValueError):
            LinearModel("logistic", np.zeros((2, 3)))
        with pytest.raises(ValueError):
            LinearModel("poisson", np.zeros((1, 3)))
        assert LinearModel("linear", np.zeros(4)).weights.shape == (1, 4)

    def test_equality_is_exact(self):
        a = LinearModel("softmax", np.zeros((2, 2)))
        b = a.copy()
        assert a == b
        b.weights[0, 0] = 1e-300
        assert a != b

    def test_apply_update_touches_support_only(self):
        m = LinearModel("softmax", np.ones((2, 4)))
        apply_update(m, np.array([1.0, -1.0]), SparseVec([1, 3], [2.0, 1.0]), 0.5)
        np.testing.assert_array_equal(m.weights, [[1, 0, 1, 0.5], [1, 2, 1, 1.5]])


def _dense_loss(kind, W, xd, y):
    z = W @ xd
    if kind == "logistic":
        return float(np.logaddexp(0, z[0]) - y * z[0])
    if kind == "softmax":
        return float(np.logaddexp.reduce(z) - z[y])
    return 0.5 * float(y - z[0]) ** 2


@pytest.mark.parametrize("kind", ["logistic", "softmax", "linear"])
def test_gradient_finite_differences(kind):
    """Central differences (h=1e-6) against coeff * x, 200 random instances."""
    rng = np.random.default_rng({"logistic": 10, "softmax": 11, "linear": 12}[kind])
    worst = 0.0
    for _ in range(200):
        p = int(rng.integers(1, 11))
        L = int(rng.integers(2, 6)) if kind == "softmax" else 1
        W = rng.normal(size=(L, p))
        x = random_sparse(rng, p, 0.8)
        xd = x.to_dense(p)
        y = int(rng.integers(L if kind == "softmax" else 2)) if kind != "linear" else float(rng.normal())
        _, c = loss_grad(LinearModel(kind, W), x, y)
        analytic = np.outer(c, xd)
        numeric = np.zeros_like(W)
        h = 1e-6
        for idx in np.ndindex(*W.shape):
            Wp, Wm = W.copy(), W.copy()
            Wp[idx] += h
            Wm[idx] -= h
            numeric[idx] = (_dense_loss(kind, Wp, xd, y) - _dense_loss(kind, Wm, xd, y)) / (2 * h)
        scale = max(np.abs(analytic).max(), 1e-3)
        worst = max(worst, np.abs(numeric - analytic).max() / scale)
    assert worst <= 1e-5
