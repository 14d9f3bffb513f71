import io
import math

import numpy as np
import pytest

from gsaopt.data import Sample
from gsaopt.gsa import (
    GsaConfig,
    GsaState,
    StepTrace,
    greedy_step,
    greedy_step_linreg,
    greedy_step_logistic_binary,
    greedy_step_logistic_exact,
    greedy_step_softmax,
    gsa_step,
    gsa_train,
    running_mean_update,
    softmax_greedy_lambda,
)
from gsaopt.linalg import SparseVec
from gsaopt.models import LinearModel, logistic_forward, loss_grad, sigmoid, softmax_forward

from conftest import blobs, random_sparse

LN19 = math.log(19.0)
X1 = SparseVec([0], [1.0])


def literal_lambda(z, k, p_hat):
    """The approximation exactly as written, with unshifted exponentials."""
    e = np.exp(z)
    S = e.sum()
    b = np.exp(e / S)
    num = -p_hat * S + e[k]
    den = p_hat * S - p_hat * float(e @ b) + e[k] - math.e * e[k] / b[k]
    return num / den


class TestConfig:
    @pytest.mark.parametrize("p_hat", [0.5, 1.0, 0.3])
    def test_p_hat_range(self, p_hat):
        with pytest.raises(ValueError):
            GsaConfig(p_hat=p_hat)

    def test_defaults(self):
        c = GsaConfig()
        assert (c.p_hat, c.clamp_negative, c.eta_max) == (0.95, True, 1e4)


class TestLinreg:
    def test_examples(self):
        assert greedy_step_linreg(X1) == 1.0
        assert greedy_step_linreg(SparseVec([0, 1], [3.0, 4.0])) == pytest.approx(0.04)

    def test_zero_norm_skips(self):
        assert greedy_step_linreg(SparseVec([], [])) is None

    def test_step_zeroes_residual(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            w = rng.normal(size=6)
            x = random_sparse(rng, 6, 0.8)
            if x.nnz == 0:
                continue
            y = float(rng.normal() * 5)
            m = LinearModel("linear", w.copy())
            _, c = loss_grad(m, x, y)
            eta = greedy_step_linreg(x)
            m.weights[0, x.indices] -= eta * c[0] * x.values
            r = y - float(m.weights[0] @ x.to_dense(6))
            assert abs(r) <= 1e-12 * max(1.0, abs(y))


class TestLogisticExact:
    def test_zero_start(self):
        eta = greedy_step_logistic_exact(np.zeros(1), X1, 1)
        assert eta == pytest.approx(LN19 / 0.5, rel=1e-12)
        w = np.array([eta * 0.5])
        assert logistic_forward(w, X1) == pytest.approx(0.95, abs=1e-12)

    def test_already_at_threshold(self):
        assert greedy_step_logistic_exact(np.array([LN19]), X1, 1) == pytest.approx(0.0, abs=1e-12)

    def test_negative_label(self):
        x = SparseVec([0], [2.0])
        eta = greedy_step_logistic_exact(np.zeros(1), x, 0)
        assert eta == pytest.approx(-LN19 / (4 * -0.5), rel=1e-12)
        w = np.zeros(1) - eta * (0.5 - 0) * x.to_dense(1)
        assert logistic_forward(w, x) == pytest.approx(0.05, abs=1e-12)

    def test_skips(self):
        assert greedy_step_logistic_exact(np.zeros(1), SparseVec([], []), 1) is None
        assert greedy_step_logistic_exact(np.array([100.0]), X1, 1) is None

    def test_reaches_target_random(self):
        rng = np.random.default_rng(4)
        for _ in range(500):
            w = rng.normal(size=5)
            x = random_sparse(rng, 5, 0.9)
            if x.nnz == 0:
                continue
            y = int(rng.integers(2))
            eta = greedy_step_logistic_exact(w, x, y)
            if eta is None:
                continue
            p = logistic_forward(w, x)
            w2 = w - eta * (p - y) * x.to_dense(5)
            target = 0.95 if y == 1 else 0.05
            assert logistic_forward(w2, x) == pytest.approx(target, abs=1e-9)


class TestSoftmaxStep:
    def test_two_class_zero(self):
        lam = softmax_greedy_lambda(np.zeros(2), 0, 0.95)
        assert lam == pytest.approx(0.9 / 1.8812918, rel=1e-7)
        assert lam == pytest.approx(0.478395, abs=1e-6)
        assert greedy_step_softmax(np.zeros((2, 1)), X1, 0) == pytest.approx(lam)

    def test_at_threshold_is_zero(self):
        z = np.array([0.0, LN19])
        assert softmax_greedy_lambda(z, 1, 0.95) == pytest.approx(0.0, abs=1e-15)

    def test_beyond_threshold_clamped(self):
        W = np.array([[0.0], [10.0]])
        assert greedy_step_softmax(W, X1, 1) == 0.0
        assert greedy_step_softmax(W, X1, 1, clamp_negative=False) < 0

    def test_eta_max(self):
        x = SparseVec([0], [1e-4])
        assert greedy_step_softmax(np.zeros((2, 1)), x, 0, eta_max=10.0) == 10.0

    def test_zero_norm_skips(self):
        assert greedy_step_softmax(np.zeros((3, 2)), SparseVec([], []), 0) is None

    def test_shift_invariant_and_matches_literal(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            L = int(rng.integers(2, 8))
            z = rng.normal(size=L) * 3
            k = int(rng.integers(L))
            got = softmax_greedy_lambda(z, k, 0.95)
            assert got == pytest.approx(literal_lambda(z, k, 0.95), rel=1e-10, abs=1e-13)
            assert got == pytest.approx(softmax_greedy_lambda(z + 123.4, k, 0.95), rel=1e-10, abs=1e-13)


class TestBinaryStep:
    def test_zero_start(self):
        eta = greedy_step_logistic_binary(np.zeros(1), X1, 1)
        assert eta == pytest.approx(0.956790, abs=1e-6)
        assert eta == pytest.approx(2 * softmax_greedy_lambda(np.zeros(2), 1, 0.95), rel=1e-14)

    def test_at_threshold(self):
        assert greedy_step_logistic_binary(np.array([LN19]), X1, 1) == 0.0

    def test_twice_softmax_on_embedding(self):
        """Binary step equals 2x the two-row softmax step; 1000 cases, rel 1e-10."""
        rng = np.random.default_rng(6)
        for _ in range(1000):
            p = int(rng.integers(1, 8))
            w = rng.normal(size=p) * 2
            x = random_sparse(rng, p, 0.8)
            if x.nnz == 0:
                continue
            y = int(rng.integers(2))
            kw = dict(clamp_negative=False, eta_max=math.inf)
            b = greedy_step_logistic_binary(w, x, y, **kw)
            W = np.vstack([np.zeros(p), w])  # rows (0, w): logit difference w.x
            s = greedy_step_softmax(W, x, y, **kw)
            assert b == pytest.approx(2 * s, rel=1e-10, abs=1e-15)


def test_step_bound_random_softmax():
    """eta x'x (e^{1/L} - 1) <= |p_hat - p_k| + 1e-9 on 1000 random steps."""
    rng = np.random.default_rng(7)
    for _ in range(1000):
        L = int(rng.integers(2, 11))
        p = int(rng.integers(1, 6))
        W = rng.normal(size=(L, p)) * 2
        x = random_sparse(rng, p, 0.9)
        if x.nnz == 0:
            continue
        k = int(rng.integers(L))
        eta = greedy_step_softmax(W, x, k)
        pk = softmax_forward(W, x)[k]
        sq = float(x.values @ x.values)
        assert eta * sq * (math.exp(1 / L) - 1) <= abs(0.95 - pk) + 1e-9


@pytest.mark.parametrize("L", [21, 30, 50])
def test_step_bound_fails_for_many_classes(L):
    """Known limit of the bound: many classes, true class near zero, rest uniform."""
    z = np.zeros(L)
    z[0] = -50.0
    lam = softmax_greedy_lambda(z, 0, 0.95)
    pk = softmax_forward(z.reshape(L, 1), X1)[0]
    assert lam * (math.exp(1 / L) - 1) > abs(0.95 - pk) + 1e-9


class TestRunningMean:
    def test_examples(self):
        s = running_mean_update(GsaState(), 5.0)
        assert (s.mean_eta, s.t) == (5.0, 1)
        s = GsaState()
        for e in (1.0, 2.0, 6.0):
            s = running_mean_update(s, e)
        assert s.mean_eta == 3.0

    def test_skip_unchanged(self):
        s = GsaState(2.0, 4)
        assert running_mean_update(s, None) is s

    def test_million_updates_match_two_pass_mean(self):
        etas = np.random.default_rng(8).random(10**6)
        s = GsaState()
        for e in etas.tolist():
            s = running_mean_update(s, e)
        assert s.t == 10**6
        assert abs(s.mean_eta - math.fsum(etas) / etas.size) <= 1e-10


class TestGsaStep:
    def test_first_logistic_step(self):
        m = LinearModel("logistic", np.zeros((1, 1)))
        m, s = gsa_step(m, GsaState(), GsaConfig(), Sample(X1, 1))
        assert s.mean_eta == pytest.approx(0.956790, abs=1e-6)
        assert m.weights[0, 0] == pytest.approx(0.478395, abs=1e-6)

    def test_second_step_uses_mean(self):
        cfg = GsaConfig()
        m = LinearModel("logistic", np.zeros((1, 1)))
        m, s1 = gsa_step(m, GsaState(), cfg, Sample(X1, 1))
        w1 = m.weights[0, 0]
        eta2 = greedy_step(m, X1, 1, cfg)
        m, s2 = gsa_step(m, s1, cfg, Sample(X1, 1))
        assert s2.mean_eta == pytest.approx((s1.mean_eta + eta2) / 2, rel=1e-15)
        assert m.weights[0, 0] == pytest.approx(w1 + s2.mean_eta * (1 - sigmoid(w1)), rel=1e-14)

    def test_saturated_sample_leaves_model(self):
        m = LinearModel("logistic", np.array([[800.0]]))
        before = m.copy()
        m, s = gsa_step(m, GsaState(0.5, 3), GsaConfig(logistic_rule="exact"), Sample(X1, 1))
        assert m == before and s == GsaState(0.5, 3)

    def test_empty_features_skip_but_no_crash(self):
        m = LinearModel("softmax", np.zeros((3, 2)))
        m, s = gsa_step(m, GsaState(), GsaConfig(), Sample(SparseVec([], [], 2), 0))
        assert s == GsaState() and not m.weights.any()

    def test_linear_first_step_fits_sample(self):
        x = SparseVec([0, 1], [1.0, 2.0])
        m = LinearModel("linear", np.zeros((1, 2)))
        m, _ = gsa_step(m, GsaState(), GsaConfig(), Sample(x, 3.0))
        assert float(m.weights[0] @ x.to_dense(2)) == pytest.approx(3.0, abs=1e-12)


class TestTrain:
    def test_rejects_zero_passes(self, toy_blobs):
        with pytest.raises(ValueError):
            gsa_train(LinearModel.for_dataset("logistic", toy_blobs), toy_blobs, 0)

    def test_deterministic(self, toy_blobs):
        a = gsa_train(LinearModel.for_dataset("logistic", toy_blobs), toy_blobs, 2, seed=9)
        b = gsa_train(LinearModel.for_dataset("logistic", toy_blobs), toy_blobs, 2, seed=9)
        assert a[0] == b[0] and a[1] == b[1]

    def test_state_persists_and_hook(self, toy_blobs):
        calls = []
        m, s, trace = gsa_train(
            LinearModel.for_dataset("logistic", toy_blobs), toy_blobs, 3,
            eval_hook=lambda k, mm: calls.append(k),
        )
        assert calls == [1, 2, 3]
        assert len(trace) == 3 * len(toy_blobs)
        accepted = [e for e in trace.eta if e is not None]
        assert s.t == len(accepted)
        assert s.mean_eta == pytest.approx(math.fsum(accepted) / len(accepted), rel=1e-10)
        assert s.mean_eta <= max(accepted)

    def test_loss_decreases_on_blobs(self):
        ds = blobs(200, seed=1)
        losses = {}

        def hook(k, m):
            losses[k] = np.mean([loss_grad(m, s.features, s.label)[0] for s in ds.samples])

        gsa_train(LinearModel.for_dataset("logistic", ds), ds, 3, eval_hook=hook)
        assert losses[3] < losses[1]

    def test_softmax_runs(self):
        ds = blobs(150, seed=2, n_classes=3)
        m, s, _ = gsa_train(LinearModel.for_dataset("softmax", ds), ds, 2)
        assert np.all(np.isfinite(m.weights)) and s.mean_eta > 0

    def test_trace_csv(self):
        t = StepTrace([0.5, None], [0.5, 0.5])
        buf = io.StringIO()
        t.to_csv(buf)
        assert buf.getvalue() == "step,eta,mean_eta\n1,0.5,0.5\n2,,0.5\n"
