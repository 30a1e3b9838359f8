import subprocess
import sys

import numpy as np
import pytest

from riskfed import _kernels
from riskfed.risk import beta_quantile, empirical_cdf

HAVE_NUMBA = _kernels.client_eval_numba is not None

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba backend unavailable")


def random_shard(rng, n=None, d=None):
    n = n or int(rng.integers(2, 60))
    d = d or int(rng.integers(2, 12))
    features = np.ascontiguousarray(rng.standard_normal((n, d)))
    labels = rng.choice([-1.0, 1.0], n)
    w = rng.standard_normal(d + 1)
    return features, labels, w


class TestQuantileRank:
    def test_matches_smallest_rank_reaching_beta(self):
        rng = np.random.default_rng(2)
        for _ in range(300):
            n = int(rng.integers(1, 100))
            beta = float(rng.uniform(0.001, 0.999))
            k = _kernels.quantile_rank(n, beta)
            assert k / n >= beta
            if k > 1:
                assert (k - 1) / n < beta

    def test_consistent_with_empirical_cdf(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            n = int(rng.integers(1, 40))
            risks = rng.standard_normal(n)
            beta = float(rng.uniform(0.01, 0.99))
            q = beta_quantile(risks, beta)
            assert empirical_cdf(risks, q) >= beta


class TestNumpyBackendAgainstComposition:
    def test_client_eval_matches_independent_recompute(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            features, labels, w = random_shard(rng)
            beta = float(rng.uniform(0.2, 0.9))
            c = float(rng.uniform(0.2, 3.0))
            loss, grad, gram, active, q = _kernels.client_eval_numpy(
                features, labels, w, beta, c
            )
            n, d = features.shape
            risks = -labels * (features @ w[:d] + w[d])
            assert q == beta_quantile(risks, beta)
            mask = risks > q
            assert active == int(np.count_nonzero(mask))
            hinge = float(np.sum(np.maximum(0.0, risks - q))) / n
            np.testing.assert_allclose(loss, 0.5 * w @ w + c * hinge, rtol=1e-12)
            xb = np.hstack([features, np.ones((n, 1))])
            expected_grad = w - (c / n) * (xb[mask].T @ labels[mask]
                                           if mask.any() else np.zeros(d + 1))
            np.testing.assert_allclose(grad, expected_grad, atol=1e-12)
            expected_gram = xb[mask].T @ xb[mask]
            np.testing.assert_allclose(gram, expected_gram, atol=1e-12)

    def test_local_sgd_matches_manual_loop(self):
        rng = np.random.default_rng(11)
        features, labels, w0 = random_shard(rng, n=25, d=4)
        anchor = rng.standard_normal(5)
        beta, c, lr, mu, epochs = 0.7, 1.3, 0.05, 0.4, 6
        got = _kernels.local_sgd_numpy(features, labels, w0, anchor, beta, c,
                                       epochs, lr, mu)
        n, d = features.shape
        xb = np.hstack([features, np.ones((n, 1))])
        w = w0.copy()
        for _ in range(epochs):
            risks = -labels * (xb @ w)
            q = beta_quantile(risks, beta)
            mask = risks > q
            g = w + mu * (w - anchor)
            if mask.any():
                g = g - (c / n) * (xb[mask].T @ labels[mask])
            w = w - lr * g
        np.testing.assert_allclose(got, w, atol=1e-12)


@needs_numba
class TestBackendParity:
    def test_client_eval(self):
        rng = np.random.default_rng(13)
        for _ in range(40):
            features, labels, w = random_shard(rng)
            beta = float(rng.uniform(0.2, 0.9))
            c = float(rng.uniform(0.2, 3.0))
            out_np = _kernels.client_eval_numpy(features, labels, w, beta, c)
            out_nb = _kernels.client_eval_numba(features, labels, w, beta, c)
            assert out_np[3] == out_nb[3]  # active counts agree
            for a, b in zip(out_np, out_nb):
                np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-12)

    def test_local_loss_eval(self):
        rng = np.random.default_rng(17)
        for _ in range(40):
            features, labels, w = random_shard(rng)
            out_np = _kernels.local_loss_eval_numpy(features, labels, w, 0.8, 1.0)
            out_nb = _kernels.local_loss_eval_numba(features, labels, w, 0.8, 1.0)
            np.testing.assert_allclose(out_np, out_nb, rtol=1e-9, atol=1e-12)

    def test_local_sgd(self):
        rng = np.random.default_rng(19)
        for _ in range(20):
            features, labels, w0 = random_shard(rng, n=30)
            anchor = np.zeros_like(w0)
            out_np = _kernels.local_sgd_numpy(features, labels, w0, anchor,
                                              0.8, 1.0, 5, 0.05, 0.1)
            out_nb = _kernels.local_sgd_numba(features, labels, w0, anchor,
                                              0.8, 1.0, 5, 0.05, 0.1)
            np.testing.assert_allclose(out_np, out_nb, rtol=1e-9, atol=1e-12)

    def test_linear_scores(self):
        rng = np.random.default_rng(23)
        features, labels, w = random_shard(rng, n=100, d=50)
        np.testing.assert_allclose(
            _kernels.linear_scores_numpy(features, w),
            _kernels.linear_scores_numba(features, w),
            rtol=1e-12,
        )


class TestBackendSelection:
    def test_env_flag_forces_numpy(self):
        code = ("import riskfed._kernels as k; "
                "print(k.BACKEND, k.client_eval is k.client_eval_numpy)")
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True, text=True,
            env={"PATH": "/usr/bin:/bin", "RISKFED_BACKEND": "numpy"},
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.split() == ["numpy", "True"]

    def test_env_flag_rejects_unknown(self):
        out = subprocess.run(
            [sys.executable, "-c", "import riskfed._kernels"],
            capture_output=True, text=True,
            env={"PATH": "/usr/bin:/bin", "RISKFED_BACKEND": "cuda"},
        )
        assert out.returncode != 0

    def test_warmup_reports_backend(self):
        assert _kernels.warmup() == _kernels.BACKEND
