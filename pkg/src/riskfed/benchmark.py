"""Benchmark the numba kernels against the pure-numpy fallback.

Run with ``python -m riskfed.benchmark``. Times each hot kernel on a
production-sized client shard, reports the speedup, and checks that the
two backends agree numerically.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels
from .data import generate_synthetic


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _agreement(a, b):
    flat_a = np.concatenate([np.atleast_1d(np.asarray(x, dtype=np.float64)).ravel()
                             for x in a])
    flat_b = np.concatenate([np.atleast_1d(np.asarray(x, dtype=np.float64)).ravel()
                             for x in b])
    scale = np.maximum(1.0, np.abs(flat_a))
    return float(np.max(np.abs(flat_a - flat_b) / scale))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=1000)
    parser.add_argument("--dim", type=int, default=130)
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--epochs", type=int, default=5)
    args = parser.parse_args(argv)

    if _kernels.client_eval_numba is None:
        print("numba backend unavailable; nothing to compare")
        return 0

    data = generate_synthetic(args.samples, args.dim, 5, seed=0)
    rng = np.random.default_rng(1)
    w = rng.uniform(-0.01, 0.01, args.dim + 1)
    beta, c = 0.8, 1.0
    x, y = data.features, data.labels

    cases = [
        ("linear_scores",
         lambda: _kernels.linear_scores_numpy(x, w),
         lambda: _kernels.linear_scores_numba(x, w)),
        ("local_loss_eval",
         lambda: _kernels.local_loss_eval_numpy(x, y, w, beta, c),
         lambda: _kernels.local_loss_eval_numba(x, y, w, beta, c)),
        ("client_eval",
         lambda: _kernels.client_eval_numpy(x, y, w, beta, c),
         lambda: _kernels.client_eval_numba(x, y, w, beta, c)),
        (f"local_sgd ({args.epochs} epochs)",
         lambda: _kernels.local_sgd_numpy(x, y, w, w, beta, c, args.epochs, 0.05, 0.0),
         lambda: _kernels.local_sgd_numba(x, y, w, w, beta, c, args.epochs, 0.05, 0.0)),
    ]

    print(f"shard: {args.samples} samples x {args.dim} features, "
          f"best of {args.repeats} runs")
    print(f"{'kernel':<24} {'numpy':>12} {'numba':>12} {'speedup':>9} {'max rel diff':>14}")
    for name, np_fn, nb_fn in cases:
        nb_fn()  # compile outside the timed region
        t_np = _time(np_fn, args.repeats)
        t_nb = _time(nb_fn, args.repeats)
        out_np, out_nb = np_fn(), nb_fn()
        if not isinstance(out_np, tuple):
            out_np, out_nb = (out_np,), (out_nb,)
        diff = _agreement(out_np, out_nb)
        print(f"{name:<24} {t_np * 1e6:>10.1f}us {t_nb * 1e6:>10.1f}us "
              f"{t_np / t_nb:>8.2f}x {diff:>14.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
