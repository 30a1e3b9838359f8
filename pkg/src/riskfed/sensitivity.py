"""Second-order curvature machinery for the central update.

Each client reports the Gram matrix of score gradients over its
tail-active samples. The server folds those into the aggregated
sensitivity matrix S = sum_k (n_k/n) (I + (c/n_k) Gram_k) and takes a
damped Newton-style step w - (S + eps*I)^{-1} g.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels
from .data import LabeledDataset
from .errors import AggregationError, DataError, NumericalError

#: Default damping added to the sensitivity matrix before solving. The
#: identity part of S already sums to the participating sample mass, so
#: this only needs to cover partial-participation shrinkage.
DEFAULT_EPSILON = 1e-3


@dataclass(frozen=True)
class ClientReport:
    """One client's per-round message to the server."""

    n_k: int
    gradient: np.ndarray
    gram: np.ndarray
    local_loss: float
    active_count: int


def client_gram(w: np.ndarray, data: LabeledDataset, beta: float) -> np.ndarray:
    """Sum of [x;1] outer products over tail-active samples (zero if none)."""
    if len(data) == 0:
        raise DataError("client dataset is empty")
    # gram is independent of the penalty weight; any positive c works
    _, _, gram, _, _ = _kernels.client_eval(
        data.features, data.labels, np.asarray(w, dtype=np.float64), beta, 1.0
    )
    return gram


def client_report(
    w: np.ndarray, data: LabeledDataset, beta: float, c: float
) -> ClientReport:
    """Evaluate loss, gradient, and Gram at w in one pass over the shard."""
    if len(data) == 0:
        raise DataError("client dataset is empty")
    loss, grad, gram, active, _ = _kernels.client_eval(
        data.features, data.labels, np.asarray(w, dtype=np.float64), beta, c
    )
    return ClientReport(
        n_k=len(data), gradient=grad, gram=gram, local_loss=loss, active_count=active
    )


def aggregate_sensitivity(
    reports: list[ClientReport], c: float, total_n: int
) -> np.ndarray:
    """Participation-weighted sensitivity sum_k (n_k/n)(I + (c/n_k) Gram_k)."""
    if not reports:
        raise AggregationError("no client reports to aggregate")
    if sum(r.n_k for r in reports) != total_n:
        raise AggregationError(
            f"report sizes sum to {sum(r.n_k for r in reports)}, expected {total_n}"
        )
    p = reports[0].gram.shape[0]
    s = np.zeros((p, p))
    identity_mass = 0.0
    for r in reports:
        identity_mass += r.n_k / total_n
        s += (c / total_n) * r.gram
    s[np.diag_indices(p)] += identity_mass
    return s


def central_update(
    w: np.ndarray, s: np.ndarray, g: np.ndarray, epsilon: float
) -> np.ndarray:
    """One damped second-order step: w - (S + eps*I)^{-1} g.

    Solves via Cholesky factorization with one refinement pass if the
    residual exceeds 1e-8 * max(1, ||g||).
    """
    if epsilon < 0:
        raise NumericalError(f"damping must be nonnegative, got {epsilon}")
    a = np.array(s, dtype=np.float64)
    a[np.diag_indices(a.shape[0])] += epsilon
    try:
        factor = scipy.linalg.cho_factor(a, lower=True)
        step = scipy.linalg.cho_solve(factor, g)
    except scipy.linalg.LinAlgError as exc:
        smallest = float(np.linalg.eigvalsh(a)[0])
        raise NumericalError(
            f"sensitivity system is not positive definite "
            f"(smallest pivot estimate {smallest:.3e}): {exc}"
        ) from exc
    tol = 1e-8 * max(1.0, float(np.linalg.norm(g)))
    residual = g - a @ step
    if float(np.linalg.norm(residual)) > tol:
        step = step + scipy.linalg.cho_solve(factor, residual)
    return w - step
