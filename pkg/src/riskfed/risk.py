"""Empirical loss distribution, tail threshold, and tail-risk measures.

A risk vector holds one risk per sample at fixed weights. The threshold
q is the order statistic of rank ceil(beta*n), i.e. the smallest value
whose empirical CDF reaches beta. The tail is the set of samples whose
risk strictly exceeds q; the distortion measure is the average risk over
that tail, and the hinge surrogate is the mean positive part of (risk - q).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import quantile_rank
from .errors import ConfigurationError, DataError
from .model import predict


@dataclass(frozen=True)
class TailThreshold:
    """Threshold value q at level beta plus the strict-exceedance index set."""

    q: float
    beta: float
    tail_indices: np.ndarray


def _as_risks(risks) -> np.ndarray:
    risks = np.asarray(risks, dtype=np.float64)
    if risks.ndim != 1 or risks.size == 0:
        raise DataError("risk vector must be nonempty and 1-D")
    return risks


def _check_beta(beta: float) -> None:
    if not 0.0 < beta < 1.0:
        raise ConfigurationError(f"beta must lie in (0, 1), got {beta}")


def sample_risk(w: np.ndarray, x: np.ndarray, y: float) -> float:
    """Per-sample risk -y * f(w, x); negative iff the score sign matches y."""
    if y not in (-1, 1):
        raise DataError(f"label must be -1 or +1, got {y!r}")
    return -float(y) * predict(w, x)


def empirical_cdf(risks, alpha: float) -> float:
    """Fraction of risks <= alpha (inclusive)."""
    risks = _as_risks(risks)
    return float(np.count_nonzero(risks <= alpha)) / risks.size


def beta_quantile(risks, beta: float) -> float:
    """Smallest risk value whose empirical CDF reaches beta."""
    risks = _as_risks(risks)
    _check_beta(beta)
    k = quantile_rank(risks.size, beta)
    return float(np.partition(risks, k - 1)[k - 1])


def tail_threshold(risks, beta: float) -> TailThreshold:
    """Threshold q and the indices of samples with risk strictly above it."""
    risks = _as_risks(risks)
    q = beta_quantile(risks, beta)
    indices = np.flatnonzero(risks > q)
    return TailThreshold(q=q, beta=beta, tail_indices=indices)


def distortion_risk(risks, beta: float) -> float:
    """Average risk over the tail; returns q itself when the tail is empty."""
    risks = _as_risks(risks)
    t = tail_threshold(risks, beta)
    if t.tail_indices.size == 0:
        return t.q
    return float(np.mean(risks[t.tail_indices]))


def hinge_surrogate(risks, q: float) -> float:
    """Mean positive part of (risk - q); always nonnegative."""
    risks = _as_risks(risks)
    return float(np.sum(np.maximum(0.0, risks - q))) / risks.size
