"""Matrix exponential by uniformization, and transient distributions.

e^{Qt} = sum_n Poisson(n; L t) P^n with P = I + Q/L.  Every P^n is stochastic,
so cutting the sum at M leaves a max-norm error no larger than the Poisson
tail mass beyond M, which is bounded with a Chernoff estimate.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from .errors import OverflowHorizon
from .model import GeneratorMatrix, ProbVector

RATE_INFLATION = 1.05
MAX_POISSON_MEAN = 1e6
MAX_SEGMENTS = 64
# Poisson mean handled by one segment before splitting the lag
SEGMENT_LOAD = 1000.0
DEFAULT_TOL = 1e-14


def poisson_tail_bound(mean: float, m: int) -> float:
    """Chernoff bound on P(N >= m) for N ~ Poisson(mean); valid for m > mean."""
    if m <= mean:
        return 1.0
    return math.exp(-mean + m - m * (math.log(m) - math.log(mean)))


def truncation_point(mean: float, tol: float) -> int:
    """Smallest M with P(N > M) <= tol according to the Chernoff bound."""
    m = max(1, math.floor(mean) + 1)
    # coarse steps of about sqrt(mean), then bisect
    step = max(1, int(math.sqrt(mean)) + 1)
    while poisson_tail_bound(mean, m) > tol:
        m += step
    lo = m - step
    while lo + 1 < m:
        mid = (lo + m) // 2
        if mid > mean and poisson_tail_bound(mean, mid) <= tol:
            m = mid
        else:
            lo = mid
    return m - 1


def _uniformized_sum(P: np.ndarray, mean: float, tol: float) -> np.ndarray:
    n = P.shape[0]
    M = truncation_point(mean, tol)
    k = np.arange(M + 1)
    weights = np.exp(-mean + k * math.log(mean) - gammaln(k + 1))
    out = weights[0] * np.eye(n)
    term = np.eye(n)
    for w in weights[1:]:
        term = term @ P
        out += w * term
    return out


def expm_uniformization(Q: GeneratorMatrix, tau: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Transition matrix e^{Q tau} with max-norm truncation error at most ``tol``.

    Long lags are cut into at most 64 equal segments whose exponentials are
    multiplied together (no squaring); truncation errors add across segments
    so each one is computed to ``tol / segments``.
    """
    if tau < 0 or not math.isfinite(tau):
        raise ValueError(f"lag must be finite and non-negative, got {tau!r}")
    if not 0 < tol <= 1e-6:
        raise ValueError(f"tol must lie in (0, 1e-6], got {tol!r}")
    q = Q.entries
    n = q.shape[0]
    if tau == 0:
        return np.eye(n)
    lam = RATE_INFLATION * np.abs(np.diag(q)).max()
    mean = lam * tau
    if mean > MAX_POISSON_MEAN:
        raise OverflowHorizon(f"uniformized Poisson mean {mean:.4g} exceeds {MAX_POISSON_MEAN:.0e}")
    P = np.eye(n) + q / lam
    segments = min(MAX_SEGMENTS, max(1, math.ceil(mean / SEGMENT_LOAD)))
    seg = _uniformized_sum(P, mean / segments, tol / segments)
    out = seg
    for _ in range(segments - 1):
        out = out @ seg
    return out


def transient_distribution(pi0: ProbVector, Q: GeneratorMatrix, tau: float,
                           tol: float = DEFAULT_TOL) -> ProbVector:
    if len(pi0) != Q.n:
        raise ValueError(f"{len(pi0)} initial probabilities for {Q.n} states")
    return ProbVector.from_computed(pi0.probs @ expm_uniformization(Q, tau, tol))
