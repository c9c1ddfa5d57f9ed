"""Autocorrelation R(tau) = E[X(0) X(tau)] of a finite-state chain.

The correlation is the non-centred one, taken from time 0 with X(0) drawn
from the initial distribution.  Negative lags are handled by reflection,
R(-tau) = R(tau).

With a diagonalizable generator the correlation splits into a plateau and a
mixture of decaying exponentials,

    R(tau) = c + sum_k a_k exp(gamma_k tau),
    a_k = sum_ij s_i s_j q_i (E_k)_ij,     c = E[X(0)] * E[Z],

where Z follows the stationary distribution.  For a +/-1 chain started in
equilibrium this gives R(tau) = c + (1 - c) exp(-(alpha + beta) tau) with
c = ((alpha - beta) / (alpha + beta))**2; R is *not* constant in tau even
though the marginal law of X(tau) is.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrum, ImaginaryResidueTooLarge
from .model import GeneratorMatrix, ProbVector, mean_value, stationary_distribution
from .spectral import decompose
from .transient import DEFAULT_TOL, expm_uniformization

IMAG_TOL = 1e-9

UNIT_STATIONARY_NOTE = (
    "note: for a +/-1 chain started in equilibrium the autocorrelation is not constant; "
    "R(tau) = c + (1 - c) exp(-(alpha+beta) tau) with c = ((alpha-beta)/(alpha+beta))^2, "
    "so R(0) = 1 and only the limit as tau -> inf equals c"
)


@dataclass(frozen=True)
class ExpMixture:
    """R(tau) = constant_c + sum_k weights[k] * exp(rates[k] * tau) for tau >= 0."""

    constant_c: float
    rates: np.ndarray
    weights: np.ndarray

    @property
    def terms(self):
        return list(zip(self.rates.tolist(), self.weights.tolist()))

    @property
    def slowest_rate(self) -> float:
        return float(np.abs(self.rates.real).min()) if self.rates.size else np.inf

    def decaying_part(self, tau):
        """f(tau) = R(tau) - c; accepts scalars or arrays, reflects negative lags."""
        t = np.abs(np.asarray(tau, dtype=float))
        vals = np.exp(np.multiply.outer(t, self.rates)) @ self.weights
        if np.size(vals) and np.abs(vals.imag).max() > IMAG_TOL:
            raise ImaginaryResidueTooLarge(f"mixture has imaginary part {np.abs(vals.imag).max():.3e}")
        out = vals.real
        return float(out) if out.ndim == 0 else out

    def evaluate(self, tau):
        return self.constant_c + self.decaying_part(tau)

    __call__ = evaluate


def _check_lag(tau):
    if tau < 0 or not np.isfinite(tau):
        raise ValueError(f"lag must be finite and non-negative, got {tau!r}")


def _weighted(Q: GeneratorMatrix, pi0: ProbVector):
    if len(pi0) != Q.n:
        raise ValueError(f"{len(pi0)} initial probabilities for {Q.n} states")
    s = Q.values
    return s * pi0.probs, s


def acf_value(Q: GeneratorMatrix, pi0: ProbVector, tau: float, tol: float = DEFAULT_TOL) -> float:
    """R(tau) through the uniformization path; defined for every valid chain."""
    _check_lag(tau)
    left, s = _weighted(Q, pi0)
    return float(left @ expm_uniformization(Q, tau, tol) @ s)


def acf_grid(Q: GeneratorMatrix, pi0: ProbVector, taus, tol: float = DEFAULT_TOL) -> np.ndarray:
    """R on a grid of lags (negative lags reflected), through uniformization."""
    taus = np.asarray(taus, dtype=float)
    cache = {}
    out = np.empty(taus.shape)
    for idx, t in np.ndenumerate(taus):
        a = abs(float(t))
        if a not in cache:
            cache[a] = acf_value(Q, pi0, a, tol)
        out[idx] = cache[a]
    return out


def acf_centered(Q: GeneratorMatrix, pi0: ProbVector, tau: float) -> float:
    """Covariance E[X(0) X(tau)] - E[X(0)] E[X(tau)]."""
    _check_lag(tau)
    left, s = _weighted(Q, pi0)
    P = expm_uniformization(Q, tau)
    return float(left @ P @ s - (pi0.probs @ s) * (pi0.probs @ P @ s))


def constant_term(Q: GeneratorMatrix, pi0: ProbVector) -> float:
    """Plateau c = E[X(0)] E[Z], the limit of R(tau) as tau grows."""
    return mean_value(pi0, Q.states) * mean_value(stationary_distribution(Q), Q.states)


def acf_mixture(Q: GeneratorMatrix, pi0: ProbVector) -> ExpMixture:
    """Closed-form mixture; raises DegenerateSpectrum when no residue expansion exists."""
    left, s = _weighted(Q, pi0)
    d = decompose(Q)
    nz = d.nonzero_indices
    weights = np.einsum("i,kij,j->k", left, d.residues[nz], s)
    return ExpMixture(constant_term(Q, pi0), d.eigenvalues[nz].copy(), weights)


def try_acf_mixture(Q: GeneratorMatrix, pi0: ProbVector):
    try:
        return acf_mixture(Q, pi0)
    except DegenerateSpectrum:
        return None


def unit_acf_closed_form(alpha: float, beta: float, q: float, tau: float) -> float:
    """R(tau) of the chain on (+1, -1) with P{X(0) = +1} = q, written out term by term."""
    if alpha <= 0 or beta <= 0:
        raise ValueError("rates must be positive")
    if not 0 <= q <= 1:
        raise ValueError("q must be a probability")
    _check_lag(tau)
    s = alpha + beta
    e = np.exp(-s * tau)
    return float(
        2 * (e * ((alpha - beta) / s) * q + e * (beta / s))
        + 2 * (((beta - alpha) / s) * q + alpha / s)
        - 1
    )


def is_stationary_unit_model(Q: GeneratorMatrix, pi0: ProbVector, tol: float = 1e-10) -> bool:
    if not Q.states.is_unit:
        return False
    return bool(np.abs(pi0.probs - stationary_distribution(Q).probs).max() <= tol)


def write_acf_csv(fh, taus, values, simulated=None):
    """Write ``tau,R`` rows at 17 significant digits; optional extra simulated column."""
    header = "tau,R" if simulated is None else "tau,R,R_sim"
    fh.write(header + "\n")
    for k, (t, r) in enumerate(zip(taus, values)):
        row = f"{t:.17g},{r:.17g}"
        if simulated is not None:
            row += f",{simulated[k]:.17g}"
        fh.write(row + "\n")


def acf_csv(taus, values, simulated=None) -> str:
    buf = io.StringIO()
    write_acf_csv(buf, taus, values, simulated)
    return buf.getvalue()
