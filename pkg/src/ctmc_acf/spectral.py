"""Residue (spectral projector) expansion of a generator.

For a diagonalizable Q with right eigenvectors g_k (columns) and left
eigenvectors f_k (rows) normalised so that f_j g_k = [j == k], the residue
matrices E_k = g_k f_k give

    Q = sum_k gamma_k E_k,        e^{Q t} = sum_k e^{gamma_k t} E_k.

The zero eigenvalue always comes last and its residue is the matrix whose
rows all equal the stationary distribution.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import DegenerateSpectrum, ImaginaryResidueTooLarge
from .model import GeneratorMatrix, ProbVector, stationary_distribution

GAP_TOL = 1e-8
ZERO_EIG_TOL = 1e-10
INVARIANT_TOL = 1e-9
IMAG_TOL = 1e-9
CLAMP_TOL = 1e-9


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    residues: np.ndarray  # shape (N, N, N); residues[k] pairs with eigenvalues[k]
    zero_index: int
    left_null_vector: ProbVector
    is_diagonalizable_simple: bool = True

    @property
    def nonzero_indices(self):
        return [k for k in range(len(self.eigenvalues)) if k != self.zero_index]

    @property
    def slowest_rate(self) -> float:
        """Smallest |Re gamma| over the non-zero eigenvalues."""
        return float(np.abs(self.eigenvalues[self.nonzero_indices].real).min())


def _sort_key(g: complex):
    return (-round(abs(g.real), 12), -round(abs(g.imag), 12), g.imag)


def decompose(Q: GeneratorMatrix) -> SpectralDecomposition:
    q = Q.entries
    n = q.shape[0]
    gam, V = la.eig(q)

    scale = np.abs(gam).max()
    diffs = np.abs(gam[:, None] - gam[None, :]) + np.diag(np.full(n, np.inf))
    if diffs.min() < GAP_TOL * scale:
        i, j = np.unravel_index(np.argmin(diffs), diffs.shape)
        raise DegenerateSpectrum(
            f"eigenvalues {gam[i]:.6g} and {gam[j]:.6g} closer than {GAP_TOL:g}*max|gamma|"
        )

    try:
        W = la.inv(V)  # rows are left eigenvectors, biorthonormal to the columns of V
    except la.LinAlgError:
        raise DegenerateSpectrum("eigenvector matrix is singular") from None

    z = int(np.argmin(np.abs(gam)))
    if abs(gam[z]) > ZERO_EIG_TOL * max(1.0, scale):
        raise DegenerateSpectrum(f"no eigenvalue within tolerance of zero (closest {gam[z]:.3e})")

    order = sorted((k for k in range(n) if k != z), key=lambda k: _sort_key(gam[k])) + [z]
    gam = gam[order].astype(complex)
    gam[-1] = 0.0
    residues = np.einsum("ik,kj->kij", V[:, order], W[order, :])

    pi = stationary_distribution(Q)
    exact_zero = np.outer(np.ones(n), pi.probs)
    if np.abs(residues[-1] - exact_zero).max() > INVARIANT_TOL:
        raise DegenerateSpectrum("zero-eigenvalue residue does not match the stationary distribution")
    residues[-1] = exact_zero

    if np.any(gam[:-1].real >= 0):
        raise DegenerateSpectrum("non-zero eigenvalue with non-negative real part")

    decomp = SpectralDecomposition(gam, residues, n - 1, pi)
    _check_invariants(decomp, q)
    return decomp


def _check_invariants(d: SpectralDecomposition, q: np.ndarray):
    n = q.shape[0]
    E = d.residues
    if np.abs(E.sum(axis=0) - np.eye(n)).max() > INVARIANT_TOL:
        raise DegenerateSpectrum("residues do not sum to the identity")
    if np.abs(np.einsum("k,kij->ij", d.eigenvalues, E) - q).max() > INVARIANT_TOL:
        raise DegenerateSpectrum("residues do not reconstruct Q")
    prod = np.einsum("jab,kbc->jkac", E, E)
    target = np.zeros_like(prod)
    idx = np.arange(n)
    target[idx, idx] = E
    if np.abs(prod - target).max() > INVARIANT_TOL:
        raise DegenerateSpectrum("residues are not mutually orthogonal idempotents")


def expm_spectral(decomp: SpectralDecomposition, tau: float) -> np.ndarray:
    if tau < 0 or not np.isfinite(tau):
        raise ValueError(f"lag must be finite and non-negative, got {tau!r}")
    weights = np.exp(decomp.eigenvalues * tau)
    m = np.einsum("k,kij->ij", weights, decomp.residues)
    if np.abs(m.imag).max() > IMAG_TOL:
        raise ImaginaryResidueTooLarge(f"imaginary part {np.abs(m.imag).max():.3e} at tau={tau!r}")
    m = m.real
    m[(m < 0) & (m >= -CLAMP_TOL)] = 0.0
    m[(m > 1) & (m <= 1 + CLAMP_TOL)] = 1.0
    return m
