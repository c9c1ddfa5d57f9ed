"""L^p classification of an autocorrelation function.

A non-zero plateau c makes int |R|^p diverge for every finite p, while the
decaying part f = R - c is a finite sum of exponentials and lies in every
L^p.  The report therefore carries the class, sup |R| over tau >= 0 and the
finite norms (int_0^inf |f|^p)^(1/p).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .acf import ExpMixture, acf_value, constant_term, try_acf_mixture
from .model import GeneratorMatrix, ProbVector, stationary_distribution
from .transient import expm_uniformization

C_ZERO_TOL = 1e-10
NOT_IN_LP = "NotInLpAnyP"
IN_LP = "InLpAllP"
HORIZON_TIME_CONSTANTS = 50.0
GRID_POINTS = 4001
TAIL_REL_TOL = 1e-12
MAX_PANELS = 400


@dataclass(frozen=True)
class LpReport:
    c: float
    integrable_class: str
    sup_norm: float
    f_lp_values: dict | None
    c_zero_tolerance: float = C_ZERO_TOL
    mixture_available: bool = True
    notes: tuple = field(default=())

    def to_json_dict(self) -> dict:
        d = {"c": self.c, "class": self.integrable_class, "sup_norm": self.sup_norm}
        if self.f_lp_values is None:
            d["f_lp"] = None
            d["f_lp_status"] = "MixtureUnavailable"
        else:
            d["f_lp"] = {_p_key(p): v for p, v in self.f_lp_values.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def _p_key(p) -> str:
    p = float(p)
    return str(int(p)) if p.is_integer() else repr(p)


def _class_of(c: float, tol: float) -> str:
    return NOT_IN_LP if abs(c) > tol else IN_LP


def _check_p(p_list):
    ps = [float(p) for p in p_list]
    bad = [p for p in ps if not p >= 1 or not math.isfinite(p)]
    if bad:
        raise ValueError(f"every p must be a finite number >= 1, got {bad}")
    return ps


def _sup_on_grid(func, horizon: float, fast_scale: float) -> float:
    """max |func| on [0, horizon]: dense grid, then bounded scalar refinement."""
    lin = np.linspace(0.0, horizon, GRID_POINTS)
    lo = min(fast_scale, horizon) * 1e-3
    log = np.geomspace(lo, horizon, GRID_POINTS // 4)
    grid = np.unique(np.concatenate([lin, log]))
    vals = np.abs(func(grid))
    i = int(np.argmax(vals))
    best = float(vals[i])
    if 0 < i < grid.size - 1:
        res = minimize_scalar(
            lambda t: -abs(float(func(t))),
            bounds=(grid[i - 1], grid[i + 1]),
            method="bounded",
            options={"xatol": 1e-14 * max(1.0, grid[i + 1])},
        )
        best = max(best, -float(res.fun))
    return best


def sup_norm(mixture: ExpMixture) -> float:
    """sup over tau >= 0 of |R(tau)|, including the plateau reached at infinity."""
    if mixture.rates.size == 0:
        return abs(mixture.constant_c)
    horizon = HORIZON_TIME_CONSTANTS / mixture.slowest_rate
    fast = 1.0 / np.abs(mixture.rates.real).max()
    return max(_sup_on_grid(mixture.evaluate, horizon, fast), abs(mixture.constant_c))


def decaying_lp_norm(mixture: ExpMixture, p: float) -> float:
    """(int_0^inf |f(tau)|^p dtau)^(1/p) for the decaying part f.

    Integrates over geometrically growing panels and stops once the bound
    A^p exp(-p rho T) / (p rho) on the remaining tail, with A = sum |a_k| and
    rho the slowest decay rate, drops below 1e-12 of the accumulated value.
    """
    amp = float(np.abs(mixture.weights).sum())
    if amp == 0.0:
        return 0.0
    rho = mixture.slowest_rate
    fast = float(np.abs(mixture.rates.real).max())

    def integrand(t):
        return abs(mixture.decaying_part(t)) ** p

    total = 0.0
    a, width = 0.0, 1.0 / fast
    for _ in range(MAX_PANELS):
        b = a + width
        val, _err = quad(integrand, a, b, epsabs=0.0, epsrel=1e-13, limit=200)
        total += val
        a, width = b, min(2.0 * width, 1.0 / rho)
        log_tail = p * math.log(amp) - p * rho * a - math.log(p * rho)
        if total > 0 and log_tail <= math.log(TAIL_REL_TOL * total):
            break
        if total == 0 and log_tail < -700:
            break
    else:
        raise RuntimeError("tail bound not reached; mixture rates badly scaled")
    return total ** (1.0 / p)


def classify(mixture: ExpMixture, p_list=(1, 2, 3), c_tol: float = C_ZERO_TOL) -> LpReport:
    ps = _check_p(p_list)
    c = float(mixture.constant_c)
    return LpReport(
        c=c,
        integrable_class=_class_of(c, c_tol),
        sup_norm=sup_norm(mixture),
        f_lp_values={p: decaying_lp_norm(mixture, p) for p in ps},
        c_zero_tolerance=c_tol,
    )


def _fallback_sup(Q: GeneratorMatrix, pi0: ProbVector) -> float:
    eig = np.linalg.eigvals(Q.entries)
    nonzero = np.abs(eig.real)[np.argsort(np.abs(eig))[1:]]
    horizon = HORIZON_TIME_CONSTANTS / nonzero.min()
    step = horizon / (GRID_POINTS - 1)
    s = Q.values
    P = expm_uniformization(Q, step)
    row = s * pi0.probs
    vals = np.empty(GRID_POINTS)
    for k in range(GRID_POINTS):
        vals[k] = row @ s
        row = row @ P
    vals = np.abs(vals)
    i = int(np.argmax(vals))
    best = float(vals[i])
    if 0 < i < GRID_POINTS - 1:
        res = minimize_scalar(
            lambda t: -abs(acf_value(Q, pi0, t)),
            bounds=((i - 1) * step, (i + 1) * step),
            method="bounded",
        )
        best = max(best, -float(res.fun))
    return best


def classify_chain(Q: GeneratorMatrix, pi0: ProbVector, p_list=(1, 2, 3),
                   c_tol: float = C_ZERO_TOL) -> LpReport:
    """Classify a chain, falling back to grid evaluation for degenerate spectra."""
    ps = _check_p(p_list)
    mixture = try_acf_mixture(Q, pi0)
    if mixture is not None:
        return classify(mixture, ps, c_tol)
    c = constant_term(Q, pi0)
    return LpReport(
        c=c,
        integrable_class=_class_of(c, c_tol),
        sup_norm=max(_fallback_sup(Q, pi0), abs(c)),
        f_lp_values=None,
        c_zero_tolerance=c_tol,
        mixture_available=False,
        notes=("MixtureUnavailable: degenerate spectrum, f_lp omitted",),
    )


def zero_plateau_nonuniform(Q: GeneratorMatrix, tol: float = C_ZERO_TOL) -> bool:
    """True if the stationary mean is zero although the stationary law is not uniform.

    Such a chain has c = 0 from stationary start without a uniform
    equilibrium.
    """
    pi = stationary_distribution(Q).probs
    mean = float(pi @ Q.values)
    return abs(mean) <= tol and np.abs(pi - 1.0 / pi.size).max() > tol


def zero_plateau_candidates(chains, tol: float = C_ZERO_TOL):
    return [Q for Q in chains if zero_plateau_nonuniform(Q, tol)]
