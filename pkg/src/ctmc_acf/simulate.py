"""Monte Carlo sampling of chain paths and empirical autocorrelation.

Trajectory ``m`` under master seed ``s`` draws from its own Philox stream with
key ``s`` and counter offset ``m`` in the top word, so the draws seen by any
trajectory do not depend on how trajectories are grouped or scheduled.  Each
path consumes uniforms in a fixed order: one for the initial state, then a
(sojourn, destination) pair per epoch.
"""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import AbsorbingState, InsufficientVisits
from .model import GeneratorMatrix, ProbVector

SEED_MASK = (1 << 64) - 1
CHUNK = 4096


def trajectory_rng(master_seed: int, index: int) -> np.random.Generator:
    key = int(master_seed) & SEED_MASK
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, int(index)]))


def _cdf_rows(p: np.ndarray) -> np.ndarray:
    """Row-wise cumulative sums, forced to exactly 1 from the last positive entry on."""
    p = np.atleast_2d(p)
    cdf = np.cumsum(p, axis=1)
    for r in range(p.shape[0]):
        last = np.flatnonzero(p[r] > 0)[-1]
        cdf[r, last:] = 1.0
    return cdf


def _jump_cdf(Q: GeneratorMatrix) -> tuple:
    rates = Q.exit_rates
    if np.any(rates <= 0):
        raise AbsorbingState(f"state {int(np.argmin(rates)) + 1} has no outgoing transitions")
    jump = Q.entries / rates[:, None]
    np.fill_diagonal(jump, 0.0)
    return rates, _cdf_rows(jump)


def _pick(u: np.ndarray, cdf: np.ndarray) -> np.ndarray:
    return (u[:, None] >= cdf).sum(axis=1)


@dataclass(frozen=True)
class Trajectory:
    jump_times: np.ndarray  # start time of each epoch, jump_times[0] == 0
    visited_states: np.ndarray  # state index of each epoch
    horizon: float

    def sojourn_times(self) -> np.ndarray:
        """Durations of the completed epochs (the last one is censored by the horizon)."""
        return np.diff(self.jump_times)

    def state_at(self, t) -> np.ndarray:
        k = np.searchsorted(self.jump_times, t, side="right") - 1
        return self.visited_states[k]

    def occupancy(self, n_states: int) -> np.ndarray:
        """Fraction of [0, horizon] spent in each state."""
        ends = np.append(self.jump_times[1:], self.horizon)
        return np.bincount(self.visited_states, weights=ends - self.jump_times,
                           minlength=n_states) / self.horizon


def sample_trajectory(Q: GeneratorMatrix, pi0: ProbVector, horizon: float, seed: int,
                      index: int = 0) -> Trajectory:
    """One path on [0, horizon]; identical to trajectory ``index`` of :func:`empirical_acf`."""
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    rates, cdf = _jump_cdf(Q)
    init_cdf = _cdf_rows(pi0.probs)[0]
    rng = trajectory_rng(seed, index)
    block = 256
    buf = rng.random(block)
    pos = 0

    def draw():
        nonlocal buf, pos
        if pos == buf.size:
            buf, pos = rng.random(block), 0
        pos += 1
        return buf[pos - 1]

    state = int(np.sum(draw() >= init_cdf))
    t = 0.0
    times, states = [0.0], [state]
    while True:
        t += -math.log1p(-draw()) / rates[state]
        u = draw()
        if t >= horizon:
            break
        state = int(np.sum(u >= cdf[state]))
        times.append(t)
        states.append(state)
    return Trajectory(np.array(times), np.array(states, dtype=np.intp), float(horizon))


def stitched_sojourns(traj: Trajectory, state_index: int) -> np.ndarray:
    """Completed sojourns in one state, in visit order."""
    visits = np.flatnonzero(traj.visited_states == state_index)
    if visits.size < 2:
        raise InsufficientVisits(f"state {state_index} visited {visits.size} time(s)")
    complete = visits[visits < traj.jump_times.size - 1]
    return traj.jump_times[complete + 1] - traj.jump_times[complete]


def _block_width(expected_jumps: float) -> int:
    """Uniforms pre-drawn per path; stragglers get further blocks from their own stream."""
    return 1 + 2 * (int(expected_jumps + 6 * math.sqrt(expected_jumps)) + 4)


def _states_at_lags(pi0, lags, master_seed, start, stop, rates, cdf):
    """Vectorised sampling of trajectories start..stop-1, reading X at each lag."""
    n = stop - start
    gens = [trajectory_rng(master_seed, m) for m in range(start, stop)]
    t_max = float(np.max(lags))
    width = _block_width(float(rates.max()) * t_max)
    U = np.stack([g.random(width) for g in gens])

    state = _pick(U[:, 0], _cdf_rows(pi0.probs)[0].reshape(1, -1))
    out = np.empty((n, lags.size), dtype=np.intp)
    t = np.zeros(n)
    active = np.arange(n)
    col = 1
    while active.size:
        if col + 1 >= U.shape[1]:
            extra = np.zeros((n, width))
            extra[active] = np.stack([gens[a].random(width) for a in active])
            U = np.concatenate([U, extra], axis=1)
        st = state[active]
        t0 = t[active]
        t1 = t0 - np.log1p(-U[active, col]) / rates[st]
        inside = (lags[None, :] >= t0[:, None]) & (lags[None, :] < t1[:, None])
        rows, cols = np.nonzero(inside)
        out[active[rows], cols] = st[rows]
        nxt = np.sum(U[active, col + 1][:, None] >= cdf[st], axis=1)
        state[active] = nxt
        t[active] = t1
        active = active[t1 <= t_max]
        col += 2
    return out


@dataclass(frozen=True)
class EmpiricalAcf:
    lags: np.ndarray
    estimates: np.ndarray
    std_errors: np.ndarray
    n_trajectories: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_empirical_csv(buf, self)
        return buf.getvalue()


def write_empirical_csv(fh, emp: EmpiricalAcf):
    fh.write("lag,estimate,std_error,n\n")
    for lag, est, se in zip(emp.lags, emp.estimates, emp.std_errors):
        fh.write(f"{lag:.17g},{est:.17g},{se:.17g},{emp.n_trajectories}\n")


def min_horizon(Q: GeneratorMatrix, lags) -> float:
    """Largest lag plus the longest expected sojourn."""
    return float(np.max(lags)) + float(1.0 / Q.exit_rates.min())


def empirical_acf(Q: GeneratorMatrix, pi0: ProbVector, lags, n_trajectories: int,
                  horizon: float, master_seed: int, workers: int = 1) -> EmpiricalAcf:
    """Mean of X(0) X(lag) over independent paths, with standard errors.

    ``workers`` only changes scheduling; outputs are bit-identical for any
    value because trajectories are sampled from their own streams in fixed
    chunks and reduced in index order.
    """
    lags = np.asarray(lags, dtype=float)
    if lags.ndim != 1 or lags.size == 0 or np.any(lags < 0) or not np.all(np.isfinite(lags)):
        raise ValueError("lags must be a non-empty list of finite non-negative numbers")
    if n_trajectories < 1:
        raise ValueError("n_trajectories must be at least 1")
    if len(pi0) != Q.n:
        raise ValueError(f"{len(pi0)} initial probabilities for {Q.n} states")
    need = min_horizon(Q, lags)
    if horizon < need:
        raise ValueError(f"horizon {horizon!r} shorter than max lag plus one expected sojourn ({need!r})")
    rates, cdf = _jump_cdf(Q)
    # paths are only needed up to the largest lag; a longer horizon leaves that prefix unchanged
    bounds = [(a, min(a + CHUNK, n_trajectories)) for a in range(0, n_trajectories, CHUNK)]

    read_at = np.concatenate([[0.0], lags])

    def run(b):
        return _states_at_lags(pi0, read_at, master_seed, b[0], b[1], rates, cdf)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, bounds))
    else:
        parts = [run(b) for b in bounds]
    idx = np.concatenate(parts, axis=0)
    s = Q.values
    products = s[idx[:, :1]] * s[idx[:, 1:]]
    est = products.mean(axis=0)
    # a single path has no spread estimate; report 0 so CSV fields stay finite
    ddof = 1 if n_trajectories > 1 else 0
    se = products.std(axis=0, ddof=ddof) / math.sqrt(n_trajectories)
    return EmpiricalAcf(lags, est, se, int(n_trajectories))

