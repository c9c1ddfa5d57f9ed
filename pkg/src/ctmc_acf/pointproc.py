"""Arrival attribution for the superposition view of a chain.

Each state is treated as its own point process; the probability that an
arrival at time tau belongs to stream j is the occupancy probability of j,
in equilibrium, from a given initial law, or from a given initial state.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import GeneratorMatrix, ProbVector, stationary_distribution
from .transient import expm_uniformization, transient_distribution


def _check_index(Q: GeneratorMatrix, k: int, name: str = "j"):
    if not 0 <= k < Q.n:
        raise IndexError(f"{name}={k} outside 0..{Q.n - 1}")


def equilibrium_arrival_prob(Q: GeneratorMatrix, j: int) -> float:
    _check_index(Q, j)
    return stationary_distribution(Q)[j]


def transient_arrival_prob(Q: GeneratorMatrix, pi0: ProbVector, tau: float, j: int) -> float:
    _check_index(Q, j)
    return transient_distribution(pi0, Q, tau)[j]


def conditional_arrival_prob(Q: GeneratorMatrix, i: int, j: int, tau: float) -> float:
    _check_index(Q, i, "i")
    _check_index(Q, j)
    return float(expm_uniformization(Q, tau)[i, j])


@dataclass(frozen=True)
class ArrivalReport:
    i: int
    j: int
    tau: float
    equilibrium: float
    transient: float
    conditional: float


def arrival_report(Q: GeneratorMatrix, pi0: ProbVector, i: int, j: int, tau: float) -> ArrivalReport:
    return ArrivalReport(
        i, j, float(tau),
        equilibrium_arrival_prob(Q, j),
        transient_arrival_prob(Q, pi0, tau, j),
        conditional_arrival_prob(Q, i, j, tau),
    )
