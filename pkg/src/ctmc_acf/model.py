"""Chain definition: state values, generator matrices and probability vectors.

Values here are validated once at construction and never repaired; anything
that fails a check is rejected with a specific :mod:`ctmc_acf.errors` type.
Indices are 0-based throughout the Python API.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidProbVector,
    InvalidStateSpace,
    ModelError,
    NegativeOffDiagonal,
    NonSquare,
    NotIrreducible,
    RowSumNonZero,
    SingularSystem,
)

ROW_SUM_TOL = 1e-12
PROB_SUM_TOL = 1e-12
STATIONARY_RESIDUAL_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def format_residual(x: float) -> str:
    """Short scientific form without exponent padding, e.g. ``-5.0e-1``."""
    if x == 0 or not math.isfinite(x):
        return repr(float(x))
    exp = math.floor(math.log10(abs(x)))
    mant = x / 10.0**exp
    if round(abs(mant), 1) >= 10.0:
        exp += 1
        mant /= 10.0
    return f"{mant:.1f}e{exp}"


@dataclass(frozen=True)
class StateSpace:
    """Numeric value taken by the process in each of its N states."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2:
            raise InvalidStateSpace(f"need at least 2 states, got {len(vals)}")
        if not all(math.isfinite(v) for v in vals):
            raise InvalidStateSpace("state values must be finite")
        if len(set(vals)) != len(vals):
            raise InvalidStateSpace(f"state values must be distinct: {list(vals)}")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @property
    def is_unit(self) -> bool:
        return sorted(self.values) == [-1.0, 1.0]


@dataclass(frozen=True)
class ProbVector:
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvalidProbVector("probability vector must be one-dimensional and non-empty")
        if not np.all(np.isfinite(p)):
            raise InvalidProbVector("probabilities must be finite")
        if np.any(p < 0) or np.any(p > 1):
            raise InvalidProbVector(f"entries must lie in [0, 1]: {p.tolist()}")
        if abs(p.sum() - 1.0) > PROB_SUM_TOL:
            raise InvalidProbVector(f"entries sum to {p.sum()!r}, expected 1")
        object.__setattr__(self, "probs", _frozen(p))

    @classmethod
    def from_computed(cls, p, tol: float = 1e-9) -> "ProbVector":
        """Wrap a numerically computed distribution.

        Entries within ``tol`` outside [0, 1] are clipped and the sum is
        rescaled, but only after checking it is already within ``tol`` of 1.
        """
        p = np.asarray(p, dtype=float)
        if np.any(p < -tol) or np.any(p > 1 + tol) or abs(p.sum() - 1.0) > tol:
            raise InvalidProbVector(f"computed distribution off the simplex: {p.tolist()}")
        p = np.clip(p, 0.0, 1.0)
        return cls(p / p.sum())

    @classmethod
    def uniform(cls, n: int) -> "ProbVector":
        return cls(np.full(n, 1.0 / n))

    def __len__(self):
        return self.probs.size

    def __getitem__(self, i):
        return float(self.probs[i])


@dataclass(frozen=True)
class GeneratorMatrix:
    """A validated, irreducible rate matrix.  Build it with :func:`validate_generator`."""

    entries: np.ndarray
    states: StateSpace = field(compare=False)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def values(self) -> np.ndarray:
        return self.states.as_array()

    @property
    def exit_rates(self) -> np.ndarray:
        return -np.diag(self.entries)

    def __eq__(self, other):
        if not isinstance(other, GeneratorMatrix):
            return NotImplemented
        return self.states == other.states and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.states, self.entries.tobytes()))


def _unreachable_pair(adj: np.ndarray):
    """Return (i, j) with j unreachable from i, or None if strongly connected."""
    n = adj.shape[0]

    def reach(a, start):
        seen = np.zeros(n, dtype=bool)
        seen[start] = True
        todo = deque([start])
        while todo:
            u = todo.popleft()
            for v in np.flatnonzero(a[u]):
                if not seen[v]:
                    seen[v] = True
                    todo.append(v)
        return seen

    fwd = reach(adj, 0)
    if not fwd.all():
        return 0, int(np.flatnonzero(~fwd)[0])
    back = reach(adj.T, 0)
    if not back.all():
        return int(np.flatnonzero(~back)[0]), 0
    return None


def validate_generator(raw_matrix, states) -> GeneratorMatrix:
    if not isinstance(states, StateSpace):
        states = StateSpace(tuple(states))
    try:
        q = np.array(raw_matrix, dtype=float)
    except (TypeError, ValueError) as exc:
        raise NonSquare(f"matrix is not a rectangular numeric array ({exc})") from None
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise NonSquare(f"matrix has shape {q.shape}")
    n = q.shape[0]
    if n != len(states):
        raise DimensionMismatch(f"matrix is {n}x{n} but there are {len(states)} states")
    if not np.all(np.isfinite(q)):
        raise ModelError("matrix entries must be finite")

    off = q.copy()
    np.fill_diagonal(off, 0.0)
    if np.any(off < 0):
        i, j = np.argwhere(off < 0)[0]
        raise NegativeOffDiagonal(f"entry ({i + 1},{j + 1}) = {q[i, j]!r}")

    residual = q.sum(axis=1)
    worst = int(np.argmax(np.abs(residual)))
    if abs(residual[worst]) > ROW_SUM_TOL:
        raise RowSumNonZero(f"row {worst + 1} residual {format_residual(residual[worst])}")

    # redundant given the two checks above, kept as an explicit invariant
    if np.any(np.diag(q) > 0):
        raise ModelError("diagonal entries must be non-positive")

    pair = _unreachable_pair(off > 0)
    if pair is not None:
        i, j = pair
        raise NotIrreducible(f"state {j + 1} is not reachable from state {i + 1}")

    return GeneratorMatrix(_frozen(q), states)


def unit_chain(alpha: float, beta: float) -> GeneratorMatrix:
    """Two-state chain on values (+1, -1) leaving +1 at rate alpha and -1 at rate beta."""
    return validate_generator([[-alpha, alpha], [beta, -beta]], StateSpace((1.0, -1.0)))


def stationary_distribution(Q: GeneratorMatrix) -> ProbVector:
    """Solve pi Q = 0 with sum(pi) = 1.

    The last equation of Q^T pi^T = 0 is replaced by the normalisation row,
    which leaves a nonsingular system for an irreducible chain.
    """
    n = Q.n
    a = Q.entries.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None
    resid = np.abs(pi @ Q.entries).max()
    scale = max(1.0, np.abs(Q.entries).max())
    if not np.all(np.isfinite(pi)) or resid > STATIONARY_RESIDUAL_TOL * scale or np.any(pi <= 0):
        raise SingularSystem(f"stationary solve failed (residual {resid:.3e}, min {pi.min():.3e})")
    return ProbVector(pi / pi.sum())


def mean_value(dist: ProbVector, states: StateSpace) -> float:
    p = dist.probs if isinstance(dist, ProbVector) else np.asarray(dist, dtype=float)
    s = states.as_array() if isinstance(states, StateSpace) else np.asarray(states, dtype=float)
    if p.shape != s.shape:
        raise DimensionMismatch(f"{p.size} probabilities for {s.size} states")
    return float(p @ s)


@dataclass(frozen=True)
class Model:
    """A chain together with its initial distribution, as stored in a model file."""

    generator: GeneratorMatrix
    initial: ProbVector
    initial_spec: object = "stationary"

    @property
    def states(self) -> StateSpace:
        return self.generator.states

    def to_json_dict(self) -> dict:
        return {
            "states": list(self.states.values),
            "Q": self.generator.entries.tolist(),
            "initial": self.initial_spec if isinstance(self.initial_spec, str) else list(self.initial_spec),
        }


def build_model(states, Q, initial="stationary") -> Model:
    gen = validate_generator(Q, states)
    if isinstance(initial, str):
        if initial == "stationary":
            pi0 = stationary_distribution(gen)
        elif initial == "uniform":
            pi0 = ProbVector.uniform(gen.n)
        else:
            raise ModelError(f"unknown initial distribution keyword {initial!r}")
        spec = initial
    else:
        if len(initial) != gen.n:
            raise DimensionMismatch(f"initial has {len(initial)} entries for {gen.n} states")
        pi0 = ProbVector(initial)
        spec = tuple(float(x) for x in initial)
    return Model(gen, pi0, spec)


def model_from_dict(d: dict) -> Model:
    if not isinstance(d, dict):
        raise ModelError("model file must hold a JSON object")
    unknown = set(d) - {"states", "Q", "initial"}
    if unknown:
        raise ModelError(f"unknown keys {sorted(unknown)}")
    for key in ("states", "Q"):
        if key not in d:
            raise ModelError(f"missing key {key!r}")
    return build_model(d["states"], d["Q"], d.get("initial", "stationary"))


def load_model(path) -> Model:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelError(f"cannot read {path}: {exc.strerror}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON in {path}: {exc}") from None
    return model_from_dict(d)


def dump_model(model: Model) -> str:
    return json.dumps(model.to_json_dict())
