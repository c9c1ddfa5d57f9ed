"""Random chain factories shared by the test modules."""
import numpy as np

from ctmc_acf.model import StateSpace, validate_generator


def random_rates(rng, n, lo=0.01, hi=100.0, density=1.0):
    """Log-uniform off-diagonal rates; a random cycle keeps the chain irreducible."""
    rates = np.exp(rng.uniform(np.log(lo), np.log(hi), size=(n, n)))
    mask = rng.random((n, n)) < density
    perm = rng.permutation(n)
    mask[perm, np.roll(perm, -1)] = True
    rates = np.where(mask, rates, 0.0)
    np.fill_diagonal(rates, 0.0)
    np.fill_diagonal(rates, -rates.sum(axis=1))
    return rates


def random_states(rng, n, kind=None):
    kind = kind or rng.choice(["ints", "reals", "symmetric"])
    if kind == "ints":
        return StateSpace(tuple(range(1, n + 1)))
    if kind == "symmetric":
        half = n // 2
        vals = [-v for v in range(half, 0, -1)] + list(range(1, n - half + 1))
        return StateSpace(tuple(vals))
    vals = rng.uniform(-3, 3, size=n)
    return StateSpace(tuple(np.round(vals, 6) + np.arange(n) * 1e-3))


def random_chain(rng, n=None, **kw):
    n = int(n if n is not None else rng.integers(2, 9))
    states = random_states(rng, n)
    return validate_generator(random_rates(rng, n, **kw), states)


def random_initial(rng, n):
    p = rng.dirichlet(np.ones(n))
    return p / p.sum()


def circulant3(states=(1.0, 2.0, 3.0)):
    return validate_generator([[-2, 1, 1], [1, -2, 1], [1, 1, -2]], StateSpace(states))
