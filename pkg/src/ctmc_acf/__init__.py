"""Autocorrelation functions of finite-state continuous-time Markov chains."""

__version__ = "0.1.0"

from .acf import (
    ExpMixture,
    acf_centered,
    acf_grid,
    acf_mixture,
    acf_value,
    constant_term,
    unit_acf_closed_form,
)
from .lpnorm import LpReport, classify, classify_chain
from .model import (
    GeneratorMatrix,
    Model,
    ProbVector,
    StateSpace,
    load_model,
    mean_value,
    stationary_distribution,
    unit_chain,
    validate_generator,
)
from .pointproc import conditional_arrival_prob, equilibrium_arrival_prob, transient_arrival_prob
from .simulate import EmpiricalAcf, Trajectory, empirical_acf, sample_trajectory, stitched_sojourns
from .spectral import SpectralDecomposition, decompose, expm_spectral
from .transient import expm_uniformization, transient_distribution
