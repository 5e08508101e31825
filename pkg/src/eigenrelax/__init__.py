"""Spectral-start Hopfield descent for binary quadratic minimization.

Minimizes E(s) = -(Js, s) over s in {-1, +1}^n by relaxing asynchronous
sign dynamics from the configurations closest to the leading eigenvectors
of J, with random-restart and exhaustive baselines for comparison.
"""

from eigenrelax.core import (
    ConnectionMatrix,
    InvalidInputError,
    RawMatrix,
    as_configuration,
    embed_linear_term,
    energy,
    raw_energy,
    shift_diagonal,
    symmetrize,
)
from eigenrelax.dynamics import DynamicsConfig, RelaxationResult, is_fixed_point, relax
from eigenrelax.generators import PatternSet, gen_hebb, gen_patterns, gen_uniform
from eigenrelax.solvers import (
    SolveOutcome,
    compare,
    solve_exhaustive,
    solve_random,
    solve_spectral,
)
from eigenrelax.spectral import (
    Spectrum,
    StartSet,
    build_start_set,
    closest_configurations,
    decompose,
    lower_bound,
    spectral_energy,
)

__version__ = "0.1.0"

__all__ = [
    "ConnectionMatrix",
    "DynamicsConfig",
    "InvalidInputError",
    "PatternSet",
    "RawMatrix",
    "RelaxationResult",
    "SolveOutcome",
    "Spectrum",
    "StartSet",
    "as_configuration",
    "build_start_set",
    "closest_configurations",
    "compare",
    "decompose",
    "embed_linear_term",
    "energy",
    "gen_hebb",
    "gen_patterns",
    "gen_uniform",
    "is_fixed_point",
    "lower_bound",
    "raw_energy",
    "relax",
    "shift_diagonal",
    "solve_exhaustive",
    "solve_random",
    "solve_spectral",
    "spectral_energy",
    "symmetrize",
]
