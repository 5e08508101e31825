"""Seeded instance ensembles: uniform couplings and Hebb matrices.

All randomness goes through numpy's PCG64 bit generator. Ensemble members
get independent substreams derived from one master seed with
:func:`derive_seed`, so any single trial can be regenerated on its own.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from eigenrelax.core import ConnectionMatrix, InvalidInputError, as_configuration


def derive_seed(master_seed: int, *keys: int) -> int:
    """A 63-bit integer seed for substream ``keys`` of ``master_seed``."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def gen_uniform(n: int, bound: float = 4.0, seed=None) -> ConnectionMatrix:
    """Off-diagonal J_ij ~ U[-bound, bound) i.i.d. for i < j, mirrored; zero diagonal."""
    if n < 2:
        raise InvalidInputError("n must be >= 2")
    if not bound > 0:
        raise InvalidInputError("bound must be positive")
    rng = make_rng(seed)
    iu = np.triu_indices(n, k=1)
    a = np.zeros((n, n))
    a[iu] = rng.uniform(-bound, bound, size=iu[0].size)
    a.T[iu] = a[iu]
    return ConnectionMatrix(a)


@dataclass(frozen=True, eq=False)
class PatternSet:
    patterns: np.ndarray  # shape (p, n), int8 entries +/-1

    def __post_init__(self):
        pats = np.asarray(self.patterns)
        if pats.ndim != 2 or pats.shape[0] < 1:
            raise InvalidInputError("patterns must be a non-empty (p, n) array")
        pats = np.stack([as_configuration(row) for row in pats])
        pats.setflags(write=False)
        object.__setattr__(self, "patterns", pats)

    @property
    def p(self) -> int:
        return self.patterns.shape[0]

    @property
    def n(self) -> int:
        return self.patterns.shape[1]


def gen_patterns(n: int, p: int, seed=None) -> PatternSet:
    if n < 1 or p < 1:
        raise InvalidInputError("n and p must be >= 1")
    rng = make_rng(seed)
    return PatternSet((2 * rng.integers(0, 2, size=(p, n)) - 1).astype(np.int8))


def gen_hebb(patterns: PatternSet) -> ConnectionMatrix:
    """J_ij = (1/n) sum_mu xi_i^mu xi_j^mu for i != j, J_ii = 0."""
    x = patterns.patterns.astype(np.float64)
    a = (x.T @ x) / patterns.n
    np.fill_diagonal(a, 0.0)
    return ConnectionMatrix(a)
