"""Asynchronous sign dynamics s_i <- sign(sum_j J_ij s_j).

A zero field leaves the spin unchanged. Each accepted flip of spin i lowers
E by 4|h_i| (h evaluated before the flip), so descent is strictly monotone
and ends at a 1-flip local minimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from eigenrelax.core import ConnectionMatrix, InvalidInputError, as_configuration, energy

SEQUENTIAL = "sequential"
RANDOM_PERMUTATION = "random-permutation"


class ConvergenceError(RuntimeError):
    """Sweep budget exhausted; ``best_state`` is the lowest-energy state seen."""

    def __init__(self, message: str, best_state: np.ndarray, best_energy: float):
        super().__init__(message)
        self.best_state = best_state
        self.best_energy = best_energy


@dataclass(frozen=True)
class DynamicsConfig:
    update_order: str = SEQUENTIAL
    max_sweeps: int | None = None  # None -> 10 * n
    record_trace: bool = False
    seed: int | None = None  # only used by the random-permutation order

    def __post_init__(self):
        if self.update_order not in (SEQUENTIAL, RANDOM_PERMUTATION):
            raise InvalidInputError(f"unknown update order {self.update_order!r}")
        if self.max_sweeps is not None and self.max_sweeps < 1:
            raise InvalidInputError("max_sweeps must be >= 1")


@dataclass
class RelaxationResult:
    final_state: np.ndarray
    final_energy: float
    sweeps: int
    flips: int
    energy_trace: list | None = field(default=None, repr=False)
    start_index: int | None = None
    source: tuple | None = None  # (eigenvector, rank) for spectral starts

    @property
    def work(self) -> int:
        """Coordinate operations: initial fields, one visit per spin per sweep, one field update per flip."""
        n = self.final_state.shape[0]
        return n * n + n * self.sweeps + n * self.flips


def field_tolerance(J: ConnectionMatrix) -> float:
    # fields below this are treated as zero (guards round-off on lattice-valued J)
    return 1e-12 * max(1.0, float(np.max(np.sum(np.abs(J.entries), axis=1))))


def is_fixed_point(J: ConnectionMatrix, s) -> bool:
    """True iff sign(h_i) == s_i for every spin with a nonzero local field."""
    s = as_configuration(s, J.n).astype(np.float64)
    h = J.entries @ s
    return bool(np.all(s * h >= -field_tolerance(J)))


def relax(J: ConnectionMatrix, s0, cfg: DynamicsConfig | None = None,
          rng: np.random.Generator | None = None) -> RelaxationResult:
    """Run asynchronous descent from ``s0`` until a sweep makes no flip."""
    cfg = cfg or DynamicsConfig()
    a = J.entries
    n = J.n
    s = as_configuration(s0, n).astype(np.float64)
    h = a @ s
    tol = field_tolerance(J)
    max_sweeps = cfg.max_sweeps if cfg.max_sweeps is not None else 10 * n
    if cfg.update_order == RANDOM_PERMUTATION and rng is None:
        rng = np.random.default_rng(cfg.seed)

    e = -float(s @ h)
    trace = [e] if cfg.record_trace else None
    flips = 0
    order = np.arange(n)
    for sweep in range(1, max_sweeps + 1):
        if cfg.update_order == RANDOM_PERMUTATION:
            order = rng.permutation(n)
        flipped_this_sweep = False
        pos = 0
        while pos < n:
            rest = order[pos:]
            unstable = np.flatnonzero(s[rest] * h[rest] < -tol)
            if unstable.size == 0:
                break
            pos += int(unstable[0])
            i = order[pos]
            # E changes by 4 s_i h_i < 0 before the flip
            e += 4.0 * s[i] * h[i]
            s[i] = -s[i]
            h += (2.0 * s[i]) * a[:, i]
            flips += 1
            flipped_this_sweep = True
            if trace is not None:
                trace.append(e)
            pos += 1
        if not flipped_this_sweep:
            state = s.astype(np.int8)
            return RelaxationResult(state, energy(J, state), sweep, flips, trace)
    state = s.astype(np.int8)
    raise ConvergenceError(f"no fixed point within {max_sweeps} sweeps", state, energy(J, state))
