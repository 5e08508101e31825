"""Search strategies: spectral starts, random restarts, exhaustive enumeration."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from eigenrelax.core import ConnectionMatrix, InvalidInputError, energy
from eigenrelax.dynamics import RANDOM_PERMUTATION, DynamicsConfig, RelaxationResult, relax
from eigenrelax.generators import make_rng
from eigenrelax.spectral import (
    POLICY_LARGEST,
    POLICY_POSITIVE,
    Spectrum,
    StartSet,
    build_start_set,
    decompose,
    normalize_policy,
)

DEFAULT_EXHAUSTIVE_CAP = 24
_LOW_BLOCK_BITS = 14


class ExhaustiveCapError(InvalidInputError):
    """Exhaustive search refused because n exceeds the configured cap."""


def exhaustive_cap() -> int:
    value = os.environ.get("EXHAUSTIVE_CAP")
    return int(value) if value else DEFAULT_EXHAUSTIVE_CAP


@dataclass
class SolveOutcome:
    strategy: str
    best_state: np.ndarray
    best_energy: float
    all_results: list = field(default_factory=list)
    work_estimate: int = 0
    decomposition_work: int = 0
    degeneracy: int | None = None
    warnings: list = field(default_factory=list)
    start_set: StartSet | None = None
    params: dict = field(default_factory=dict)

    @property
    def best_result(self) -> RelaxationResult | None:
        for r in self.all_results:
            if r.final_energy == self.best_energy:
                return r
        return None

    @property
    def sweeps(self) -> int:
        return sum(r.sweeps for r in self.all_results)

    @property
    def flips(self) -> int:
        return sum(r.flips for r in self.all_results)

    def to_dict(self, include_results: bool = True) -> dict:
        out = {
            "strategy": self.strategy,
            "params": self.params,
            "n": int(self.best_state.shape[0]),
            "best_energy": float(self.best_energy),
            "best_state": [int(x) for x in self.best_state],
            "work_estimate": int(self.work_estimate),
            "decomposition_work": int(self.decomposition_work),
            "sweeps": self.sweeps,
            "flips": self.flips,
            "warnings": list(self.warnings),
        }
        if self.degeneracy is not None:
            out["degeneracy"] = int(self.degeneracy)
        best = self.best_result
        if best is not None and best.source is not None:
            out["best_source"] = {"eigenvector": int(best.source[0]), "rank": int(best.source[1])}
        if self.start_set is not None:
            out["start_set"] = self.start_set.to_dict()
        if include_results:
            out["results"] = [
                {
                    "start_index": r.start_index,
                    "source": None if r.source is None else {"eigenvector": int(r.source[0]), "rank": int(r.source[1])},
                    "final_energy": float(r.final_energy),
                    "sweeps": r.sweeps,
                    "flips": r.flips,
                }
                for r in self.all_results
            ]
        return out


def _relax_all(J, starts, cfg, sources=None) -> list[RelaxationResult]:
    cfg = cfg or DynamicsConfig()
    rng = make_rng(cfg.seed) if cfg.update_order == RANDOM_PERMUTATION else None
    results = []
    for idx, s0 in enumerate(starts):
        r = relax(J, s0, cfg, rng=rng)
        r.start_index = idx
        r.source = None if sources is None else sources[idx]
        results.append(r)
    return results


def _best(results: list[RelaxationResult]) -> RelaxationResult:
    # first minimum in start order
    best = results[0]
    for r in results[1:]:
        if r.final_energy < best.final_energy:
            best = r
    return best


def solve_spectral(J: ConnectionMatrix, k_per_vector: int = 3, policy: str = POLICY_POSITIVE,
                   m: int | None = None, cfg: DynamicsConfig | None = None,
                   spectrum: Spectrum | None = None) -> SolveOutcome:
    """Relax from the configurations closest to the selected eigenvectors."""
    policy = normalize_policy(policy)
    spec = spectrum if spectrum is not None else decompose(J)
    warnings = []
    starts = build_start_set(spec, k_per_vector, policy, m)
    if not starts.starts:
        warnings.append(f"{starts.warning}; fell back to policy {POLICY_LARGEST!r}")
        starts = build_start_set(spec, k_per_vector, POLICY_LARGEST)
    results = _relax_all(J, starts.starts, cfg, starts.sources)
    best = _best(results)
    params = {"k": k_per_vector, "policy": policy}
    if m is not None:
        params["m"] = m
    return SolveOutcome(
        strategy="spectral",
        best_state=best.final_state,
        best_energy=best.final_energy,
        all_results=results,
        work_estimate=sum(r.work for r in results),
        decomposition_work=J.n ** 3,
        warnings=warnings,
        start_set=starts,
        params=params,
    )


def solve_random(J: ConnectionMatrix, restarts: int | None = None, seed=None,
                 cfg: DynamicsConfig | None = None) -> SolveOutcome:
    """Relax from ``restarts`` uniform random configurations (default n)."""
    restarts = J.n if restarts is None else restarts
    if restarts < 1:
        raise InvalidInputError("restarts must be >= 1")
    rng = make_rng(seed)
    starts = (2 * rng.integers(0, 2, size=(restarts, J.n)) - 1).astype(np.int8)
    results = _relax_all(J, starts, cfg)
    best = _best(results)
    return SolveOutcome(
        strategy="random",
        best_state=best.final_state,
        best_energy=best.final_energy,
        all_results=results,
        work_estimate=sum(r.work for r in results),
        params={"restarts": restarts, "seed": seed},
    )


def _low_block(b: int) -> np.ndarray:
    # row l: spins for bit pattern l, bit j set -> spin -1
    bits = (np.arange(2**b)[:, None] >> np.arange(b)) & 1
    return (1 - 2 * bits).astype(np.float64)


def enumerate_energies(J: ConnectionMatrix) -> np.ndarray:
    """Energies of all 2^(n-1) configurations with s_0 = +1.

    Index ``t * 2^b + l`` holds the state whose spins 1..b follow the bits of
    l and whose remaining spins follow the Gray code of t (bit set -> -1).
    The Gray walk over the high spins updates the coupling fields in O(n)
    per step; the 2^b low-spin states are evaluated as one block.
    """
    a = J.entries
    n = J.n
    m = n - 1
    b = min(m, _LOW_BLOCK_BITS)
    r = m - b
    low = np.arange(1, 1 + b)
    fixed = np.concatenate(([0], np.arange(1 + b, n))).astype(int)  # spin 0 plus high spins

    L = _low_block(b)
    a_ll = a[np.ix_(low, low)]
    q_low = -np.einsum("ij,jk,ik->i", L, a_ll, L)
    a_lf = a[np.ix_(low, fixed)]
    a_ff = a[np.ix_(fixed, fixed)]

    s_f = np.ones(fixed.size)
    g = a_lf @ s_f
    h_f = a_ff @ s_f
    e_f = -float(s_f @ h_f)

    out = np.empty(2**m)
    block = 2**b
    for t in range(2**r):
        if t:
            j = (t & -t).bit_length()  # Gray step t flips high bit j-1 -> position j in `fixed`
            e_f += 4.0 * s_f[j] * h_f[j]
            s_f[j] = -s_f[j]
            h_f += (2.0 * s_f[j]) * a_ff[:, j]
            g += (2.0 * s_f[j]) * a_lf[:, j]
        out[t * block:(t + 1) * block] = q_low - 2.0 * (L @ g) + e_f
    return out


def _decode(indices: np.ndarray, n: int) -> np.ndarray:
    m = n - 1
    b = min(m, _LOW_BLOCK_BITS)
    t, low = np.divmod(indices, 2**b)
    gray = t ^ (t >> 1)
    bits = np.concatenate([(low[:, None] >> np.arange(b)) & 1,
                           (gray[:, None] >> np.arange(m - b)) & 1], axis=1)
    out = np.ones((indices.size, n), dtype=np.int8)
    out[:, 1:] = 1 - 2 * bits
    return out


def _lexicographic_min(indices: np.ndarray, n: int) -> np.ndarray:
    # -1 < +1; narrow candidates one coordinate at a time to bound memory
    m = n - 1
    b = min(m, _LOW_BLOCK_BITS)
    t, low = np.divmod(indices, 2**b)
    gray = t ^ (t >> 1)
    keep = np.ones(indices.size, dtype=bool)
    for c in range(m):
        bit = (low >> c) & 1 if c < b else (gray >> (c - b)) & 1
        neg = keep & (bit == 1)
        if neg.any():
            keep = neg
    return _decode(indices[keep][:1], n)[0]


def solve_exhaustive(J: ConnectionMatrix, cap: int | None = None) -> SolveOutcome:
    """Exact global minimum by enumerating all states with s_0 = +1.

    Ties (within the matrix's energy tolerance) are counted in ``degeneracy``
    and the lexicographically smallest minimizer (-1 < +1) is returned.
    """
    cap = exhaustive_cap() if cap is None else cap
    if J.n > cap:
        raise ExhaustiveCapError(f"exhaustive search refused: n={J.n} exceeds cap {cap}")
    if J.n == 1:
        state = np.ones(1, dtype=np.int8)
        return SolveOutcome("exhaustive", state, 0.0, degeneracy=1, work_estimate=1)
    energies = enumerate_energies(J)
    e_min = float(energies.min())
    ties = np.flatnonzero(energies <= e_min + J.energy_tolerance())
    state = _lexicographic_min(ties, J.n)
    return SolveOutcome(
        strategy="exhaustive",
        best_state=state,
        best_energy=energy(J, state),
        degeneracy=int(ties.size),
        work_estimate=int(energies.size) * J.n,
        params={"cap": cap},
    )


def classify(spectral_energy: float, random_energy: float, tol: float) -> str:
    """'win' iff the spectral energy is strictly deeper beyond ``tol``."""
    if spectral_energy < random_energy - tol:
        return "win"
    if spectral_energy > random_energy + tol:
        return "loss"
    return "tie"


def compare(J: ConnectionMatrix, seed=None, k_per_vector: int = 3, policy: str = POLICY_POSITIVE,
            restarts: int | None = None, cfg: DynamicsConfig | None = None) -> dict:
    """Spectral search (positive eigenvectors, k=3) against n random restarts."""
    spectral = solve_spectral(J, k_per_vector, policy, cfg=cfg)
    rand = solve_random(J, restarts, seed, cfg)
    return {
        "spectral_energy": spectral.best_energy,
        "random_energy": rand.best_energy,
        "gap": rand.best_energy - spectral.best_energy,
        "outcome": classify(spectral.best_energy, rand.best_energy, J.energy_tolerance()),
        "spectral": spectral,
        "random": rand,
    }
