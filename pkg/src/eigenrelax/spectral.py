"""Eigendecomposition of J and spectral start-vector construction.

With J f_i = lam_i f_i (lam_1 >= ... >= lam_n, orthonormal f_i) the energy
splits as E(s) = -sum_i lam_i (s, f_i)^2, which gives the bound
E(s) >= -lam_1 n and motivates starting descent from the spin vectors with
the largest overlap with the leading eigenvectors.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from eigenrelax.core import ConnectionMatrix, InvalidInputError, as_configuration

ORTHONORMALITY_TOL = 1e-8
MAX_JACOBI_SWEEPS = 64

POLICY_POSITIVE = "positive"
POLICY_TOP = "top"
POLICY_LARGEST = "largest"
POLICIES = (POLICY_POSITIVE, POLICY_TOP, POLICY_LARGEST)
_POLICY_ALIASES = {"a": POLICY_POSITIVE, "b": POLICY_TOP, "c": POLICY_LARGEST}


class SpectralError(RuntimeError):
    """The eigensolver failed to reach the residual tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (achieved residual {residual:.3e})")
        self.residual = residual


def residual_tolerance(J: ConnectionMatrix) -> float:
    return 1e-8 * J.max_abs * J.n


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues sorted non-increasing; ``eigenvectors[i]`` pairs with ``eigenvalues[i]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_tol: float
    max_residual: float

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def positive_count(self) -> int:
        return int(np.sum(self.eigenvalues > self.residual_tol))


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    # make the largest-magnitude coordinate of each eigenvector positive
    pivots = np.argmax(np.abs(vectors), axis=1)
    signs = np.sign(vectors[np.arange(len(vectors)), pivots])
    signs[signs == 0] = 1.0
    return vectors * signs[:, None]


def jacobi_eigh(a: np.ndarray, max_sweeps: int = MAX_JACOBI_SWEEPS, tol: float = 1e-14):
    """Cyclic Jacobi rotations for a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors_as_columns, sweeps)`` in no
    particular order. Each sweep zeroes every off-diagonal pair once; it stops
    when the off-diagonal Frobenius norm drops below ``tol * ||a||_F``.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v, 0
    for sweep in range(1, max_sweeps + 1):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            return np.diag(a).copy(), v, sweep - 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * scale:
                    a[p, q] = a[q, p] = 0.0
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
                a[p, q] = a[q, p] = 0.0
    off = np.linalg.norm(a - np.diag(np.diag(a)))
    raise SpectralError(f"Jacobi iteration did not converge in {max_sweeps} sweeps", off)


def decompose(J: ConnectionMatrix, method: str = "lapack") -> Spectrum:
    """Full symmetric eigendecomposition, validated against the residual tolerance.

    ``method="lapack"`` uses numpy's ``eigh``; ``method="jacobi"`` uses the
    pure-numpy rotation scheme above (slow, O(n^3) per sweep in Python loops).
    """
    a = J.entries
    if method == "lapack":
        vals, vecs = np.linalg.eigh(a)
    elif method == "jacobi":
        vals, vecs, _ = jacobi_eigh(a)
    else:
        raise InvalidInputError(f"unknown eigensolver method {method!r}")
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = _canonical_signs(vecs[:, order].T)
    tol = residual_tolerance(J)

    residual = float(np.max(np.linalg.norm(vecs @ a - vals[:, None] * vecs, axis=1)))
    if residual > tol:
        raise SpectralError("eigenpair residual above tolerance", residual)
    gram_err = float(np.max(np.abs(vecs @ vecs.T - np.eye(J.n))))
    if gram_err > ORTHONORMALITY_TOL:
        raise SpectralError("eigenvectors not orthonormal", gram_err)
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return Spectrum(vals, vecs, tol, residual)


def spectral_energy(spec: Spectrum, s) -> float:
    """E(s) reassembled from eigenpairs: -sum_i lam_i (s, f_i)^2."""
    s = as_configuration(s, spec.n).astype(np.float64)
    proj = spec.eigenvectors @ s
    return -float(np.dot(spec.eigenvalues, proj * proj))


def lower_bound(spec: Spectrum) -> float:
    return -float(spec.eigenvalues[0]) * spec.n


def sign_vector(f) -> np.ndarray:
    """Coordinatewise sign with sign(0) = +1."""
    return np.where(np.asarray(f) >= 0, 1, -1).astype(np.int8)


def closest_configurations(f, k: int) -> list[np.ndarray]:
    """The k spin vectors with the largest overlap (s, f), best first.

    Every s is sign(f) with some coordinate set flipped; flipping set F costs
    2 * sum_{i in F} |f_i| of overlap. Flip sets are generated best-first over
    coordinates sorted by |f_i| (k-smallest subset sums). Equal costs are
    ordered by the sorted tuple of flipped coordinate indices.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 1 or f.size == 0:
        raise InvalidInputError("f must be a non-empty vector")
    n = f.size
    if abs(np.linalg.norm(f) - 1.0) > 1e-6:
        raise InvalidInputError(f"f must have unit norm, got {np.linalg.norm(f):.6g}")
    if k < 1 or (n < 64 and k > 2**n):
        raise InvalidInputError(f"k must be in [1, 2^n = {2**n}], got {k}")

    base = sign_vector(f)
    weights = 2.0 * np.abs(f)
    order = np.lexsort((np.arange(n), weights))  # ascending |f_i|, ties by index
    w = weights[order]

    # entries: (rounded cost, flipped original indices, cost, flipped sorted positions)
    heap = [(0.0, (), 0.0, ())]
    out = []
    while heap and len(out) < k:
        _, flipped, cost, positions = heapq.heappop(heap)
        s = base.copy()
        if flipped:
            s[list(flipped)] *= -1
        out.append(s)
        nxt = positions[-1] + 1 if positions else 0
        if nxt >= n:
            continue
        children = [positions + (nxt,)]
        if positions:
            children.append(positions[:-1] + (nxt,))
        for child in children:
            c = cost + w[nxt] - (w[positions[-1]] if len(child) == len(positions) else 0.0)
            idx = tuple(sorted(int(order[p]) for p in child))
            heapq.heappush(heap, (round(c, 12), idx, c, child))
    return out


def normalize_policy(policy: str) -> str:
    policy = _POLICY_ALIASES.get(policy, policy)
    if policy not in POLICIES:
        raise InvalidInputError(f"unknown selection policy {policy!r}; choose from {POLICIES}")
    return policy


def select_eigenvectors(spec: Spectrum, policy: str = POLICY_POSITIVE, m: int | None = None) -> list[int]:
    policy = normalize_policy(policy)
    if policy == POLICY_POSITIVE:
        return list(range(spec.positive_count))
    if policy == POLICY_LARGEST:
        return [0]
    if m is None or m < 1:
        raise InvalidInputError("policy 'top' needs m >= 1")
    return list(range(min(m, spec.n)))


@dataclass
class StartSet:
    """Deduplicated start vectors; ``sources[j] = (eigenvector index, closeness rank)``."""

    starts: list
    sources: list
    warning: str | None = None

    def __len__(self) -> int:
        return len(self.starts)

    def to_dict(self) -> dict:
        return {
            "starts": [[int(x) for x in s] for s in self.starts],
            "sources": [{"eigenvector": int(e), "rank": int(r)} for e, r in self.sources],
            "warning": self.warning,
        }


def build_start_set(spec: Spectrum, k_per_vector: int = 3, policy: str = POLICY_POSITIVE,
                    m: int | None = None) -> StartSet:
    """Apply :func:`closest_configurations` to each selected eigenvector.

    Policies: ``positive`` (every eigenvector with lam > residual tolerance),
    ``top`` (the m largest), ``largest`` (lam_1 only). Duplicates keep the
    first provenance.
    """
    if k_per_vector < 1:
        raise InvalidInputError("k_per_vector must be >= 1")
    chosen = select_eigenvectors(spec, policy, m)
    if not chosen:
        return StartSet([], [], warning=f"policy {normalize_policy(policy)!r} selected no eigenvectors")
    k = min(k_per_vector, 2**spec.n) if spec.n < 64 else k_per_vector
    starts, sources, seen = [], [], set()
    for e in chosen:
        for rank, s in enumerate(closest_configurations(spec.eigenvectors[e], k)):
            key = s.tobytes()
            if key in seen:
                continue
            seen.add(key)
            starts.append(s)
            sources.append((e, rank))
    return StartSet(starts, sources)
