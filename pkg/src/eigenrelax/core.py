"""Problem representation and energy evaluation.

The objective is E(s) = -(Js, s) = -sum_ij J_ij s_i s_j over spin vectors
s in {-1, +1}^n. A :class:`ConnectionMatrix` is symmetric with a zero
diagonal; a :class:`RawMatrix` carries no structure and is reduced to a
connection matrix by :func:`symmetrize`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InvalidInputError(ValueError):
    """Raised for malformed matrices, configurations or dimension mismatches."""


def _as_square(entries, name: str) -> np.ndarray:
    a = np.array(entries, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InvalidInputError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RawMatrix:
    """Arbitrary finite square coupling matrix (no symmetry required)."""

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _as_square(self.entries, "RawMatrix"))

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class ConnectionMatrix:
    """Symmetric, zero-diagonal, finite coupling matrix J.

    ``dropped_diagonal`` is set when the matrix came out of :func:`symmetrize`
    and holds the diagonal that was removed, so absolute energies of the
    original problem can be recovered via :attr:`energy_offset`.
    """

    entries: np.ndarray
    dropped_diagonal: np.ndarray | None = field(default=None)

    def __post_init__(self):
        a = _as_square(self.entries, "ConnectionMatrix")
        if np.any(np.diag(a) != 0.0):
            raise InvalidInputError("ConnectionMatrix diagonal must be zero")
        if not np.array_equal(a, a.T):
            raise InvalidInputError("ConnectionMatrix must be symmetric")
        object.__setattr__(self, "entries", a)
        if self.dropped_diagonal is not None:
            d = np.array(self.dropped_diagonal, dtype=np.float64)
            if d.shape != (a.shape[0],):
                raise InvalidInputError("dropped_diagonal length must equal n")
            d.setflags(write=False)
            object.__setattr__(self, "dropped_diagonal", d)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries)))

    @property
    def energy_offset(self) -> float:
        """Constant -sum(A_ii) removed by symmetrization (0 if none)."""
        if self.dropped_diagonal is None:
            return 0.0
        return -float(np.sum(self.dropped_diagonal))

    def energy_tolerance(self) -> float:
        """Absolute slack used when deciding whether two energies tie."""
        return 1e-9 * max(1.0, float(np.sum(np.abs(self.entries))))


def as_configuration(s, n: int | None = None) -> np.ndarray:
    """Validate and return ``s`` as an int8 vector of +/-1 entries."""
    arr = np.asarray(s)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError(f"configuration must be a non-empty vector, got shape {arr.shape}")
    if not np.all((arr == 1) | (arr == -1)):
        raise InvalidInputError("configuration coordinates must be exactly -1 or +1")
    if n is not None and arr.shape[0] != n:
        raise InvalidInputError(f"configuration length {arr.shape[0]} does not match n={n}")
    return arr.astype(np.int8)


def energy(J: ConnectionMatrix, s) -> float:
    """E(s) = -sum_ij J_ij s_i s_j."""
    s = as_configuration(s, J.n).astype(np.float64)
    return -float(s @ J.entries @ s)


def raw_energy(A: RawMatrix | np.ndarray, s) -> float:
    """The same quadratic form on an unstructured matrix, diagonal included."""
    a = A.entries if isinstance(A, RawMatrix) else np.asarray(A, dtype=np.float64)
    s = as_configuration(s, a.shape[0]).astype(np.float64)
    return -float(s @ a @ s)


def symmetrize(A: RawMatrix) -> ConnectionMatrix:
    """Return (A + A^T)/2 with the diagonal zeroed.

    The removed diagonal is kept on the result as ``dropped_diagonal``. Since
    s_i^2 = 1 it only shifts every energy by the same constant.
    """
    if not isinstance(A, RawMatrix):
        A = RawMatrix(A)
    a = A.entries
    sym = 0.5 * (a + a.T)
    np.fill_diagonal(sym, 0.0)
    return ConnectionMatrix(sym, dropped_diagonal=np.diag(a).copy())


def embed_linear_term(J: ConnectionMatrix, h) -> ConnectionMatrix:
    """Fold a linear term into one extra (fictitious) spin.

    With s' = (s, +1) the augmented matrix satisfies
    -(J's', s') = -(Js, s) - (h, s). The augmented functional is even, so any
    minimizer can be flipped to put the fictitious spin at +1.
    """
    h = np.array(h, dtype=np.float64)
    if h.shape != (J.n,):
        raise InvalidInputError(f"linear term must have length {J.n}, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise InvalidInputError("linear term contains non-finite entries")
    n = J.n
    out = np.zeros((n + 1, n + 1))
    out[:n, :n] = J.entries
    out[:n, n] = out[n, :n] = 0.5 * h
    return ConnectionMatrix(out)


def shift_diagonal(A: RawMatrix, d) -> RawMatrix:
    if not isinstance(A, RawMatrix):
        A = RawMatrix(A)
    d = np.array(d, dtype=np.float64)
    if d.shape != (A.n,):
        raise InvalidInputError(f"diagonal shift must have length {A.n}, got shape {d.shape}")
    return RawMatrix(A.entries + np.diag(d))
