"""Text formats for matrices, pattern sets and linear terms.

Matrix file::

    n 3            (or "raw n 3" for an unsymmetrized matrix)
    0 1 -2.5
    1 0 0.25
    -2.5 0.25 0

Pattern file: header ``<n> <p>`` then p rows of n integers in {-1, 1}.
Linear-term file: n whitespace-separated reals, any line layout.
Blank lines and ``#`` comments are ignored everywhere.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from eigenrelax.core import ConnectionMatrix, InvalidInputError, RawMatrix


class FormatError(InvalidInputError):
    def __init__(self, message: str, lineno: int | None = None, path=None):
        self.message = message
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


def _content_lines(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if stripped:
            yield lineno, stripped.split()


def _parse_real(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise FormatError(f"not a number: {token!r}", lineno) from None
    if not math.isfinite(value):
        raise FormatError(f"non-finite value: {token!r}", lineno)
    return value


def parse_matrix(text: str, force_raw: bool = False) -> ConnectionMatrix | RawMatrix:
    """Parse matrix text; returns a RawMatrix for ``raw`` headers or ``force_raw``."""
    lines = list(_content_lines(text))
    if not lines:
        raise FormatError("empty matrix file", 1)
    lineno, header = lines[0]
    raw = False
    if header and header[0] == "raw":
        raw = True
        header = header[1:]
    if len(header) != 2 or header[0] != "n":
        raise FormatError("expected header 'n <dimension>' or 'raw n <dimension>'", lineno)
    try:
        n = int(header[1])
    except ValueError:
        raise FormatError(f"bad dimension {header[1]!r}", lineno) from None
    if n < 1:
        raise FormatError(f"dimension must be positive, got {n}", lineno)
    rows = lines[1:]
    if len(rows) != n:
        last = rows[-1][0] if rows else lineno
        raise FormatError(f"expected {n} rows, found {len(rows)}", last)
    entries = np.empty((n, n))
    for i, (ln, tokens) in enumerate(rows):
        if len(tokens) != n:
            raise FormatError(f"row {i + 1} has {len(tokens)} values, expected {n}", ln)
        entries[i] = [_parse_real(t, ln) for t in tokens]
    if raw or force_raw:
        return RawMatrix(entries)
    try:
        return ConnectionMatrix(entries)
    except InvalidInputError as exc:
        # locate the first offending row for the error message
        for i, (ln, _) in enumerate(rows):
            if entries[i, i] != 0.0 or not np.array_equal(entries[i], entries[:, i]):
                raise FormatError(f"{exc} (use a 'raw' header for nonsymmetric input)", ln) from None
        raise FormatError(str(exc), lineno) from None


def format_matrix(matrix: ConnectionMatrix | RawMatrix) -> str:
    head = "raw n" if isinstance(matrix, RawMatrix) else "n"
    out = [f"{head} {matrix.n}"]
    for row in matrix.entries:
        out.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(out) + "\n"


def read_matrix(path) -> ConnectionMatrix | RawMatrix:
    path = Path(path)
    try:
        return parse_matrix(path.read_text())
    except FormatError as exc:
        raise FormatError(exc.message, exc.lineno, path) from None


def write_matrix(path, matrix: ConnectionMatrix | RawMatrix) -> None:
    Path(path).write_text(format_matrix(matrix))


def format_patterns(patterns: np.ndarray) -> str:
    p, n = patterns.shape
    out = [f"{n} {p}"]
    out.extend(" ".join(str(int(v)) for v in row) for row in patterns)
    return "\n".join(out) + "\n"


def parse_patterns(text: str) -> np.ndarray:
    lines = list(_content_lines(text))
    if not lines:
        raise FormatError("empty pattern file", 1)
    lineno, header = lines[0]
    try:
        n, p = (int(x) for x in header)
    except ValueError:
        raise FormatError("expected header '<n> <p>'", lineno) from None
    if len(lines) - 1 != p:
        raise FormatError(f"expected {p} pattern rows, found {len(lines) - 1}", lines[-1][0])
    out = np.empty((p, n), dtype=np.int8)
    for mu, (ln, tokens) in enumerate(lines[1:]):
        if len(tokens) != n or any(t not in ("1", "-1", "+1") for t in tokens):
            raise FormatError(f"pattern row must hold {n} values in {{-1, 1}}", ln)
        out[mu] = [int(t) for t in tokens]
    return out


def parse_vector(text: str) -> np.ndarray:
    values = [_parse_real(tok, ln) for ln, tokens in _content_lines(text) for tok in tokens]
    return np.array(values, dtype=np.float64)


def read_vector(path) -> np.ndarray:
    path = Path(path)
    try:
        return parse_vector(path.read_text())
    except FormatError as exc:
        raise FormatError(exc.message, exc.lineno, path) from None
