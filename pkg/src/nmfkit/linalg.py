"""Dense matrix primitives shared by every solver.

Matrices are plain 2-D float64 numpy arrays (row-major). The factorization
problem V ~= W H keeps V as n x m, W as n x r and H as r x m, all entrywise
nonnegative. Callers treat constructed arrays as immutable; every routine
here returns fresh arrays and never mutates its inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    ContractViolationError,
    CsvFormatError,
    DegenerateColumnError,
    ShapeError,
)

__all__ = [
    "as_matrix",
    "require_nonnegative",
    "frobenius_residual",
    "column_norms",
    "normalize_columns",
    "max_row_sum",
    "read_matrix_csv",
    "write_matrix_csv",
]


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a non-empty 2-D float64 array."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got {arr.ndim}-D")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ShapeError(f"{name} must be non-empty, got shape {arr.shape}")
    return arr


def require_nonnegative(M: np.ndarray, name: str = "matrix") -> None:
    if np.any(M < 0):
        i, j = np.argwhere(M < 0)[0]
        raise ContractViolationError(
            f"{name} must be entrywise nonnegative; entry ({i}, {j}) is {M[i, j]!r}"
        )


def frobenius_residual(V, W, H) -> float:
    """Squared Frobenius misfit ``||V - W H||_F**2`` of a factorization.

    Parameters
    ----------
    V : array, shape (n, m)
        Data matrix.
    W : array, shape (n, r)
        Left factor.
    H : array, shape (r, m)
        Right factor.

    Returns
    -------
    float
        Sum of squared entries of the residual ``V - W H``; always >= 0.
    """
    V = as_matrix(V, "V")
    W = as_matrix(W, "W")
    H = as_matrix(H, "H")
    n, m = V.shape
    if W.shape[0] != n or H.shape[1] != m or W.shape[1] != H.shape[0]:
        raise ShapeError(
            f"cannot form V - W H from V {V.shape}, W {W.shape}, H {H.shape}"
        )
    R = V - W @ H
    return float(np.sum(R * R))


def column_norms(M: np.ndarray) -> np.ndarray:
    """Euclidean norm of each column of ``M`` as a 1-D array."""
    M = as_matrix(M, "M")
    return np.sqrt(np.sum(M * M, axis=0))


def normalize_columns(M) -> np.ndarray:
    """Rescale every column of ``M`` to unit Euclidean norm.

    Column directions are preserved. A zero column cannot be normalized and
    raises :class:`DegenerateColumnError` carrying the offending index; for a
    factor matrix that means a dead component, and the caller decides whether
    to reinitialize.
    """
    M = as_matrix(M, "M")
    norms = column_norms(M)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateColumnError(int(zero[0]))
    return M / norms


def max_row_sum(A) -> float:
    """Largest row sum of a square nonnegative matrix.

    Placed on a diagonal, this value dominates ``A`` in the positive
    semidefinite order (it upper-bounds the Perron root), which is what makes
    it usable as an adaptive step-size denominator.
    """
    A = as_matrix(A, "A")
    if A.shape[0] != A.shape[1]:
        raise ContractViolationError(f"A must be square, got shape {A.shape}")
    require_nonnegative(A, "A")
    return float(A.sum(axis=1).max())


def write_matrix_csv(path, M) -> None:
    """Write ``M`` in the toolkit CSV format: ``rows,cols`` header then rows.

    Values use shortest round-trip decimal notation, so writing is
    deterministic and reading recovers the exact float64 entries.
    """
    M = as_matrix(M, "M")
    rows, cols = M.shape
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{rows},{cols}\n")
        for row in M:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")


def read_matrix_csv(path) -> np.ndarray:
    """Parse a matrix written by :func:`write_matrix_csv`.

    Raises :class:`CsvFormatError` with the 1-based line number on any
    malformed header, row, or value.
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise CsvFormatError("empty file", line=1)
    header = lines[0].split(",")
    if len(header) != 2:
        raise CsvFormatError(f"header must be 'rows,cols', got {lines[0]!r}", line=1)
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError:
        raise CsvFormatError(
            f"header must hold two integers, got {lines[0]!r}", line=1
        ) from None
    if rows <= 0 or cols <= 0:
        raise CsvFormatError(f"dimensions must be positive, got {rows}x{cols}", line=1)
    body = [ln for ln in lines[1:] if ln.strip() != ""]
    if len(body) != rows:
        raise CsvFormatError(
            f"expected {rows} data rows, found {len(body)}", line=len(lines)
        )
    out = np.empty((rows, cols), dtype=np.float64)
    for i, ln in enumerate(body):
        parts = ln.split(",")
        lineno = i + 2
        if len(parts) != cols:
            raise CsvFormatError(
                f"expected {cols} values, found {len(parts)}", line=lineno
            )
        try:
            out[i] = [float(p) for p in parts]
        except ValueError as exc:
            raise CsvFormatError(str(exc), line=lineno) from None
    return out
