"""Small dense linear-algebra layer used by the model code.

Matrices are plain 2-D float64 ``numpy`` arrays (row-major). The functions
here add the argument checking and error semantics the rest of the package
relies on; the numerics are delegated to numpy/scipy (LAPACK).
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ParameterError, ShapeError, SingularityError, SizingError

# Hard cap on elements of any matrix we will materialize (~800 MB of float64).
_MAX_ELEMENTS = 10**8

_SYM_TOL = 1e-10


@dataclass(frozen=True)
class SymEig:
    """Eigendecomposition of a symmetric matrix.

    ``values`` are sorted in descending order; ``vectors[:, j]`` is the unit
    eigenvector for ``values[j]``. Reconstruction ``V diag(w) V^T`` matches the
    input to roughly machine precision relative to its norm.
    """

    values: np.ndarray
    vectors: np.ndarray


def _as_matrix(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ParameterError(f"{name} contains non-finite entries")
    return a


def _require_square(a: np.ndarray, name: str) -> None:
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {a.shape}")


def _require_symmetric(a: np.ndarray, name: str, tol: float = _SYM_TOL) -> None:
    if a.shape[0] and np.abs(a - a.T).max() > tol:
        raise ShapeError(f"{name} is not symmetric to tolerance {tol:g}")


def kron(a, b) -> np.ndarray:
    """Kronecker product of two dense matrices.

    Refuses results with more than 10^8 entries rather than exhausting
    memory on a sizing mistake.
    """
    a = _as_matrix(a, "a")
    b = _as_matrix(b, "b")
    elements = a.shape[0] * b.shape[0] * a.shape[1] * b.shape[1]
    if elements > _MAX_ELEMENTS:
        raise SizingError(
            f"kron result would have {elements} entries (limit {_MAX_ELEMENTS})"
        )
    return np.kron(a, b)


def sym_eig(a) -> SymEig:
    """Full eigendecomposition of a symmetric matrix, eigenvalues descending."""
    a = _as_matrix(a, "a")
    _require_square(a, "a")
    _require_symmetric(a, "a")
    w, v = np.linalg.eigh(a)
    return SymEig(values=w[::-1].copy(), vectors=v[:, ::-1].copy())


def solve_spd(a, b) -> np.ndarray:
    """Solve ``a x = b`` for symmetric positive-definite ``a`` via Cholesky.

    ``b`` may be a vector or a matrix of right-hand sides. Raises
    :class:`SingularityError` (with the failing pivot index when LAPACK
    reports one) if ``a`` is not positive definite.
    """
    a = _as_matrix(a, "a")
    _require_square(a, "a")
    _require_symmetric(a, "a")
    b = np.asarray(b, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise ShapeError(
            f"right-hand side has leading dimension {b.shape[0]}, expected {a.shape[0]}"
        )
    try:
        factor = cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(str(exc), pivot_index=_pivot_index(exc)) from exc
    return cho_solve(factor, b, check_finite=False)


def spd_factor(a):
    """Cholesky factor of an SPD matrix (scipy ``cho_factor`` convention)."""
    a = _as_matrix(a, "a")
    _require_square(a, "a")
    try:
        return cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(str(exc), pivot_index=_pivot_index(exc)) from exc


def _pivot_index(exc: Exception):
    # LAPACK message: "<k>-th leading minor of the array is not positive definite"
    m = re.search(r"(\d+)", str(exc))
    return int(m.group(1)) - 1 if m else None


def trace(a) -> float:
    """Trace of a square matrix."""
    a = _as_matrix(a, "a")
    _require_square(a, "a")
    return float(np.trace(a))


def sym_matrix_power(a, exponent: float, floor: float = 0.0) -> np.ndarray:
    """Symmetric matrix power ``a^exponent`` through the eigendecomposition.

    Eigenvalues at or below ``floor`` raise for negative exponents; used for
    Gram-matrix square roots where the caller screens rank separately.
    """
    eig = sym_eig(a)
    w = eig.values
    if exponent < 0 and np.any(w <= floor):
        raise SingularityError(
            f"matrix power {exponent} needs eigenvalues > {floor:g}; min is {w.min():g}"
        )
    powered = np.where(w > floor, w, floor) ** exponent
    return (eig.vectors * powered) @ eig.vectors.T
