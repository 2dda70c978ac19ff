"""Longitudinal observations -> smooth functional data in basis coefficients.

Raw input is a rectangular matrix of curves observed on one shared grid.
Each curve is smoothed independently by penalized least squares onto a basis,
after which the sample can be mean-centered and evaluated anywhere on the
basis domain.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .basis import BasisSpec, difference_penalty, eval_basis
from .errors import BasisRankError, ParameterError, ShapeError, SingularityError
from .linalg import solve_spd

DEFAULT_SMOOTH_PENALTY = 1e-8


@dataclass(frozen=True)
class RawCurves:
    """Curves observed on a shared, strictly increasing grid.

    ``values`` has one row per curve and one column per grid point.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ShapeError("grid must be 1-D with at least two points")
        if np.any(np.diff(grid) <= 0):
            raise ParameterError("grid must be strictly increasing")
        if values.ndim != 2 or values.shape[1] != grid.size:
            raise ShapeError(
                f"values must be (n_curves, {grid.size}), got {values.shape}"
            )
        if values.size and not np.all(np.isfinite(values)):
            raise ParameterError("curve values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def n_curves(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class FunctionalSample:
    """Smoothed curves expressed in a common basis.

    The i-th curve is ``(coefficients[i] + mean_coefficients) @ basis``; an
    uncentered sample simply has ``mean_coefficients == 0``. ``center`` moves
    the sample mean from ``coefficients`` into ``mean_coefficients`` without
    changing what any curve evaluates to.
    """

    basis: BasisSpec
    coefficients: np.ndarray
    mean_coefficients: np.ndarray

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=float)
        mean = np.asarray(self.mean_coefficients, dtype=float)
        if coef.ndim != 2 or coef.shape[1] != self.basis.dimension:
            raise ShapeError(
                f"coefficients must be (n, {self.basis.dimension}), got {coef.shape}"
            )
        if mean.shape != (self.basis.dimension,):
            raise ShapeError(
                f"mean_coefficients must have shape ({self.basis.dimension},)"
            )
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "mean_coefficients", mean)

    @property
    def n_curves(self) -> int:
        return self.coefficients.shape[0]


def smooth_curves(
    raw: RawCurves, basis: BasisSpec, smooth_penalty: float = DEFAULT_SMOOTH_PENALTY
) -> FunctionalSample:
    """Fit every curve with one shared penalized least-squares smoother.

    Minimizes ``||v - B c||^2 + penalty * c' P c`` per curve, where ``P`` is
    the order-2 difference penalty for the basis. The default penalty is a
    small numerical regularizer, not a smoothing choice; tune it when the
    observations are noisy relative to the grid resolution.
    """
    if smooth_penalty < 0:
        raise ParameterError("smooth_penalty must be >= 0")
    k = basis.dimension
    if raw.grid.size < k:
        raise BasisRankError(
            f"too few grid points ({raw.grid.size}) for basis dimension {k}"
        )
    b = eval_basis(basis, raw.grid)
    normal = b.T @ b
    if smooth_penalty > 0:
        normal = normal + smooth_penalty * difference_penalty(k, 2)
    try:
        coef = solve_spd(normal, b.T @ raw.values.T).T
    except SingularityError as exc:
        raise BasisRankError(
            "smoothing system is singular; too few distinct grid points "
            f"for basis dimension {k}"
        ) from exc
    if raw.n_curves == 0:
        coef = coef.reshape(0, k)
    return FunctionalSample(basis, coef, np.zeros(k))


def center(sample: FunctionalSample) -> FunctionalSample:
    """Remove the cross-sectional mean curve, storing it on the sample.

    Idempotent: centering a centered sample is a no-op.
    """
    if sample.n_curves == 0:
        return sample
    col_mean = sample.coefficients.mean(axis=0)
    return replace(
        sample,
        coefficients=sample.coefficients - col_mean,
        mean_coefficients=sample.mean_coefficients + col_mean,
    )


def evaluate(sample: FunctionalSample, points, include_mean: bool = True) -> np.ndarray:
    """Evaluate every curve at the given points; shape ``(n_curves, n_points)``."""
    b = eval_basis(sample.basis, points)
    coef = sample.coefficients
    if include_mean:
        coef = coef + sample.mean_coefficients
    return coef @ b.T
