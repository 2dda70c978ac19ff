"""Basis systems for functional data: B-splines, Fourier, and difference penalties.

Two families are supported. B-spline bases use equally spaced interior knots
on a closed interval with clamped boundary knots, so they satisfy partition of
unity on the domain. Fourier bases are scaled to be orthonormal in the
L2 inner product on their domain (on [0, 1] the first column is the constant
function 1, followed by sqrt(2)*sin(2*pi*j*s) and sqrt(2)*cos(2*pi*j*s) pairs).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline
from scipy.special import ndtr

from .errors import DomainError, ParameterError

_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class BasisSpec:
    """Description of one basis system.

    Parameters
    ----------
    kind : {"bspline", "fourier"}
    dimension : int
        Number of basis functions (columns of the evaluation matrix).
    domain : (float, float)
        Closed evaluation interval, lower < upper.
    degree : int
        Spline degree (ignored for Fourier); cubic by default.
    knots : tuple of float
        Interior knots, strictly inside the domain, ascending. For a B-spline
        basis ``dimension == len(knots) + degree + 1`` must hold.
    """

    kind: str
    dimension: int
    domain: tuple[float, float]
    degree: int = 3
    knots: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in ("bspline", "fourier"):
            raise ParameterError(f"unknown basis kind {self.kind!r}")
        if self.dimension < 1:
            raise ParameterError("basis dimension must be >= 1")
        lo, hi = self.domain
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ParameterError(f"domain must be a finite interval, got {self.domain}")
        if self.kind == "bspline":
            if self.degree < 1:
                raise ParameterError("spline degree must be >= 1")
            if self.dimension != len(self.knots) + self.degree + 1:
                raise ParameterError(
                    "bspline dimension must equal interior knot count + degree + 1; "
                    f"got dimension={self.dimension}, knots={len(self.knots)}, "
                    f"degree={self.degree}"
                )
            ks = np.asarray(self.knots, dtype=float)
            if ks.size and (ks.min() <= lo or ks.max() >= hi or np.any(np.diff(ks) <= 0)):
                raise ParameterError("interior knots must be ascending and strictly inside the domain")


def bspline_basis(dimension: int, domain=(0.0, 1.0), degree: int = 3) -> BasisSpec:
    """B-spline basis with equally spaced interior knots.

    ``dimension`` must be at least ``degree + 1``.
    """
    n_interior = dimension - degree - 1
    if n_interior < 0:
        raise ParameterError(
            f"bspline dimension must be >= degree + 1 = {degree + 1}, got {dimension}"
        )
    lo, hi = float(domain[0]), float(domain[1])
    interior = tuple(np.linspace(lo, hi, n_interior + 2)[1:-1].tolist())
    return BasisSpec("bspline", dimension, (lo, hi), degree, interior)


def fourier_basis(dimension: int, domain=(0.0, 1.0)) -> BasisSpec:
    """Fourier basis (constant, then sin/cos pairs of increasing frequency)."""
    lo, hi = float(domain[0]), float(domain[1])
    return BasisSpec("fourier", dimension, (lo, hi), degree=0, knots=())


def _full_knot_vector(spec: BasisSpec) -> np.ndarray:
    lo, hi = spec.domain
    return np.concatenate(
        [np.full(spec.degree + 1, lo), np.asarray(spec.knots), np.full(spec.degree + 1, hi)]
    )


def _clamp_to_domain(points: np.ndarray, spec: BasisSpec) -> np.ndarray:
    lo, hi = spec.domain
    below = points < lo
    above = points > hi
    bad = (points < lo - _EDGE_TOL) | (points > hi + _EDGE_TOL)
    bad |= ~np.isfinite(points)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise DomainError(
            f"point {points[idx]!r} at index {idx} outside basis domain [{lo}, {hi}]",
            index=idx,
        )
    if np.any(below) or np.any(above):
        points = np.clip(points, lo, hi)
    return points


def eval_basis(spec: BasisSpec, points) -> np.ndarray:
    """Evaluate all basis functions at the given points.

    Returns an array of shape ``(len(points), spec.dimension)``. Points may
    sit up to 1e-12 outside the domain (they are clamped to the endpoint);
    anything further out raises :class:`DomainError` with the offending index.
    """
    points = np.atleast_1d(np.asarray(points, dtype=float))
    if points.ndim != 1:
        raise ParameterError("points must be one-dimensional")
    points = _clamp_to_domain(points, spec)
    if spec.kind == "bspline":
        knots = _full_knot_vector(spec)
        design = BSpline.design_matrix(points, knots, spec.degree, extrapolate=False)
        return design.toarray()
    return _fourier_columns(spec, points)


def _fourier_columns(spec: BasisSpec, points: np.ndarray) -> np.ndarray:
    lo, hi = spec.domain
    length = hi - lo
    u = (points - lo) / length
    out = np.empty((points.size, spec.dimension))
    out[:, 0] = 1.0 / np.sqrt(length)
    scale = np.sqrt(2.0 / length)
    for col in range(1, spec.dimension):
        j = (col + 1) // 2
        angle = 2.0 * np.pi * j * u
        out[:, col] = scale * (np.sin(angle) if col % 2 == 1 else np.cos(angle))
    return out


def difference_penalty(dimension: int, order: int = 2) -> np.ndarray:
    """Penalty matrix ``D' D`` from the order-th difference operator.

    ``D`` maps a coefficient vector of length ``dimension`` to its order-th
    differences, so the result is positive semidefinite with a null space of
    exactly ``order`` polynomial coefficient sequences.
    """
    if order < 1:
        raise ParameterError("difference order must be >= 1")
    if dimension <= order:
        raise ParameterError(
            f"need dimension > order, got dimension={dimension}, order={order}"
        )
    d = np.diff(np.eye(dimension), n=order, axis=0)
    return d.T @ d


def gaussian_cdf(x, mean=0.0, variance=1.0):
    """Normal distribution function with the given mean and variance.

    Accepts scalars or arrays; variance must be strictly positive. Accuracy
    is that of the underlying erf implementation (well below 1e-12 absolute).
    """
    variance = np.asarray(variance, dtype=float)
    if np.any(variance <= 0) or not np.all(np.isfinite(variance)):
        raise ParameterError("variance must be strictly positive and finite")
    x = np.asarray(x, dtype=float)
    z = (x - mean) / np.sqrt(variance)
    out = ndtr(z)
    if out.ndim == 0:
        return float(out)
    return out
