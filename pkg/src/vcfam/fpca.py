"""Functional principal components in basis-coefficient space.

With curves written as coefficient vectors c_i against a basis with Gram
matrix W, the covariance eigenproblem reduces to the symmetric matrix
(1/n) W^(1/2) C'C W^(1/2). Eigenfunction coefficient vectors are returned
W-orthonormal, and scores are the W-inner products of centered curves with
the eigenfunctions. A Gaussian-CDF marginal transform maps each score column
to (0, 1) for downstream covariate use.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec, eval_basis, gaussian_cdf
from .errors import BasisRankError, ContractError, ParameterError, ShapeError
from .fdata import FunctionalSample
from .linalg import sym_eig

GRAM_EIGENVALUE_FLOOR = 1e-12
_TIE_RTOL = 1e-10
# keeps clamped trailing eigenvalues positive without disturbing real ones
_EIG_FLOOR_REL = np.finfo(float).eps

DEFAULT_VARIANCE_THRESHOLD = 0.99
DEFAULT_MAX_COMPONENTS = 20


@dataclass(frozen=True)
class FpcaModel:
    """Fitted functional PCA.

    ``eigenfunction_coefficients[:, k]`` are basis coefficients of the k-th
    eigenfunction (W-orthonormal, sign fixed so the largest-magnitude
    coefficient is positive). ``eigenvalues`` are the score variances under
    the 1/n convention, in decreasing order. ``mean_coefficients`` is the
    training mean curve, needed to project new samples.
    """

    basis: BasisSpec
    mean_coefficients: np.ndarray
    eigenvalues: np.ndarray
    eigenfunction_coefficients: np.ndarray
    scores: np.ndarray
    eigenvalue_ties: bool = False

    @property
    def n_components(self) -> int:
        return self.eigenvalues.size


def gram_matrix(basis: BasisSpec) -> np.ndarray:
    """Matrix of pairwise L2 inner products of the basis functions.

    Fourier bases are orthonormal by construction, so the identity is exact.
    B-spline Grams are integrated by composite Gauss-Legendre quadrature with
    enough nodes per knot span to be exact for the piecewise-polynomial
    integrand.
    """
    if basis.kind == "fourier":
        return np.eye(basis.dimension)
    lo, hi = basis.domain
    breaks = np.concatenate([[lo], np.asarray(basis.knots), [hi]])
    # product of two degree-d pieces has degree 2d; m-node GL is exact to 2m-1
    nodes, weights = np.polynomial.legendre.leggauss(basis.degree + 2)
    gram = np.zeros((basis.dimension, basis.dimension))
    for a, b in zip(breaks[:-1], breaks[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        x = mid + half * nodes
        bx = eval_basis(basis, x)
        gram += (bx * (half * weights)[:, None]).T @ bx
    return 0.5 * (gram + gram.T)


def fit_fpca(
    sample: FunctionalSample,
    q: int | None = None,
    *,
    variance_threshold: float = DEFAULT_VARIANCE_THRESHOLD,
    max_components: int = DEFAULT_MAX_COMPONENTS,
) -> FpcaModel:
    """Eigendecompose the sample covariance of a centered functional sample.

    Parameters
    ----------
    sample : FunctionalSample
        Must already be centered (column means of coefficients ~ 0).
    q : int, optional
        Number of components to keep. When omitted, the smallest number of
        components explaining ``variance_threshold`` of total variance is
        used, capped at ``max_components`` and at min(n - 1, K).
    """
    c = sample.coefficients
    n, k = c.shape
    if n < 2:
        raise ParameterError(f"need at least 2 curves to fit FPCA, got {n}")
    scale = max(1.0, np.abs(c).max())
    if np.abs(c.mean(axis=0)).max() > 1e-8 * scale:
        raise ParameterError("sample must be centered before FPCA; call center() first")

    w = gram_matrix(sample.basis)
    eig_w = sym_eig(w)
    if eig_w.values.min() < GRAM_EIGENVALUE_FLOOR:
        raise BasisRankError(
            f"Gram matrix eigenvalue {eig_w.values.min():.3e} below floor "
            f"{GRAM_EIGENVALUE_FLOOR:g}"
        )
    root = np.sqrt(eig_w.values)
    w_half = (eig_w.vectors * root) @ eig_w.vectors.T
    w_inv_half = (eig_w.vectors / root) @ eig_w.vectors.T

    z = c @ w_half
    cov = sym_eig((z.T @ z) / n)
    values = cov.values.copy()
    if values[0] <= 0:
        raise ParameterError("sample covariance has no positive eigenvalues")
    floor = values[0] * _EIG_FLOOR_REL
    values = np.maximum(values, floor)
    # ties keep the eigen-solver order but are worth flagging to the caller
    ties = bool(np.any(values[:-1] - values[1:] <= _TIE_RTOL * values[:-1]))

    limit = min(n - 1, k)
    if q is None:
        q = choose_truncation(values, variance_threshold)
        q = min(q, max_components, limit)
        q = max(q, 1)
    if not (1 <= q <= limit):
        raise ParameterError(f"q must be in [1, {limit}] (n={n}, K={k}), got {q}")

    u = cov.vectors[:, :q]
    b = w_inv_half @ u
    # sign convention: largest-magnitude coefficient of each eigenfunction positive
    flip = np.sign(b[np.abs(b).argmax(axis=0), np.arange(q)])
    flip[flip == 0] = 1.0
    b = b * flip
    scores = (z @ u) * flip
    return FpcaModel(
        basis=sample.basis,
        mean_coefficients=sample.mean_coefficients.copy(),
        eigenvalues=values[:q],
        eigenfunction_coefficients=b,
        scores=scores,
        eigenvalue_ties=ties,
    )


def choose_truncation(eigenvalues: np.ndarray, threshold: float) -> int:
    """Smallest q whose leading eigenvalues reach the given variance fraction."""
    if not 0 < threshold <= 1:
        raise ParameterError("variance threshold must be in (0, 1]")
    total = eigenvalues.sum()
    if total <= 0:
        raise ParameterError("eigenvalues must have positive sum")
    frac = np.cumsum(eigenvalues) / total
    return int(np.searchsorted(frac, threshold - 1e-12) + 1)


def project_scores(model: FpcaModel, sample: FunctionalSample) -> np.ndarray:
    """Scores of (possibly new) curves against fitted eigenfunctions.

    Curves are first re-centered with the training mean; on the training
    sample this reproduces ``model.scores``.
    """
    if sample.basis != model.basis:
        raise ContractError("sample basis does not match the FPCA basis")
    centered = (sample.coefficients + sample.mean_coefficients) - model.mean_coefficients
    w = gram_matrix(model.basis)
    return centered @ w @ model.eigenfunction_coefficients


def transform_scores(scores: np.ndarray, eigenvalues: np.ndarray) -> np.ndarray:
    """Map each score column through its N(0, eigenvalue) distribution function.

    Output entries live strictly inside (0, 1); monotone in each column, so
    score order is preserved. Columns must line up with the eigenvalues.
    """
    scores = np.asarray(scores, dtype=float)
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if scores.ndim != 2 or eigenvalues.ndim != 1 or scores.shape[1] != eigenvalues.size:
        raise ShapeError(
            f"scores {scores.shape} incompatible with {eigenvalues.size} eigenvalues"
        )
    if np.any(eigenvalues <= 0):
        raise ParameterError("eigenvalues must be strictly positive")
    out = gaussian_cdf(scores, 0.0, eigenvalues[None, :])
    return np.clip(out, 1e-15, 1.0 - 1e-15)


def reconstruct(model: FpcaModel, scores: np.ndarray, points) -> np.ndarray:
    """Rebuild curve values at ``points`` from scores (mean curve added back)."""
    scores = np.asarray(scores, dtype=float)
    coef = model.mean_coefficients + scores @ model.eigenfunction_coefficients.T
    return coef @ eval_basis(model.basis, points).T
