"""Reference models the main estimator is compared against.

Four progressively simpler regressions on the same score decomposition:

* ``vcflm``: linear in the raw scores with time-varying slopes,
  ``y = a(t) + sum_k xi_k b_k(t)``.
* ``fam1``: additive in the transformed scores plus a time trend,
  ``y = sum_k g_k(zeta_k) + h(t)``.
* ``fam2``: additive in the transformed scores only.
* ``flm``: plain ridge on the raw score vector.

Each model selects one smoothing weight by AIC on a grid, with ties going to
the larger (smoother) candidate, mirroring the main tuner. The additive
models constrain every score block to sum to zero over the training rows so
the blocks and the mean (or time trend) stay separately identified; the
constraint is enforced by solving in an orthonormal basis of its null space
and then mapping back, so stored coefficients are always in the full basis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, null_space, solve_triangular

from .basis import BasisSpec, bspline_basis, difference_penalty, eval_basis, fourier_basis
from .errors import ParameterError, ShapeError, SingularityError, TuningError
from .fdata import FunctionalSample
from .fpca import FpcaModel, project_scores, transform_scores
from .linalg import spd_factor
from .model import (
    DEFAULT_LAMBDA_GRID,
    RIDGE_REL,
    SigmaIid,
    _penalty_eigendecomposition,
    clamp_to_domain,
    estimate_sigma,
    gaussian_log_likelihood,
)

BASELINE_KINDS = ("vcflm", "fam1", "fam2", "flm")


@dataclass(frozen=True)
class BaselineModel:
    """One fitted reference model.

    ``coefficients`` concatenates the per-block coefficient vectors in the
    unconstrained basis, in the same block order the design uses, so
    prediction is a design build plus one dot product.
    """

    kind: str
    fpca: FpcaModel
    coefficients: np.ndarray
    lambda_value: float
    df: float
    aic: float
    sigma: SigmaIid
    response_mean: float
    fitted: np.ndarray
    zeta_basis: BasisSpec | None = None
    t_basis: BasisSpec | None = None
    aic_table: np.ndarray | None = None
    lambda_grid: tuple = ()


def _tune_single_lambda(x, y_centered, penalty, lambda_grid, back_transform):
    """Scan a one-dimensional lambda grid by AIC in the penalty eigenbasis.

    ``back_transform`` maps solution vectors from the solve basis to the
    stored (unconstrained) coefficient basis.
    """
    n = y_centered.size
    grid = sorted(float(v) for v in lambda_grid)
    if not grid or grid[0] < 0:
        raise ParameterError("lambda grid must be non-empty and non-negative")
    vectors, pen_eigs = _penalty_eigendecomposition(penalty)
    xt = x @ vectors
    m = xt.T @ xt
    m = 0.5 * (m + m.T)
    p = m.shape[0]
    delta = RIDGE_REL * max(float(np.trace(m)) / p, 1.0)
    xty = xt.T @ y_centered

    best = None
    table = np.full(len(grid), np.nan)
    failures = []
    for idx, lam in enumerate(grid):
        try:
            a = m + np.diag(n * lam * pen_eigs + delta)
            factor = spd_factor(a)
            theta_rot = cho_solve(factor, xty, check_finite=False)
            half = solve_triangular(factor[0], xt.T, lower=True, check_finite=False)
            df = float(np.einsum("ij,ij->", half, half))
            residuals = y_centered - xt @ theta_rot
            sigma = estimate_sigma(residuals, "iid", df=df)
        except (SingularityError, ParameterError, FloatingPointError) as exc:
            failures.append((lam, str(exc)))
            continue
        value = -2.0 * gaussian_log_likelihood(residuals, sigma) + 2.0 * df
        table[idx] = value
        if not np.isfinite(value):
            failures.append((lam, f"non-finite AIC {value}"))
            continue
        if best is None or value <= best[0]:
            best = (value, lam, vectors @ theta_rot, df, sigma, residuals)
    if best is None:
        raise TuningError(
            f"all {len(grid)} lambda grid points failed; "
            f"first failure: {failures[0][1] if failures else 'none recorded'}"
        )
    value, lam, theta, df, sigma, residuals = best
    return back_transform(theta), lam, df, value, sigma, residuals, table, tuple(grid)


def _block_diagonal(blocks) -> np.ndarray:
    sizes = [b.shape[0] for b in blocks]
    out = np.zeros((sum(sizes), sum(sizes)))
    at = 0
    for b, s in zip(blocks, sizes):
        out[at : at + s, at : at + s] = b
        at += s
    return out


def _sum_to_zero_transforms(blocks):
    """Orthonormal null-space bases of the per-block sum-over-rows constraint."""
    transforms = []
    for e in blocks:
        c = e.sum(axis=0)
        t = null_space(c[None, :])
        if t.shape[1] != e.shape[1] - 1:
            raise ParameterError("degenerate sum-to-zero constraint")
        transforms.append(t)
    return transforms


def _resolve_t_basis(t, m2, t_domain, t_basis_kind):
    if t_domain is None:
        lo, hi = float(np.min(t)), float(np.max(t))
        if lo == hi:
            raise ParameterError("t values are constant; no usable t domain")
        t_domain = (lo, hi)
    if t_basis_kind == "bspline":
        return bspline_basis(m2, t_domain)
    if t_basis_kind == "fourier":
        return fourier_basis(m2, t_domain)
    raise ParameterError(f"unknown t basis kind {t_basis_kind!r}")


def _check_lengths(fpca_model: FpcaModel, y, t=None):
    n = fpca_model.scores.shape[0]
    y = np.asarray(y, dtype=float)
    if y.shape != (n,):
        raise ShapeError(f"y must have shape ({n},), got {y.shape}")
    if t is None:
        return y, None
    t = np.asarray(t, dtype=float)
    if t.shape != (n,):
        raise ShapeError(f"t must have shape ({n},), got {t.shape}")
    return y, t


def fit_vcflm(
    fpca_model: FpcaModel,
    t,
    y,
    *,
    m2: int = 8,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    penalty_order: int = 2,
    t_domain=None,
    t_basis_kind: str = "bspline",
) -> BaselineModel:
    """Time-varying intercept and slopes, linear in the raw scores."""
    y, t = _check_lengths(fpca_model, y, t)
    xi = fpca_model.scores
    q = xi.shape[1]
    t_basis = _resolve_t_basis(t, m2, t_domain, t_basis_kind)
    psi = eval_basis(t_basis, t)
    x = np.concatenate([psi] + [xi[:, k : k + 1] * psi for k in range(q)], axis=1)
    p2 = difference_penalty(m2, penalty_order)
    penalty = _block_diagonal([p2] * (q + 1))
    mean = float(y.mean())
    coef, lam, df, value, sigma, residuals, table, grid = _tune_single_lambda(
        x, y - mean, penalty, lambda_grid, lambda v: v
    )
    return BaselineModel(
        kind="vcflm",
        fpca=fpca_model,
        coefficients=coef,
        lambda_value=lam,
        df=df,
        aic=value,
        sigma=sigma,
        response_mean=mean,
        fitted=y - residuals,
        t_basis=t_basis,
        aic_table=table,
        lambda_grid=grid,
    )


def fit_fam1(
    fpca_model: FpcaModel,
    t,
    y,
    *,
    m1: int = 10,
    m2: int = 8,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    penalty_order: int = 2,
    t_domain=None,
    t_basis_kind: str = "bspline",
) -> BaselineModel:
    """Additive in the transformed scores with a smooth time trend."""
    y, t = _check_lengths(fpca_model, y, t)
    zeta = transform_scores(fpca_model.scores, fpca_model.eigenvalues)
    q = zeta.shape[1]
    zeta_basis = bspline_basis(m1, (0.0, 1.0))
    t_basis = _resolve_t_basis(t, m2, t_domain, t_basis_kind)
    blocks = [eval_basis(zeta_basis, zeta[:, k]) for k in range(q)]
    transforms = _sum_to_zero_transforms(blocks)
    psi = eval_basis(t_basis, t)
    x = np.concatenate([e @ tr for e, tr in zip(blocks, transforms)] + [psi], axis=1)
    p1 = difference_penalty(m1, penalty_order)
    penalty = _block_diagonal(
        [tr.T @ p1 @ tr for tr in transforms] + [difference_penalty(m2, penalty_order)]
    )

    def back(theta):
        out, at = [], 0
        for tr in transforms:
            width = tr.shape[1]
            out.append(tr @ theta[at : at + width])
            at += width
        out.append(theta[at:])
        return np.concatenate(out)

    mean = float(y.mean())
    coef, lam, df, value, sigma, residuals, table, grid = _tune_single_lambda(
        x, y - mean, penalty, lambda_grid, back
    )
    return BaselineModel(
        kind="fam1",
        fpca=fpca_model,
        coefficients=coef,
        lambda_value=lam,
        df=df,
        aic=value,
        sigma=sigma,
        response_mean=mean,
        fitted=y - residuals,
        zeta_basis=zeta_basis,
        t_basis=t_basis,
        aic_table=table,
        lambda_grid=grid,
    )


def fit_fam2(
    fpca_model: FpcaModel,
    y,
    *,
    m1: int = 10,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    penalty_order: int = 2,
) -> BaselineModel:
    """Additive in the transformed scores, no time effect."""
    y, _ = _check_lengths(fpca_model, y)
    zeta = transform_scores(fpca_model.scores, fpca_model.eigenvalues)
    q = zeta.shape[1]
    zeta_basis = bspline_basis(m1, (0.0, 1.0))
    blocks = [eval_basis(zeta_basis, zeta[:, k]) for k in range(q)]
    transforms = _sum_to_zero_transforms(blocks)
    x = np.concatenate([e @ tr for e, tr in zip(blocks, transforms)], axis=1)
    p1 = difference_penalty(m1, penalty_order)
    penalty = _block_diagonal([tr.T @ p1 @ tr for tr in transforms])

    def back(theta):
        out, at = [], 0
        for tr in transforms:
            width = tr.shape[1]
            out.append(tr @ theta[at : at + width])
            at += width
        return np.concatenate(out)

    mean = float(y.mean())
    coef, lam, df, value, sigma, residuals, table, grid = _tune_single_lambda(
        x, y - mean, penalty, lambda_grid, back
    )
    return BaselineModel(
        kind="fam2",
        fpca=fpca_model,
        coefficients=coef,
        lambda_value=lam,
        df=df,
        aic=value,
        sigma=sigma,
        response_mean=mean,
        fitted=y - residuals,
        zeta_basis=zeta_basis,
        aic_table=table,
        lambda_grid=grid,
    )


def fit_flm(
    fpca_model: FpcaModel,
    y,
    *,
    lambda_grid=DEFAULT_LAMBDA_GRID,
) -> BaselineModel:
    """Ridge regression of the response on the raw score vector."""
    y, _ = _check_lengths(fpca_model, y)
    xi = fpca_model.scores
    q = xi.shape[1]
    mean = float(y.mean())
    coef, lam, df, value, sigma, residuals, table, grid = _tune_single_lambda(
        xi, y - mean, np.eye(q), lambda_grid, lambda v: v
    )
    return BaselineModel(
        kind="flm",
        fpca=fpca_model,
        coefficients=coef,
        lambda_value=lam,
        df=df,
        aic=value,
        sigma=sigma,
        response_mean=mean,
        fitted=y - residuals,
        aic_table=table,
        lambda_grid=grid,
    )


def predict_baseline(model: BaselineModel, new_curves: FunctionalSample, new_t=None):
    """Predict responses from a fitted reference model.

    ``new_t`` is required for the models with a time component (``vcflm``,
    ``fam1``) and ignored otherwise. Time points may sit at most 1e-9 outside
    the fitted domain.
    """
    if model.kind not in BASELINE_KINDS:
        raise ParameterError(f"unknown baseline kind {model.kind!r}")
    n = new_curves.n_curves
    if n == 0:
        return np.empty(0)
    scores = project_scores(model.fpca, new_curves)
    if model.kind in ("vcflm", "fam1"):
        if new_t is None:
            raise ParameterError(f"{model.kind} prediction requires t values")
        new_t = np.atleast_1d(np.asarray(new_t, dtype=float))
        if new_t.size != n:
            raise ShapeError(f"{n} curves but {new_t.size} design points")
        t_clamped = clamp_to_domain(new_t, model.t_basis.domain)
        psi = eval_basis(model.t_basis, t_clamped)
    if model.kind == "vcflm":
        q = scores.shape[1]
        x = np.concatenate([psi] + [scores[:, k : k + 1] * psi for k in range(q)], axis=1)
    elif model.kind == "fam1":
        zeta = transform_scores(scores, model.fpca.eigenvalues)
        q = zeta.shape[1]
        x = np.concatenate(
            [eval_basis(model.zeta_basis, zeta[:, k]) for k in range(q)] + [psi], axis=1
        )
    elif model.kind == "fam2":
        zeta = transform_scores(scores, model.fpca.eigenvalues)
        q = zeta.shape[1]
        x = np.concatenate(
            [eval_basis(model.zeta_basis, zeta[:, k]) for k in range(q)], axis=1
        )
    else:
        x = scores
    return x @ model.coefficients + model.response_mean
