"""Varying-coefficient functional additive regression on transformed scores.

The regression surface for component k is a tensor-product expansion
``f_k(z, t) = eta(z)' Theta_k psi(t)`` with B-spline (or Fourier) margins.
Stacking the per-component blocks row-wise gives a linear design in the
flattened coefficient matrices, estimated by penalized (feasible) generalized
least squares with separate difference penalties along the two margins:

    theta_hat = (X' S^-1 X + n * Omega)^-1 X' S^-1 y
    Omega     = I_q (x) [ lz * (I (x) P_z) + lt * (P_t (x) I) ]

Model degrees of freedom are the trace of the induced hat matrix, and
smoothing parameters are selected by AIC over a two-dimensional grid.

Implementation notes on conditioning: with B-spline margins the per-block
constant-in-z directions produce identical design columns in every block, so
X and Omega share an exact null space for q >= 2 and the normal-equations
matrix is singular at any lambda. The solver therefore (a) works in the
penalty eigenbasis, where the penalty is an exact diagonal whose zero
eigenvalues are not polluted by catastrophic addition even at huge lambda,
and (b) adds a tiny ridge (1e-10 relative to the data term) that selects an
essentially minimum-norm representative without measurably changing fitted
values, degrees of freedom, or the AIC.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .basis import BasisSpec, bspline_basis, difference_penalty, eval_basis, fourier_basis
from .errors import (
    DegenerateFitWarning,
    ExtrapolationError,
    ParameterError,
    ShapeError,
    SingularityError,
    TuningError,
)
from .fdata import FunctionalSample
from .fpca import FpcaModel, project_scores, transform_scores
from .linalg import kron, spd_factor, sym_eig

RIDGE_REL = 1e-10
_PENALTY_EIG_CLIP = 1e-12

DEFAULT_LAMBDA_GRID = tuple(float(x) for x in np.logspace(-6.0, 1.0, 8))


@dataclass(frozen=True)
class VcfamConfig:
    """Dimensions and fitting options for the tensor-product model."""

    m1: int = 10
    m2: int = 8
    lambda_zeta: float = 1.0
    lambda_t: float = 1.0
    sigma_structure: str = "iid"
    penalty_order: int = 2
    max_gls_iterations: int = 25
    gls_tolerance: float = 1e-8

    def __post_init__(self):
        if self.m1 < 4 or self.m2 < 4:
            raise ParameterError(f"basis dimensions must be >= 4, got ({self.m1}, {self.m2})")
        if self.lambda_zeta < 0 or self.lambda_t < 0:
            raise ParameterError("penalty weights must be >= 0")
        if self.sigma_structure not in ("iid", "ar1"):
            raise ParameterError(f"unknown sigma structure {self.sigma_structure!r}")
        if self.penalty_order not in (1, 2, 3):
            raise ParameterError("penalty order must be 1, 2, or 3")
        if self.max_gls_iterations < 1 or self.gls_tolerance <= 0:
            raise ParameterError("bad GLS iteration controls")


@dataclass(frozen=True)
class SigmaIid:
    """iid errors with the given variance."""

    variance: float
    degenerate: bool = False


@dataclass(frozen=True)
class SigmaAr1:
    """AR(1) errors: innovation variance and lag-1 correlation."""

    innovation_variance: float
    rho: float
    degenerate: bool = False


@dataclass(frozen=True)
class FitDiagnostics:
    """Per-fit quantities the tuner and reports need."""

    df: float
    log_likelihood: float
    residuals: np.ndarray
    rss: float
    gls_iterations: int


@dataclass(frozen=True)
class PenalizedFit:
    """Result of one penalized (F)GLS solve."""

    theta: np.ndarray
    diagnostics: FitDiagnostics
    sigma: SigmaIid | SigmaAr1


def build_design(zeta, t, zeta_basis: BasisSpec, t_basis: BasisSpec) -> np.ndarray:
    """Row-wise Kronecker design, one column block per score component.

    Row i of block k is ``psi(t_i) (x) eta(zeta_ik)``: within a block, the
    column for margin functions (h, l) sits at index ``l * m1 + h``.
    """
    zeta = np.asarray(zeta, dtype=float)
    t = np.asarray(t, dtype=float)
    if zeta.ndim != 2:
        raise ShapeError(f"zeta must be (n, q), got shape {zeta.shape}")
    n, q = zeta.shape
    if t.shape != (n,):
        raise ShapeError(f"t must have shape ({n},), got {t.shape}")
    psi = eval_basis(t_basis, t)
    m1, m2 = zeta_basis.dimension, t_basis.dimension
    x = np.empty((n, q * m1 * m2))
    for k in range(q):
        eta = eval_basis(zeta_basis, zeta[:, k])
        block = np.einsum("il,ih->ilh", psi, eta).reshape(n, m1 * m2)
        x[:, k * m1 * m2 : (k + 1) * m1 * m2] = block
    return x


def build_penalty(
    q: int,
    lambda_zeta: float,
    lambda_t: float,
    zeta_penalty: np.ndarray,
    t_penalty: np.ndarray,
) -> np.ndarray:
    """Block-diagonal tensor penalty, identical across the q components."""
    if q < 1:
        raise ParameterError("q must be >= 1")
    if lambda_zeta < 0 or lambda_t < 0:
        raise ParameterError("penalty weights must be >= 0")
    zeta_penalty = np.asarray(zeta_penalty, dtype=float)
    t_penalty = np.asarray(t_penalty, dtype=float)
    m1, m2 = zeta_penalty.shape[0], t_penalty.shape[0]
    block = lambda_zeta * kron(np.eye(m2), zeta_penalty) + lambda_t * kron(
        t_penalty, np.eye(m1)
    )
    return kron(np.eye(q), block)


def _ar1_whiten(a: np.ndarray, rho: float) -> np.ndarray:
    """Prais-Winsten transform making AR(1) noise white (unit innovations)."""
    out = np.empty_like(a)
    out[0] = np.sqrt(1.0 - rho * rho) * a[0]
    out[1:] = a[1:] - rho * a[:-1]
    return out


def _solve_eigenbasis(
    xw: np.ndarray, yw: np.ndarray, vectors: np.ndarray, pen_eigs: np.ndarray, scale: float
):
    """Penalized solve in the penalty eigenbasis.

    Returns coefficients in the original basis, the effective degrees of
    freedom, and fitted values computed against ``xw``/``yw``.
    """
    xt = xw @ vectors
    m = xt.T @ xt
    m = 0.5 * (m + m.T)
    p = m.shape[0]
    delta = RIDGE_REL * max(np.trace(m) / p, 1.0)
    a = m + np.diag(scale * pen_eigs + delta)
    factor = spd_factor(a)
    theta_rot = cho_solve(factor, xt.T @ yw, check_finite=False)
    lower = factor[0]
    half = solve_triangular(lower, xt.T, lower=True, check_finite=False)
    df = float(np.einsum("ij,ij->", half, half))
    return vectors @ theta_rot, df, xt @ theta_rot


def _penalty_eigendecomposition(omega: np.ndarray):
    eig = sym_eig(omega)
    vals = eig.values.copy()
    top = float(vals.max(initial=0.0))
    floor = _PENALTY_EIG_CLIP * max(top, 1.0)
    if float(vals.min(initial=0.0)) < -floor:
        raise ParameterError("penalty matrix must be positive semidefinite")
    vals[vals < floor] = 0.0
    return eig.vectors, vals


def gaussian_log_likelihood(residuals: np.ndarray, sigma) -> float:
    """Exact Gaussian log-likelihood of residuals under an iid or AR(1) model."""
    r = np.asarray(residuals, dtype=float)
    n = r.size
    if isinstance(sigma, SigmaIid):
        v = max(sigma.variance, 1e-300)
        return -0.5 * (n * np.log(2.0 * np.pi * v) + (r @ r) / v)
    if isinstance(sigma, SigmaAr1):
        v = max(sigma.innovation_variance, 1e-300)
        rho = sigma.rho
        rw = _ar1_whiten(r, rho)
        logdet = n * np.log(v) - np.log1p(-rho * rho)
        return -0.5 * (n * np.log(2.0 * np.pi) + logdet + (rw @ rw) / v)
    raise ParameterError(f"unknown sigma description {sigma!r}")


def estimate_sigma(residuals, structure: str = "iid", df: float = 0.0):
    """Error-model estimate from residuals, degrees-of-freedom adjusted.

    iid: variance = RSS / (n - df). ar1: lag-1 autocorrelation (clamped to
    +-0.99) plus innovation variance (1 - rho^2) * marginal. Zero residuals
    yield a degenerate description and a :class:`DegenerateFitWarning`.
    """
    r = np.asarray(residuals, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise ShapeError("residuals must be a non-empty vector")
    n = r.size
    if n - df <= 0:
        raise ParameterError(f"effective sample size n - df = {n - df:.2f} is not positive")
    rss = float(r @ r)
    if rss == 0.0:
        warnings.warn("zero residual variance", DegenerateFitWarning)
        if structure == "iid":
            return SigmaIid(0.0, degenerate=True)
        return SigmaAr1(0.0, 0.0, degenerate=True)
    marginal = rss / (n - df)
    if structure == "iid":
        return SigmaIid(marginal)
    if structure == "ar1":
        rho = float(r[:-1] @ r[1:] / rss)
        rho = float(np.clip(rho, -0.99, 0.99))
        return SigmaAr1((1.0 - rho * rho) * marginal, rho)
    raise ParameterError(f"unknown sigma structure {structure!r}")


def fit(
    X,
    y,
    omega,
    *,
    sigma_structure: str = "iid",
    max_gls_iterations: int = 25,
    gls_tolerance: float = 1e-8,
) -> PenalizedFit:
    """Penalized (feasible) GLS fit of ``y`` on ``X`` with penalty ``omega``.

    iid errors: a single solve at Sigma = I followed by variance profiling
    RSS / (n - df). AR(1) errors: alternates coefficient and correlation
    updates until the (rho, innovation-variance) pair stabilizes.
    """
    x = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2:
        raise ShapeError("X must be 2-D")
    n, p = x.shape
    if y.shape != (n,):
        raise ShapeError(f"y must have shape ({n},), got {y.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ParameterError("design and response must be finite")
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (p, p):
        raise ShapeError(f"omega must be ({p}, {p}), got {omega.shape}")
    vectors, pen_eigs = _penalty_eigendecomposition(omega)

    if sigma_structure == "iid":
        theta, df, fitted = _solve_eigenbasis(x, y, vectors, pen_eigs, float(n))
        residuals = y - fitted
        sigma = estimate_sigma(residuals, "iid", df=df)
        diag = FitDiagnostics(
            df=df,
            log_likelihood=gaussian_log_likelihood(residuals, sigma),
            residuals=residuals,
            rss=float(residuals @ residuals),
            gls_iterations=1,
        )
        return PenalizedFit(theta=theta, diagnostics=diag, sigma=sigma)

    if sigma_structure != "ar1":
        raise ParameterError(f"unknown sigma structure {sigma_structure!r}")

    rho, innov = 0.0, 1.0
    theta = df = None
    iterations = 0
    for iterations in range(1, max_gls_iterations + 1):
        xw = _ar1_whiten(x, rho) if rho != 0.0 else x
        yw = _ar1_whiten(y, rho) if rho != 0.0 else y
        theta, df, _ = _solve_eigenbasis(xw, yw, vectors, pen_eigs, float(n) * innov)
        residuals = y - x @ theta
        sigma = estimate_sigma(residuals, "ar1", df=df)
        change = max(
            abs(sigma.rho - rho),
            abs(sigma.innovation_variance - innov) / (1.0 + innov),
        )
        rho, innov = sigma.rho, sigma.innovation_variance
        if sigma.degenerate or change < gls_tolerance:
            break
        innov = max(innov, 1e-300)
    residuals = y - x @ theta
    diag = FitDiagnostics(
        df=df,
        log_likelihood=gaussian_log_likelihood(residuals, sigma),
        residuals=residuals,
        rss=float(residuals @ residuals),
        gls_iterations=iterations,
    )
    return PenalizedFit(theta=theta, diagnostics=diag, sigma=sigma)


def aic(diagnostics: FitDiagnostics, sigma) -> float:
    """Akaike criterion: -2 log-likelihood at the fit plus 2 df."""
    return -2.0 * gaussian_log_likelihood(diagnostics.residuals, sigma) + 2.0 * diagnostics.df


def penalized_objective(theta, X, y, omega, sigma=None) -> float:
    """Objective minimized by :func:`fit` at fixed Sigma.

    ``(1/2) r' S^-1 r + (n/2) theta' omega theta`` whose stationary point is
    the closed-form estimator.
    """
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size
    r = y - x @ theta
    if sigma is None or isinstance(sigma, SigmaIid) and sigma.variance == 1.0:
        quad = r @ r
    elif isinstance(sigma, SigmaIid):
        quad = (r @ r) / sigma.variance
    elif isinstance(sigma, SigmaAr1):
        rw = _ar1_whiten(r, sigma.rho)
        quad = (rw @ rw) / sigma.innovation_variance
    else:
        raise ParameterError(f"unknown sigma description {sigma!r}")
    return 0.5 * quad + 0.5 * n * float(theta @ (np.asarray(omega) @ theta))


def objective_gradient(theta, X, y, omega, sigma=None) -> np.ndarray:
    """Analytic gradient of :func:`penalized_objective` in theta."""
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size
    r = y - x @ theta
    if sigma is None or isinstance(sigma, SigmaIid) and sigma.variance == 1.0:
        data_part = x.T @ r
    elif isinstance(sigma, SigmaIid):
        data_part = x.T @ r / sigma.variance
    elif isinstance(sigma, SigmaAr1):
        rw = _ar1_whiten(r, sigma.rho)
        xw = _ar1_whiten(x, sigma.rho)
        data_part = xw.T @ rw / sigma.innovation_variance
    else:
        raise ParameterError(f"unknown sigma description {sigma!r}")
    return -data_part + n * (np.asarray(omega) @ theta)


@dataclass(frozen=True)
class VcfamModel:
    """Fitted varying-coefficient functional additive model.

    ``theta[k]`` is the (m1, m2) coefficient matrix of component k against
    the zeta margin (rows) and the t margin (columns). Fitted values and the
    response mean live on the original response scale.
    """

    config: VcfamConfig
    fpca: FpcaModel
    zeta_basis: BasisSpec
    t_basis: BasisSpec
    theta: np.ndarray
    lambda_zeta: float
    lambda_t: float
    sigma: SigmaIid | SigmaAr1
    df: float
    aic: float
    response_mean: float
    fitted: np.ndarray
    gls_iterations: int = 1
    aic_table: np.ndarray | None = None
    lambda_grid_zeta: tuple = ()
    lambda_grid_t: tuple = ()
    tuning_failures: tuple = ()

    @property
    def q(self) -> int:
        return self.theta.shape[0]


def _theta_blocks(theta_vec: np.ndarray, q: int, m1: int, m2: int) -> np.ndarray:
    # block layout is psi-major: entry (l * m1 + h) -> Theta[h, l]
    return np.stack(
        [theta_vec[k * m1 * m2 : (k + 1) * m1 * m2].reshape(m2, m1).T for k in range(q)]
    )


def _blocks_to_vec(theta: np.ndarray) -> np.ndarray:
    q, m1, m2 = theta.shape
    return np.concatenate([theta[k].T.reshape(m1 * m2) for k in range(q)])


class _GridSolver:
    """Shared state for scanning a lambda grid on one dataset.

    The design is rotated once into the per-block penalty eigenbasis, where
    every grid point only changes a diagonal, leaving a Cholesky per point.
    """

    def __init__(self, x: np.ndarray, y: np.ndarray, config: VcfamConfig, q: int):
        self.n, self.p = x.shape
        self.config = config
        self.q = q
        m1, m2 = config.m1, config.m2
        pz = difference_penalty(m1, config.penalty_order)
        pt = difference_penalty(m2, config.penalty_order)
        ez, et = sym_eig(pz), sym_eig(pt)
        za = ez.values.copy()
        ta = et.values.copy()
        za[za < _PENALTY_EIG_CLIP * max(za.max(), 1.0)] = 0.0
        ta[ta < _PENALTY_EIG_CLIP * max(ta.max(), 1.0)] = 0.0
        rotation = kron(et.vectors, ez.vectors)
        self.rotation = rotation
        # diagonal penalty per block in the rotated basis, psi-major layout
        self.zeta_eigs = np.tile(za, m2)
        self.t_eigs = np.repeat(ta, m1)
        self.x = x
        self.y = y
        self.xt = np.empty_like(x)
        block = m1 * m2
        for k in range(q):
            sl = slice(k * block, (k + 1) * block)
            self.xt[:, sl] = x[:, sl] @ rotation
        self._cache_whitened(0.0)

    def _cache_whitened(self, rho: float):
        self.rho = rho
        xw = _ar1_whiten(self.xt, rho) if rho != 0.0 else self.xt
        yw = _ar1_whiten(self.y, rho) if rho != 0.0 else self.y
        self.xw = xw
        self.yw = yw
        m = xw.T @ xw
        self.m = 0.5 * (m + m.T)
        self.xty = xw.T @ yw
        self.delta = RIDGE_REL * max(float(np.trace(self.m)) / self.p, 1.0)

    def solve(self, lambda_zeta: float, lambda_t: float, scale: float):
        diag = np.tile(lambda_zeta * self.zeta_eigs + lambda_t * self.t_eigs, self.q)
        a = self.m + np.diag(scale * diag + self.delta)
        factor = spd_factor(a)
        theta_rot = cho_solve(factor, self.xty, check_finite=False)
        half = solve_triangular(factor[0], self.xw.T, lower=True, check_finite=False)
        df = float(np.einsum("ij,ij->", half, half))
        fitted = self.xt @ theta_rot
        return theta_rot, df, fitted

    def fit_point(self, lambda_zeta: float, lambda_t: float):
        """One grid point: iid profile or AR(1) feasible-GLS iteration."""
        cfg = self.config
        n = self.n
        if cfg.sigma_structure == "iid":
            if self.rho != 0.0:
                self._cache_whitened(0.0)
            theta_rot, df, fitted = self.solve(lambda_zeta, lambda_t, float(n))
            residuals = self.y - fitted
            sigma = estimate_sigma(residuals, "iid", df=df)
            iterations = 1
        else:
            rho, innov = 0.0, 1.0
            iterations = 0
            for iterations in range(1, cfg.max_gls_iterations + 1):
                if self.rho != rho:
                    self._cache_whitened(rho)
                theta_rot, df, _ = self.solve(lambda_zeta, lambda_t, float(n) * innov)
                residuals = self.y - self.xt @ theta_rot
                sigma = estimate_sigma(residuals, "ar1", df=df)
                change = max(
                    abs(sigma.rho - rho),
                    abs(sigma.innovation_variance - innov) / (1.0 + innov),
                )
                rho, innov = sigma.rho, max(sigma.innovation_variance, 1e-300)
                if sigma.degenerate or change < cfg.gls_tolerance:
                    break
            residuals = self.y - self.xt @ theta_rot
        loglik = gaussian_log_likelihood(residuals, sigma)
        diag_out = FitDiagnostics(
            df=df,
            log_likelihood=loglik,
            residuals=residuals,
            rss=float(residuals @ residuals),
            gls_iterations=iterations,
        )
        theta = np.empty(self.p)
        block = cfg.m1 * cfg.m2
        for k in range(self.q):
            sl = slice(k * block, (k + 1) * block)
            theta[sl] = self.rotation @ theta_rot[sl]
        return PenalizedFit(theta=theta, diagnostics=diag_out, sigma=sigma)


def tune(
    fpca_model: FpcaModel,
    t,
    y,
    config: VcfamConfig = VcfamConfig(),
    lambda_grid_zeta=DEFAULT_LAMBDA_GRID,
    lambda_grid_t=DEFAULT_LAMBDA_GRID,
    *,
    t_domain: tuple[float, float] | None = None,
    t_basis_kind: str = "bspline",
) -> VcfamModel:
    """Grid-search both penalty weights by AIC and refit at the winner.

    Ties prefer the lexicographically larger (lambda_zeta, lambda_t) pair,
    i.e. the smoother fit. Grid points whose solve or variance profiling
    fails are recorded and skipped; if every point fails a
    :class:`TuningError` is raised.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    zeta = transform_scores(fpca_model.scores, fpca_model.eigenvalues)
    n, q = zeta.shape
    if t.shape != (n,) or y.shape != (n,):
        raise ShapeError("t and y must match the score sample size")
    gz = sorted(float(v) for v in lambda_grid_zeta)
    gt = sorted(float(v) for v in lambda_grid_t)
    if not gz or not gt or gz[0] < 0 or gt[0] < 0:
        raise ParameterError("lambda grids must be non-empty and non-negative")

    zeta_basis = bspline_basis(config.m1, (0.0, 1.0))
    if t_domain is None:
        lo, hi = float(t.min()), float(t.max())
        if lo == hi:
            raise ParameterError("t values are constant; no usable t domain")
        t_domain = (lo, hi)
    if t_basis_kind == "bspline":
        t_basis = bspline_basis(config.m2, t_domain)
    elif t_basis_kind == "fourier":
        t_basis = fourier_basis(config.m2, t_domain)
    else:
        raise ParameterError(f"unknown t basis kind {t_basis_kind!r}")

    response_mean = float(y.mean())
    yc = y - response_mean
    x = build_design(zeta, t, zeta_basis, t_basis)
    solver = _GridSolver(x, yc, config, q)

    best = None
    best_pair = None
    failures = []
    table = np.full((len(gz), len(gt)), np.nan)
    for i, lz in enumerate(gz):
        for j, lt in enumerate(gt):
            try:
                fit_result = solver.fit_point(lz, lt)
            except (SingularityError, ParameterError, FloatingPointError) as exc:
                failures.append((lz, lt, str(exc)))
                continue
            value = aic(fit_result.diagnostics, fit_result.sigma)
            table[i, j] = value
            if not np.isfinite(value):
                failures.append((lz, lt, f"non-finite AIC {value}"))
                continue
            if best is None or value <= best[0]:
                best = (value, fit_result)
                best_pair = (lz, lt)
    if best is None:
        raise TuningError(
            f"all {len(gz) * len(gt)} lambda grid points failed; "
            f"first failure: {failures[0][2] if failures else 'none recorded'}"
        )

    value, fit_result = best
    theta = _theta_blocks(fit_result.theta, q, config.m1, config.m2)
    return VcfamModel(
        config=config,
        fpca=fpca_model,
        zeta_basis=zeta_basis,
        t_basis=t_basis,
        theta=theta,
        lambda_zeta=best_pair[0],
        lambda_t=best_pair[1],
        sigma=fit_result.sigma,
        df=fit_result.diagnostics.df,
        aic=value,
        response_mean=response_mean,
        fitted=yc - fit_result.diagnostics.residuals + response_mean,
        gls_iterations=fit_result.diagnostics.gls_iterations,
        aic_table=table,
        lambda_grid_zeta=tuple(gz),
        lambda_grid_t=tuple(gt),
        tuning_failures=tuple(failures),
    )


def clamp_to_domain(values: np.ndarray, domain: tuple[float, float], tol: float = 1e-9):
    """Clamp values within ``tol`` of the domain; error beyond that."""
    values = np.asarray(values, dtype=float)
    lo, hi = domain
    bad = (values < lo - tol) | (values > hi + tol) | ~np.isfinite(values)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise ExtrapolationError(
            f"value {values[idx]!r} at index {idx} outside fitted domain [{lo}, {hi}]",
            index=idx,
        )
    return np.clip(values, lo, hi)


def predict(model: VcfamModel, new_curves: FunctionalSample, new_t) -> np.ndarray:
    """Predict responses for new curves at new design points.

    Curves are projected onto the training eigenfunctions and transformed
    with the training eigenvalues; t may sit at most 1e-9 outside the fitted
    domain (clamped), anything further raises :class:`ExtrapolationError`.
    """
    new_t = np.atleast_1d(np.asarray(new_t, dtype=float))
    if new_curves.n_curves != new_t.size:
        raise ShapeError(
            f"{new_curves.n_curves} curves but {new_t.size} design points"
        )
    if new_curves.n_curves == 0:
        return np.empty(0)
    scores = project_scores(model.fpca, new_curves)
    zeta = transform_scores(scores, model.fpca.eigenvalues)
    t_clamped = clamp_to_domain(new_t, model.t_basis.domain)
    x = build_design(zeta, t_clamped, model.zeta_basis, model.t_basis)
    return x @ _blocks_to_vec(model.theta) + model.response_mean


def surface(
    model: VcfamModel, component: int, zeta_grid, t_grid, center_flag: bool = True
) -> np.ndarray:
    """Evaluate one component surface on a (zeta x t) grid.

    With ``center_flag`` the zeta-wise mean at each t is removed, which is
    the identified part of a single component (additive-in-t shifts can move
    freely between components without changing fitted values).
    """
    if not 0 <= component < model.q:
        raise ParameterError(f"component must be in [0, {model.q - 1}], got {component}")
    zeta_grid = np.asarray(zeta_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    eta = eval_basis(model.zeta_basis, zeta_grid)
    psi = eval_basis(model.t_basis, t_grid)
    values = eta @ model.theta[component] @ psi.T
    if center_flag:
        values = values - values.mean(axis=0, keepdims=True)
    return values
