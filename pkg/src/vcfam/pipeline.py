"""End-to-end fitting: raw discrete curves to a tuned regression model.

The pipeline chains the stages the estimators expect to have been done:
penalized smoothing of the discretely observed predictor curves, centering,
eigendecomposition of the sample, the probability transform of the scores,
and finally one of the regression models. Prediction re-applies the stored
smoothing basis and eigensystem to new curves, so train and test pass
through identical preprocessing.

``rolling_forecast`` evaluates a model out of sample on ordered data with an
expanding window: fit on everything before the origin, predict the next
``horizon`` rows, advance. Windows whose fit fails fall back to the training
mean and are reported as failures rather than aborting the whole run.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .baselines import BaselineModel, fit_fam1, fit_fam2, fit_flm, fit_vcflm, predict_baseline
from .basis import BasisSpec, bspline_basis
from .errors import (
    BasisRankError,
    DomainError,
    ParameterError,
    ShapeError,
    SingularityError,
    TuningError,
)
from .fdata import FunctionalSample, RawCurves, center, smooth_curves
from .fpca import FpcaModel, fit_fpca, project_scores
from .model import DEFAULT_LAMBDA_GRID, VcfamConfig, VcfamModel, predict, tune

MODEL_KINDS = ("vcfam", "vcflm", "fam1", "fam2", "flm")

DEFAULT_SMOOTH_CAP = 40


@dataclass(frozen=True)
class PipelineOptions:
    """Everything configurable about the preprocessing and the model."""

    model: str = "vcfam"
    smooth_dimension: int | None = None
    smooth_penalty: float = 1e-8
    variance_threshold: float = 0.99
    max_components: int = 20
    n_components: int | None = None
    m1: int = 10
    m2: int = 8
    lambda_grid_zeta: tuple = DEFAULT_LAMBDA_GRID
    lambda_grid_t: tuple = DEFAULT_LAMBDA_GRID
    sigma_structure: str = "iid"
    penalty_order: int = 2
    t_domain: tuple[float, float] | None = None
    t_basis_kind: str = "bspline"

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise ParameterError(
                f"unknown model {self.model!r}; expected one of {MODEL_KINDS}"
            )
        if self.smooth_dimension is not None and self.smooth_dimension < 4:
            raise ParameterError("smoothing basis needs at least 4 functions")
        if self.n_components is not None and self.n_components < 1:
            raise ParameterError("n_components must be >= 1")


@dataclass(frozen=True)
class FittedPipeline:
    """A fitted preprocessing chain plus its regression model."""

    options: PipelineOptions
    smoothing_basis: BasisSpec
    fpca: FpcaModel
    model: VcfamModel | BaselineModel

    @property
    def kind(self) -> str:
        return self.options.model


def choose_smoothing_basis(curves: RawCurves, options: PipelineOptions) -> BasisSpec:
    r = curves.grid.size
    dimension = options.smooth_dimension
    if dimension is None:
        dimension = min(r - 2, DEFAULT_SMOOTH_CAP)
    if dimension < 4:
        raise ParameterError(
            f"grid with {r} points is too coarse to smooth; need at least 6"
        )
    lo, hi = float(curves.grid[0]), float(curves.grid[-1])
    return bspline_basis(dimension, (lo, hi))


def fit_regression(fpca: FpcaModel, t, y, options: PipelineOptions):
    if options.model == "vcfam":
        config = VcfamConfig(
            m1=options.m1,
            m2=options.m2,
            sigma_structure=options.sigma_structure,
            penalty_order=options.penalty_order,
        )
        return tune(
            fpca,
            t,
            y,
            config,
            options.lambda_grid_zeta,
            options.lambda_grid_t,
            t_domain=options.t_domain,
            t_basis_kind=options.t_basis_kind,
        )
    if options.model == "vcflm":
        return fit_vcflm(
            fpca,
            t,
            y,
            m2=options.m2,
            lambda_grid=options.lambda_grid_t,
            penalty_order=options.penalty_order,
            t_domain=options.t_domain,
            t_basis_kind=options.t_basis_kind,
        )
    if options.model == "fam1":
        return fit_fam1(
            fpca,
            t,
            y,
            m1=options.m1,
            m2=options.m2,
            lambda_grid=options.lambda_grid_zeta,
            penalty_order=options.penalty_order,
            t_domain=options.t_domain,
            t_basis_kind=options.t_basis_kind,
        )
    if options.model == "fam2":
        return fit_fam2(
            fpca,
            y,
            m1=options.m1,
            lambda_grid=options.lambda_grid_zeta,
            penalty_order=options.penalty_order,
        )
    return fit_flm(fpca, y, lambda_grid=options.lambda_grid_zeta)


def fit_pipeline(
    curves: RawCurves, t, y, options: PipelineOptions = PipelineOptions()
) -> FittedPipeline:
    """Smooth, decompose, transform, and fit in one call."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    n = curves.n_curves
    if t.shape != (n,) or y.shape != (n,):
        raise ShapeError(
            f"curves, t, and y must agree in length; got {n}, {t.shape}, {y.shape}"
        )
    basis = choose_smoothing_basis(curves, options)
    sample = center(smooth_curves(curves, basis, options.smooth_penalty))
    fpca = fit_fpca(
        sample,
        q=options.n_components,
        variance_threshold=options.variance_threshold,
        max_components=options.max_components,
    )
    model = fit_regression(fpca, t, y, options)
    return FittedPipeline(options=options, smoothing_basis=basis, fpca=fpca, model=model)


def predict_pipeline(fitted: FittedPipeline, new_curves: RawCurves, new_t=None) -> np.ndarray:
    """Push new raw curves through the stored preprocessing and model."""
    sample = smooth_curves(new_curves, fitted.smoothing_basis, fitted.options.smooth_penalty)
    if fitted.kind == "vcfam":
        if new_t is None:
            raise ParameterError("vcfam prediction requires t values")
        return predict(fitted.model, sample, new_t)
    return predict_baseline(fitted.model, sample, new_t)


def _refit_frozen(frozen: FittedPipeline, window: FunctionalSample, t, y) -> FittedPipeline:
    scores = project_scores(frozen.fpca, window)
    fpca = replace(frozen.fpca, scores=scores)
    model = fit_regression(fpca, t, y, frozen.options)
    return FittedPipeline(
        options=frozen.options,
        smoothing_basis=frozen.smoothing_basis,
        fpca=fpca,
        model=model,
    )


@dataclass(frozen=True)
class RollingResult:
    """One forecast per expanding window.

    ``origins[w]`` is the training size of window w and ``indices[w]`` the
    row it predicts; ``predictions``, ``actuals``, and ``null_predictions``
    are aligned to windows.
    """

    indices: np.ndarray
    predictions: np.ndarray
    actuals: np.ndarray
    null_predictions: np.ndarray
    origins: np.ndarray
    origin_success: np.ndarray
    failures: tuple

    @property
    def n_windows(self) -> int:
        return self.origins.size

    @property
    def success_rate(self) -> float:
        return float(self.origin_success.mean()) if self.origins.size else 0.0


_ROLLING_RECOVERABLE = (
    TuningError,
    SingularityError,
    BasisRankError,
    ParameterError,
    DomainError,
)


def rolling_forecast(
    curves: RawCurves,
    t,
    y,
    start_index: int,
    horizon: int,
    options: PipelineOptions = PipelineOptions(),
    *,
    freeze_fpca: bool = False,
    progress=None,
) -> RollingResult:
    """Expanding-window out-of-sample evaluation on ordered data.

    Window ``i0`` (running from ``start_index`` up to ``n - horizon`` in
    steps of one) fits on the first ``i0`` rows and predicts row
    ``i0 + horizon - 1`` alone, so the target stays ``horizon`` rows past
    the training window throughout. A window whose fit or prediction fails
    contributes the training mean instead and is flagged. The training mean
    is also recorded per window as the no-information reference forecast.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    n = curves.n_curves
    if t.shape != (n,) or y.shape != (n,):
        raise ShapeError("curves, t, and y must agree in length")
    if horizon < 1:
        raise ParameterError("horizon must be >= 1")
    if not 1 <= start_index:
        raise ParameterError(f"start_index must be >= 1, got {start_index}")
    if start_index + horizon > n:
        raise ParameterError(
            f"start_index + horizon must be <= {n}, got {start_index + horizon}"
        )

    origins = np.arange(start_index, n - horizon + 1)
    targets = origins + horizon - 1
    predictions = np.empty(origins.size)
    nulls = np.empty(origins.size)
    success = np.zeros(origins.size, dtype=bool)
    failures = []
    frozen = None
    for w, origin in enumerate(origins):
        target = int(targets[w])
        train_curves = RawCurves(curves.grid, curves.values[:origin])
        test_curves = RawCurves(curves.grid, curves.values[target : target + 1])
        y_train = y[:origin]
        train_mean = float(y_train.mean())
        nulls[w] = train_mean
        try:
            if freeze_fpca and frozen is not None:
                window = smooth_curves(
                    train_curves, frozen.smoothing_basis, options.smooth_penalty
                )
                fitted = _refit_frozen(frozen, window, t[:origin], y_train)
            else:
                fitted = fit_pipeline(train_curves, t[:origin], y_train, options)
                if freeze_fpca:
                    frozen = fitted
            predictions[w] = predict_pipeline(
                fitted, test_curves, t[target : target + 1]
            )[0]
            success[w] = True
        except _ROLLING_RECOVERABLE as exc:
            predictions[w] = train_mean
            failures.append((int(origin), f"{type(exc).__name__}: {exc}"))
        if progress is not None:
            progress(w + 1, origins.size)
    return RollingResult(
        indices=targets,
        predictions=predictions,
        actuals=y[targets].copy(),
        null_predictions=nulls,
        origins=origins,
        origin_success=success,
        failures=tuple(failures),
    )
