"""Varying-coefficient functional additive regression.

Longitudinal predictors are smoothed onto a spline basis, reduced by
functional principal components, and mapped through the Gaussian CDF onto
(0, 1); the response is then modeled as a sum of smooth bivariate surfaces
in each transformed score and an exogenous covariate, estimated by
penalized least squares with tensor-product difference penalties and
AIC-selected smoothing strengths. Reference models (varying-coefficient
functional linear, additive with and without the covariate, plain
functional linear), a simulation benchmark, and a rolling forecaster are
included; the ``vcfam`` console script fronts the whole pipeline.
"""
from ._version import __version__
from .baselines import (
    BASELINE_KINDS,
    BaselineModel,
    fit_fam1,
    fit_fam2,
    fit_flm,
    fit_vcflm,
    predict_baseline,
)
from .basis import (
    BasisSpec,
    bspline_basis,
    difference_penalty,
    eval_basis,
    fourier_basis,
    gaussian_cdf,
)
from .errors import (
    BasisRankError,
    ContractError,
    DataError,
    DegenerateFitWarning,
    DomainError,
    ExtrapolationError,
    ParameterError,
    ShapeError,
    SingularityError,
    SizingError,
    TuningError,
    VcfamError,
)
from .fdata import FunctionalSample, RawCurves, center, evaluate, smooth_curves
from .fpca import (
    FpcaModel,
    choose_truncation,
    fit_fpca,
    gram_matrix,
    project_scores,
    reconstruct,
    transform_scores,
)
from .io import (
    FORMAT_VERSION,
    load_artifact,
    load_model,
    model_from_artifact,
    read_predictors,
    read_responses,
    save_model,
    write_predictions,
    write_predictors,
    write_responses,
)
from .model import (
    DEFAULT_LAMBDA_GRID,
    FitDiagnostics,
    PenalizedFit,
    SigmaAr1,
    SigmaIid,
    VcfamConfig,
    VcfamModel,
    aic,
    build_design,
    build_penalty,
    estimate_sigma,
    fit,
    gaussian_log_likelihood,
    predict,
    surface,
    tune,
)
from .pipeline import (
    MODEL_KINDS,
    FittedPipeline,
    PipelineOptions,
    RollingResult,
    choose_smoothing_basis,
    fit_pipeline,
    fit_regression,
    predict_pipeline,
    rolling_forecast,
)
from .sim import (
    BenchmarkResult,
    ModelSummary,
    SimConfig,
    SimData,
    generate,
    latent_signal,
    mse,
    replicate_benchmark,
    true_component,
)

__all__ = [
    "__version__",
    "BASELINE_KINDS",
    "BaselineModel",
    "fit_fam1",
    "fit_fam2",
    "fit_flm",
    "fit_vcflm",
    "predict_baseline",
    "BasisSpec",
    "bspline_basis",
    "difference_penalty",
    "eval_basis",
    "fourier_basis",
    "gaussian_cdf",
    "BasisRankError",
    "ContractError",
    "DataError",
    "DegenerateFitWarning",
    "DomainError",
    "ExtrapolationError",
    "ParameterError",
    "ShapeError",
    "SingularityError",
    "SizingError",
    "TuningError",
    "VcfamError",
    "FunctionalSample",
    "RawCurves",
    "center",
    "evaluate",
    "smooth_curves",
    "FpcaModel",
    "choose_truncation",
    "fit_fpca",
    "gram_matrix",
    "project_scores",
    "reconstruct",
    "transform_scores",
    "FORMAT_VERSION",
    "load_artifact",
    "load_model",
    "model_from_artifact",
    "read_predictors",
    "read_responses",
    "save_model",
    "write_predictions",
    "write_predictors",
    "write_responses",
    "DEFAULT_LAMBDA_GRID",
    "FitDiagnostics",
    "PenalizedFit",
    "SigmaAr1",
    "SigmaIid",
    "VcfamConfig",
    "VcfamModel",
    "aic",
    "build_design",
    "build_penalty",
    "estimate_sigma",
    "fit",
    "gaussian_log_likelihood",
    "predict",
    "surface",
    "tune",
    "MODEL_KINDS",
    "FittedPipeline",
    "PipelineOptions",
    "RollingResult",
    "choose_smoothing_basis",
    "fit_pipeline",
    "fit_regression",
    "predict_pipeline",
    "rolling_forecast",
    "BenchmarkResult",
    "ModelSummary",
    "SimConfig",
    "SimData",
    "generate",
    "latent_signal",
    "mse",
    "replicate_benchmark",
    "true_component",
]
