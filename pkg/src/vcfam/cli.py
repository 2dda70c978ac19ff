"""Command-line front end.

Subcommands: ``simulate`` (draw a synthetic dataset to CSV), ``fit`` (run
the full smoothing/FPCA/regression pipeline and save a model artifact),
``predict`` (score new curves with a saved artifact), ``bench`` (replicated
five-model comparison over an n x sigma grid), ``rolling`` (expanding-window
forecast evaluation), and ``surface`` (export one fitted component surface
on a plotting grid).

Conventions shared by every subcommand: all flags are long-form and accept
``--name=value``; runs are deterministic given explicit seeds; human-oriented
summaries go to stdout as JSON; failures print one machine-readable JSON
line on stderr. Exit codes: 0 success, 2 usage error, 3 data error, 4
numerical failure.

``fit`` and ``rolling`` also accept ``--config FILE`` with flat
``key = value`` lines (keys match the flag names with either dashes or
underscores); explicit flags override config entries, which override the
built-in defaults.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from ._version import __version__
from .errors import (
    DataError,
    DomainError,
    ParameterError,
    ShapeError,
    SizingError,
    VcfamError,
)
from .io import (
    load_artifact,
    match_ids,
    model_from_artifact,
    read_predictors,
    read_responses,
    save_model,
    write_predictors,
    write_responses,
    write_table,
)
from .model import DEFAULT_LAMBDA_GRID, VcfamModel, surface
from .pipeline import (
    MODEL_KINDS,
    PipelineOptions,
    fit_pipeline,
    predict_pipeline,
    rolling_forecast,
)
from .sim import N_TRUE_COMPONENTS, SimConfig, generate, replicate_benchmark

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

# models whose prediction needs the exogenous covariate
_NEEDS_T = ("vcfam", "vcflm", "fam1")


def _emit_error(kind: str, message):
    print(
        json.dumps({"error": kind, "message": str(message)}, sort_keys=True),
        file=sys.stderr,
    )


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage failures keep the JSON-on-stderr contract."""

    def error(self, message):
        _emit_error("UsageError", message)
        self.exit(EXIT_USAGE)


def parse_grid(text: str):
    """Parse a tuning grid: 'A..B by decade' or comma-separated values.

    The decade form requires both endpoints to be powers of ten and expands
    to every power of ten between them inclusive.
    """
    text = text.strip()
    if " by " in text:
        span, _, step = text.partition(" by ")
        if step.strip() != "decade":
            raise ValueError(f"unknown grid step {step.strip()!r} (only 'decade')")
        lo_text, sep, hi_text = span.partition("..")
        if not sep:
            raise ValueError("decade grid must look like 'A..B by decade'")
        lo, hi = float(lo_text), float(hi_text)
        if not (0 < lo <= hi):
            raise ValueError("grid endpoints must be positive and ascending")
        k0, k1 = round(np.log10(lo)), round(np.log10(hi))
        if not (
            np.isclose(10.0**k0, lo, rtol=1e-9) and np.isclose(10.0**k1, hi, rtol=1e-9)
        ):
            raise ValueError("decade grid endpoints must be powers of ten")
        return tuple(float(10.0**k) for k in range(k0, k1 + 1))
    values = tuple(float(v) for v in text.split(","))
    if not values:
        raise ValueError("empty grid")
    return values


def _parse_interval(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"expected 'lo,hi', got {text!r}")
    lo, hi = float(parts[0]), float(parts[1])
    if not lo < hi:
        raise ValueError(f"need lo < hi, got {text!r}")
    return (lo, hi)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_name_list(valid, label):
    def parse(text: str):
        names = tuple(part.strip() for part in text.split(",") if part.strip())
        if not names:
            raise ValueError(f"empty {label} list")
        for name in names:
            if name not in valid:
                raise ValueError(f"unknown {label} {name!r}; expected one of {valid}")
        return names

    return parse


def _parse_int_list(text: str):
    return tuple(int(part) for part in text.split(","))


def _parse_float_list(text: str):
    return tuple(float(part) for part in text.split(","))


# keys accepted in --config files; shared by fit and rolling, each command
# simply ignores entries it has no use for
_CONFIG_PARSERS = {
    "model": str,
    "components": int,
    "variance_threshold": float,
    "max_components": int,
    "m1": int,
    "m2": int,
    "grid": parse_grid,
    "grid_zeta": parse_grid,
    "grid_t": parse_grid,
    "sigma_structure": str,
    "penalty_order": int,
    "smooth_dimension": int,
    "smooth_penalty": float,
    "t_domain": _parse_interval,
    "t_periodic": _parse_bool,
    "smooth_response_ma": int,
    "start": int,
    "horizon": int,
    "freeze_fpca": _parse_bool,
}


def read_config(path: str) -> dict:
    """Parse a flat key = value config file; '#' starts a comment line."""
    try:
        with open(path, "r") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    entries = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DataError(f"{path}: line {number}: expected key = value")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_PARSERS:
            raise DataError(
                f"{path}: line {number}: unknown key {key!r}; "
                f"expected one of {sorted(_CONFIG_PARSERS)}"
            )
        entries[key] = value.strip()
    return entries


def _setting(args, config, key, default):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        try:
            return _CONFIG_PARSERS[key](config[key])
        except ValueError as exc:
            raise DataError(f"config value for {key!r}: {exc}") from exc
    return default


def _pipeline_options(args, config) -> PipelineOptions:
    shared_grid = _setting(args, config, "grid", None)
    fallback = tuple(shared_grid) if shared_grid is not None else DEFAULT_LAMBDA_GRID
    t_periodic = _setting(args, config, "t_periodic", False)
    return PipelineOptions(
        model=_setting(args, config, "model", "vcfam"),
        smooth_dimension=_setting(args, config, "smooth_dimension", None),
        smooth_penalty=_setting(args, config, "smooth_penalty", 1e-8),
        variance_threshold=_setting(args, config, "variance_threshold", 0.99),
        max_components=_setting(args, config, "max_components", 20),
        n_components=_setting(args, config, "components", None),
        m1=_setting(args, config, "m1", 10),
        m2=_setting(args, config, "m2", 8),
        lambda_grid_zeta=tuple(_setting(args, config, "grid_zeta", fallback)),
        lambda_grid_t=tuple(_setting(args, config, "grid_t", fallback)),
        sigma_structure=_setting(args, config, "sigma_structure", "iid"),
        penalty_order=_setting(args, config, "penalty_order", 2),
        t_domain=_setting(args, config, "t_domain", None),
        t_basis_kind="fourier" if t_periodic else "bspline",
    )


def forward_moving_average(y, window: int) -> np.ndarray:
    """Replace y_i by the mean of y_i..y_{i+window-1}, truncated at the end."""
    y = np.asarray(y, dtype=float)
    if window < 0:
        raise ParameterError(f"moving-average window must be >= 0, got {window}")
    if window <= 1:
        return y.copy()
    return np.array([y[i : i + window].mean() for i in range(y.size)])


def _jsonify(value):
    if isinstance(value, dict):
        return {str(k): _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonify(value.tolist())
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    return value


def _print_report(report: dict):
    print(json.dumps(_jsonify(report), sort_keys=True, indent=1))


def _read_dataset(args):
    predictor_ids, curves = read_predictors(args.predictors)
    response_ids, y, t = read_responses(args.responses)
    match_ids(predictor_ids, response_ids, args.predictors, args.responses)
    return curves, y, t


def _sigma_report(sigma):
    report = {"structure": "ar1" if hasattr(sigma, "rho") else "iid"}
    if report["structure"] == "iid":
        report["variance"] = sigma.variance
    else:
        report["innovation_variance"] = sigma.innovation_variance
        report["rho"] = sigma.rho
    report["degenerate"] = sigma.degenerate
    return report


def _total_curve_variance(curves, fitted) -> float:
    from .fdata import center, smooth_curves
    from .fpca import gram_matrix

    sample = center(
        smooth_curves(curves, fitted.smoothing_basis, fitted.options.smooth_penalty)
    )
    c = sample.coefficients
    return float(np.einsum("ij,jk,ik->", c, gram_matrix(sample.basis), c)) / c.shape[0]


def _fit_report(fitted, curves, y) -> dict:
    model = fitted.model
    total = _total_curve_variance(curves, fitted)
    report = {
        "model": fitted.kind,
        "n": int(y.size),
        "n_components": int(fitted.fpca.n_components),
        "eigenvalues": fitted.fpca.eigenvalues,
        "variance_explained": fitted.fpca.eigenvalues / total,
        "df": model.df,
        "aic": model.aic,
        "sigma": _sigma_report(model.sigma),
        "residual_mse": float(np.mean((y - model.fitted) ** 2)),
    }
    if isinstance(model, VcfamModel):
        report["lambda_zeta"] = model.lambda_zeta
        report["lambda_t"] = model.lambda_t
        report["grid_zeta"] = list(model.lambda_grid_zeta)
        report["grid_t"] = list(model.lambda_grid_t)
        report["gls_iterations"] = model.gls_iterations
        report["tuning_failures"] = len(model.tuning_failures)
    else:
        report["lambda"] = model.lambda_value
        report["grid"] = list(model.lambda_grid)
    if model.aic_table is not None:
        report["aic_table"] = model.aic_table
    return report


def cmd_simulate(args) -> int:
    config = SimConfig(n=args.n, sigma=args.sigma, seed=args.seed, t_mode=args.t_mode)
    data = generate(config)
    os.makedirs(args.out_dir, exist_ok=True)
    paths = {
        "predictors": os.path.join(args.out_dir, "predictors.csv"),
        "responses": os.path.join(args.out_dir, "responses.csv"),
        "latent": os.path.join(args.out_dir, "latent.csv"),
    }
    ids = [str(i) for i in range(1, config.n + 1)]
    write_predictors(paths["predictors"], data.curves, ids)
    write_responses(paths["responses"], ids, data.y, data.t)
    header = ["id", "g"] + [f"zeta_{k}" for k in range(1, N_TRUE_COMPONENTS + 1)]
    rows = [
        [ids[i], float(data.latent[i])] + [float(z) for z in data.zeta[i]]
        for i in range(config.n)
    ]
    write_table(paths["latent"], header, rows)
    _print_report(
        {
            "files": paths,
            "n": config.n,
            "sigma": config.sigma,
            "seed": config.seed,
            "t_mode": config.t_mode,
        }
    )
    return EXIT_OK


def cmd_fit(args) -> int:
    config = read_config(args.config) if args.config else {}
    options = _pipeline_options(args, config)
    curves, y, t = _read_dataset(args)
    window = _setting(args, config, "smooth_response_ma", 0)
    if window:
        y = forward_moving_average(y, window)
    fitted = fit_pipeline(curves, t, y, options)
    if args.model_out:
        save_model(args.model_out, fitted, training_grid=curves.grid)
    report = _fit_report(fitted, curves, y)
    report["model_out"] = args.model_out
    _print_report(report)
    return EXIT_OK


def cmd_predict(args) -> int:
    document = load_artifact(args.model)
    fitted = model_from_artifact(document, args.model)
    ids, curves = read_predictors(args.predictors)
    training_grid = document.get("training_grid")
    if training_grid is not None and not (
        len(training_grid) == curves.grid.size
        and np.array_equal(np.asarray(training_grid, dtype=float), curves.grid)
    ):
        raise DataError(
            f"{args.predictors}: sampling grid differs from the training grid "
            "stored in the model artifact"
        )
    t = None
    if args.responses:
        response_ids, _, t = read_responses(args.responses, require_y=False)
        match_ids(ids, response_ids, args.predictors, args.responses)
    needs_t = fitted.kind in _NEEDS_T
    if curves.n_curves == 0:
        predictions = np.empty(0)
    elif needs_t:
        if t is None:
            raise ParameterError(
                f"model kind {fitted.kind!r} predicts at a covariate value; "
                "provide --responses with a t column"
            )
        predictions = predict_pipeline(fitted, curves, t)
    else:
        predictions = predict_pipeline(fitted, curves)
    rows = []
    for i in range(curves.n_curves):
        t_field = float(t[i]) if t is not None else ""
        rows.append([ids[i], t_field, float(predictions[i])])
    write_table(args.out, ["id", "t", "y_hat"], rows)
    _print_report({"model": fitted.kind, "n": curves.n_curves, "output": args.out})
    return EXIT_OK


def cmd_bench(args) -> int:
    header = [
        "n",
        "sigma",
        "model",
        "reps",
        "failures",
        "mean_mse_x10",
        "sd_mse_x100",
    ]
    rows = []
    cells = []
    for n in args.n:
        for sigma in args.sigma:
            config = SimConfig(n=n, sigma=sigma, seed=args.seed, t_mode="uniform")

            def progress(done, total, n=n, sigma=sigma):
                print(f"bench n={n} sigma={sigma:g} rep {done}/{total}", file=sys.stderr)

            result = replicate_benchmark(
                config, args.reps, args.models, progress=progress
            )
            cells.append(
                {
                    "n": n,
                    "sigma": sigma,
                    "mean_components": float(np.mean(result.n_components)),
                }
            )
            for model in args.models:
                s = result.summary_for(model)
                rows.append(
                    [
                        n,
                        sigma,
                        model,
                        s.n_reps,
                        s.n_failures,
                        float(s.mean_mse_x10),
                        float(s.sd_mse_x100),
                    ]
                )
    write_table(args.out, header, rows)
    _print_report(
        {
            "cells": cells,
            "models": list(args.models),
            "reps": args.reps,
            "seed": args.seed,
            "output": args.out,
        }
    )
    return EXIT_OK


def cmd_rolling(args) -> int:
    config = read_config(args.config) if args.config else {}
    options = _pipeline_options(args, config)
    curves, y, t = _read_dataset(args)
    window = _setting(args, config, "smooth_response_ma", 0)
    if window:
        y = forward_moving_average(y, window)
    if options.t_domain is None and t.size:
        # the t basis must cover future design points, so span the whole file
        options = replace(options, t_domain=(float(t.min()), float(t.max())))
    start = _setting(args, config, "start", 550)
    horizon = _setting(args, config, "horizon", 7)
    freeze = _setting(args, config, "freeze_fpca", False)

    def progress(done, total):
        if done % 10 == 0 or done == total:
            print(f"rolling window {done}/{total}", file=sys.stderr)

    result = rolling_forecast(
        curves, t, y, start, horizon, options, freeze_fpca=freeze, progress=progress
    )
    rows = [
        [
            int(result.origins[w]),
            float(t[result.indices[w]]),
            float(result.actuals[w]),
            float(result.predictions[w]),
        ]
        for w in range(result.n_windows)
    ]
    write_table(args.out, ["i0", "t", "y_true", "y_hat"], rows)
    model_err = result.predictions - result.actuals
    null_err = result.null_predictions - result.actuals
    msfe = float(np.mean(model_err**2))
    msfe_null = float(np.mean(null_err**2))
    _print_report(
        {
            "n_windows": result.n_windows,
            "success_rate": result.success_rate,
            "n_failures": len(result.failures),
            "failures": [[origin, message] for origin, message in result.failures],
            "msfe": msfe,
            "mafe": float(np.mean(np.abs(model_err))),
            "msfe_null": msfe_null,
            "mafe_null": float(np.mean(np.abs(null_err))),
            "beats_null": msfe < msfe_null,
            "output": args.out,
        }
    )
    return EXIT_OK


def cmd_surface(args) -> int:
    fitted = model_from_artifact(load_artifact(args.model), args.model)
    model = fitted.model
    if not isinstance(model, VcfamModel):
        raise ParameterError(
            f"component surfaces are defined for the vcfam model, not {fitted.kind!r}"
        )
    if not 1 <= args.component <= model.q:
        raise ParameterError(
            f"component must be in [1, {model.q}], got {args.component}"
        )
    zeta_grid = np.linspace(0.0, 1.0, args.zeta_points)
    lo, hi = model.t_basis.domain
    t_grid = np.linspace(lo, hi, args.t_points)
    values = surface(
        model, args.component - 1, zeta_grid, t_grid, center_flag=args.centered
    )
    rows = [
        [float(zeta_grid[i]), float(t_grid[j]), float(values[i, j])]
        for i in range(zeta_grid.size)
        for j in range(t_grid.size)
    ]
    write_table(args.out, ["zeta", "t", "value"], rows)
    _print_report(
        {
            "component": args.component,
            "centered": bool(args.centered),
            "zeta_points": args.zeta_points,
            "t_points": args.t_points,
            "output": args.out,
        }
    )
    return EXIT_OK


def _add_model_flags(parser):
    parser.add_argument("--config", help="flat key = value settings file")
    parser.add_argument("--model", choices=MODEL_KINDS)
    parser.add_argument(
        "--components", type=int, help="fixed component count (else variance rule)"
    )
    parser.add_argument("--variance-threshold", type=float)
    parser.add_argument("--max-components", type=int)
    parser.add_argument("--m1", type=int, help="basis size over the transformed score")
    parser.add_argument("--m2", type=int, help="basis size over t")
    parser.add_argument(
        "--grid",
        type=parse_grid,
        help="tuning grid for both penalties: 'A..B by decade' or comma list",
    )
    parser.add_argument("--grid-zeta", type=parse_grid)
    parser.add_argument("--grid-t", type=parse_grid)
    parser.add_argument("--sigma-structure", choices=("iid", "ar1"))
    parser.add_argument("--penalty-order", type=int)
    parser.add_argument("--smooth-dimension", type=int)
    parser.add_argument("--smooth-penalty", type=float)
    parser.add_argument("--t-domain", type=_parse_interval, metavar="LO,HI")
    parser.add_argument(
        "--t-periodic",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="periodic (Fourier) basis over t",
    )
    parser.add_argument(
        "--smooth-response-ma",
        type=int,
        metavar="W",
        help="replace y_i by the forward moving average over W rows",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vcfam", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--version", action="version", version=f"vcfam {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("simulate", help="draw a synthetic dataset")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t-mode", choices=("uniform", "sequential"), default="uniform")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit one model end to end")
    p.add_argument("--predictors", required=True)
    p.add_argument("--responses", required=True)
    p.add_argument("--model-out", help="write the fitted model artifact here")
    _add_model_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="score new curves")
    p.add_argument("--model", required=True, help="model artifact path")
    p.add_argument("--predictors", required=True)
    p.add_argument(
        "--responses", help="t values for the new rows (id,t or id,y,t schema)"
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("bench", help="replicated model comparison")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--n", type=_parse_int_list, default=(500, 1000), metavar="N[,N...]")
    p.add_argument(
        "--sigma", type=_parse_float_list, default=(0.05, 0.1), metavar="S[,S...]"
    )
    p.add_argument(
        "--models",
        type=_parse_name_list(MODEL_KINDS, "model"),
        default=MODEL_KINDS,
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser(
        "rolling", help="expanding-window forecast evaluation"
    )
    p.add_argument("--predictors", required=True)
    p.add_argument("--responses", required=True)
    p.add_argument("--start", type=int, help="first training size (default 550)")
    p.add_argument("--horizon", type=int, help="rows ahead to predict (default 7)")
    p.add_argument(
        "--freeze-fpca",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="reuse the first window's decomposition instead of refitting it",
    )
    p.add_argument("--out", required=True)
    _add_model_flags(p)
    p.set_defaults(func=cmd_rolling)

    p = sub.add_parser(
        "surface", help="export one component surface"
    )
    p.add_argument("--model", required=True, help="model artifact path")
    p.add_argument("--component", type=int, required=True, help="1-based index")
    p.add_argument("--zeta-points", type=int, default=41)
    p.add_argument("--t-points", type=int, default=41)
    p.add_argument(
        "--centered",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="remove the zeta-wise mean at each t (the identified part)",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_surface)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, SizingError) as exc:
        _emit_error(type(exc).__name__, exc)
        return EXIT_USAGE
    except (DataError, ShapeError, DomainError) as exc:
        _emit_error(type(exc).__name__, exc)
        return EXIT_DATA
    except (VcfamError, FloatingPointError) as exc:
        _emit_error(type(exc).__name__, exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
