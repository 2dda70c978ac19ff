"""File formats: predictor/response tables, predictions, model artifacts.

CSV files follow RFC 4180 (CRLF line endings, quoting only when needed) and
write floats with 17 significant digits so values survive a round trip
bit-for-bit. The predictor table's header carries the sampling grid itself:
``id,<s_1>,...,<s_r>`` with one curve per row. The response table is
``id,y,t``. Row pairing between the two files is by the id column, which
must list the same ids in the same order.

Model artifacts are JSON documents with a ``format_version`` field,
containing everything needed to rebuild the fitted pipeline exactly; no
timestamps or environment details are stored, so saving the same model twice
yields identical bytes. All writes go through a temporary file in the target
directory followed by an atomic rename.
"""
from __future__ import annotations

import csv
import json
import os
import tempfile
from datetime import datetime, timezone

import numpy as np

from ._version import __version__
from .baselines import BaselineModel
from .basis import BasisSpec
from .errors import DataError
from .fdata import RawCurves
from .fpca import FpcaModel
from .model import SigmaAr1, SigmaIid, VcfamConfig, VcfamModel
from .pipeline import FittedPipeline, PipelineOptions

FORMAT_VERSION = 1


def _format_float(value) -> str:
    return "%.17g" % float(value)


def _atomic_write_text(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _render_csv(header, rows) -> str:
    import io as _io

    buffer = _io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def write_predictors(path: str, curves: RawCurves, ids=None):
    """Write the curve table; the header row is the sampling grid."""
    n = curves.n_curves
    if ids is None:
        ids = [str(i) for i in range(1, n + 1)]
    ids = [str(i) for i in ids]
    if len(ids) != n:
        raise DataError(f"{n} curves but {len(ids)} ids")
    header = ["id"] + [_format_float(g) for g in curves.grid]
    rows = (
        [ids[i]] + [_format_float(v) for v in curves.values[i]] for i in range(n)
    )
    _atomic_write_text(path, _render_csv(header, rows))


def write_responses(path: str, ids, y, t):
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    ids = [str(i) for i in ids]
    if not len(ids) == y.size == t.size:
        raise DataError("ids, y, and t must have equal length")
    rows = (
        [ids[i], _format_float(y[i]), _format_float(t[i])] for i in range(len(ids))
    )
    _atomic_write_text(path, _render_csv(["id", "y", "t"], rows))


def write_predictions(path: str, ids, predictions):
    predictions = np.asarray(predictions, dtype=float)
    ids = [str(i) for i in ids]
    if len(ids) != predictions.size:
        raise DataError("ids and predictions must have equal length")
    rows = ([ids[i], _format_float(predictions[i])] for i in range(len(ids)))
    _atomic_write_text(path, _render_csv(["id", "prediction"], rows))


def write_table(path: str, header, rows):
    """Write a generic CSV table with 17-digit floats."""
    rendered = []
    for row in rows:
        rendered.append(
            [
                _format_float(v)
                if isinstance(v, float) or isinstance(v, np.floating)
                else str(v)
                for v in row
            ]
        )
    _atomic_write_text(path, _render_csv([str(h) for h in header], rendered))


def _read_csv_rows(path: str):
    try:
        with open(path, "r", newline="") as handle:
            rows = list(csv.reader(handle))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty; expected a header row")
    return rows


def _parse_float(token: str, path: str, where: str) -> float:
    try:
        return float(token)
    except ValueError as exc:
        raise DataError(f"{path}: {where}: not a number: {token!r}") from exc


def read_predictors(path: str):
    """Read a curve table. Returns (ids, RawCurves)."""
    rows = _read_csv_rows(path)
    header = rows[0]
    if len(header) < 2 or header[0] != "id":
        raise DataError(
            f"{path}: predictor header must be 'id' followed by grid values"
        )
    grid = np.array(
        [_parse_float(h, path, "header") for h in header[1:]], dtype=float
    )
    if grid.size >= 2 and np.any(np.diff(grid) <= 0):
        raise DataError(f"{path}: grid in header must be strictly increasing")
    ids, values = [], []
    for number, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(
                f"{path}: row {number} has {len(row)} fields, expected {len(header)}"
            )
        ids.append(row[0])
        values.append([_parse_float(v, path, f"row {number}") for v in row[1:]])
    values = np.array(values, dtype=float) if values else np.empty((0, grid.size))
    try:
        curves = RawCurves(grid, values)
    except Exception as exc:
        raise DataError(f"{path}: {exc}") from exc
    return ids, curves


def read_responses(path: str, require_y: bool = True):
    """Read a response table with columns id,y,t (or id,t when y is absent).

    Returns (ids, y, t); ``y`` is None for a t-only table.
    """
    rows = _read_csv_rows(path)
    header = rows[0]
    if header == ["id", "y", "t"]:
        has_y = True
    elif header == ["id", "t"] and not require_y:
        has_y = False
    else:
        expected = "id,y,t" if require_y else "id,y,t or id,t"
        raise DataError(f"{path}: header must be {expected}, got {','.join(header)}")
    ids, y, t = [], [], []
    for number, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(
                f"{path}: row {number} has {len(row)} fields, expected {len(header)}"
            )
        ids.append(row[0])
        if has_y:
            y.append(_parse_float(row[1], path, f"row {number}"))
            t.append(_parse_float(row[2], path, f"row {number}"))
        else:
            t.append(_parse_float(row[1], path, f"row {number}"))
    return (
        ids,
        np.array(y, dtype=float) if has_y else None,
        np.array(t, dtype=float),
    )


def match_ids(predictor_ids, response_ids, predictor_path="", response_path=""):
    """Require the two id columns to agree exactly, in order."""
    if list(predictor_ids) != list(response_ids):
        raise DataError(
            f"id columns disagree between {predictor_path or 'predictors'} "
            f"and {response_path or 'responses'}"
        )


def _basis_to_dict(spec: BasisSpec | None):
    if spec is None:
        return None
    return {
        "kind": spec.kind,
        "dimension": spec.dimension,
        "domain": [spec.domain[0], spec.domain[1]],
        "degree": spec.degree,
        "knots": list(spec.knots),
    }


def _basis_from_dict(data) -> BasisSpec | None:
    if data is None:
        return None
    return BasisSpec(
        kind=data["kind"],
        dimension=int(data["dimension"]),
        domain=(float(data["domain"][0]), float(data["domain"][1])),
        degree=int(data["degree"]),
        knots=tuple(float(k) for k in data["knots"]),
    )


def _sigma_to_dict(sigma):
    if isinstance(sigma, SigmaIid):
        return {
            "structure": "iid",
            "variance": sigma.variance,
            "degenerate": sigma.degenerate,
        }
    if isinstance(sigma, SigmaAr1):
        return {
            "structure": "ar1",
            "innovation_variance": sigma.innovation_variance,
            "rho": sigma.rho,
            "degenerate": sigma.degenerate,
        }
    raise DataError(f"unknown sigma description {sigma!r}")


def _sigma_from_dict(data):
    if data["structure"] == "iid":
        return SigmaIid(float(data["variance"]), bool(data["degenerate"]))
    if data["structure"] == "ar1":
        return SigmaAr1(
            float(data["innovation_variance"]),
            float(data["rho"]),
            bool(data["degenerate"]),
        )
    raise DataError(f"unknown sigma structure {data['structure']!r}")


def _array(data, dtype=float) -> np.ndarray:
    return np.asarray(data, dtype=dtype)


def _fpca_to_dict(fpca: FpcaModel):
    return {
        "basis": _basis_to_dict(fpca.basis),
        "mean_coefficients": fpca.mean_coefficients.tolist(),
        "eigenvalues": fpca.eigenvalues.tolist(),
        "eigenfunction_coefficients": fpca.eigenfunction_coefficients.tolist(),
        "scores": fpca.scores.tolist(),
        "eigenvalue_ties": fpca.eigenvalue_ties,
    }


def _fpca_from_dict(data) -> FpcaModel:
    return FpcaModel(
        basis=_basis_from_dict(data["basis"]),
        mean_coefficients=_array(data["mean_coefficients"]),
        eigenvalues=_array(data["eigenvalues"]),
        eigenfunction_coefficients=_array(data["eigenfunction_coefficients"]),
        scores=_array(data["scores"]),
        eigenvalue_ties=bool(data["eigenvalue_ties"]),
    )


def _vcfam_to_dict(model: VcfamModel):
    return {
        "config": {
            "m1": model.config.m1,
            "m2": model.config.m2,
            "lambda_zeta": model.config.lambda_zeta,
            "lambda_t": model.config.lambda_t,
            "sigma_structure": model.config.sigma_structure,
            "penalty_order": model.config.penalty_order,
            "max_gls_iterations": model.config.max_gls_iterations,
            "gls_tolerance": model.config.gls_tolerance,
        },
        "zeta_basis": _basis_to_dict(model.zeta_basis),
        "t_basis": _basis_to_dict(model.t_basis),
        "theta": model.theta.tolist(),
        "lambda_zeta": model.lambda_zeta,
        "lambda_t": model.lambda_t,
        "sigma": _sigma_to_dict(model.sigma),
        "df": model.df,
        "aic": model.aic,
        "response_mean": model.response_mean,
        "fitted": model.fitted.tolist(),
        "gls_iterations": model.gls_iterations,
        "aic_table": None if model.aic_table is None else model.aic_table.tolist(),
        "lambda_grid_zeta": list(model.lambda_grid_zeta),
        "lambda_grid_t": list(model.lambda_grid_t),
        "tuning_failures": [list(f) for f in model.tuning_failures],
    }


def _vcfam_from_dict(data, fpca: FpcaModel) -> VcfamModel:
    c = data["config"]
    return VcfamModel(
        config=VcfamConfig(
            m1=int(c["m1"]),
            m2=int(c["m2"]),
            lambda_zeta=float(c["lambda_zeta"]),
            lambda_t=float(c["lambda_t"]),
            sigma_structure=c["sigma_structure"],
            penalty_order=int(c["penalty_order"]),
            max_gls_iterations=int(c["max_gls_iterations"]),
            gls_tolerance=float(c["gls_tolerance"]),
        ),
        fpca=fpca,
        zeta_basis=_basis_from_dict(data["zeta_basis"]),
        t_basis=_basis_from_dict(data["t_basis"]),
        theta=_array(data["theta"]),
        lambda_zeta=float(data["lambda_zeta"]),
        lambda_t=float(data["lambda_t"]),
        sigma=_sigma_from_dict(data["sigma"]),
        df=float(data["df"]),
        aic=float(data["aic"]),
        response_mean=float(data["response_mean"]),
        fitted=_array(data["fitted"]),
        gls_iterations=int(data["gls_iterations"]),
        aic_table=None if data["aic_table"] is None else _array(data["aic_table"]),
        lambda_grid_zeta=tuple(float(v) for v in data["lambda_grid_zeta"]),
        lambda_grid_t=tuple(float(v) for v in data["lambda_grid_t"]),
        tuning_failures=tuple(
            (float(f[0]), float(f[1]), str(f[2])) for f in data["tuning_failures"]
        ),
    )


def _baseline_to_dict(model: BaselineModel):
    return {
        "kind": model.kind,
        "coefficients": model.coefficients.tolist(),
        "lambda_value": model.lambda_value,
        "df": model.df,
        "aic": model.aic,
        "sigma": _sigma_to_dict(model.sigma),
        "response_mean": model.response_mean,
        "fitted": model.fitted.tolist(),
        "zeta_basis": _basis_to_dict(model.zeta_basis),
        "t_basis": _basis_to_dict(model.t_basis),
        "aic_table": None if model.aic_table is None else model.aic_table.tolist(),
        "lambda_grid": list(model.lambda_grid),
    }


def _baseline_from_dict(data, fpca: FpcaModel) -> BaselineModel:
    return BaselineModel(
        kind=data["kind"],
        fpca=fpca,
        coefficients=_array(data["coefficients"]),
        lambda_value=float(data["lambda_value"]),
        df=float(data["df"]),
        aic=float(data["aic"]),
        sigma=_sigma_from_dict(data["sigma"]),
        response_mean=float(data["response_mean"]),
        fitted=_array(data["fitted"]),
        zeta_basis=_basis_from_dict(data["zeta_basis"]),
        t_basis=_basis_from_dict(data["t_basis"]),
        aic_table=None if data["aic_table"] is None else _array(data["aic_table"]),
        lambda_grid=tuple(float(v) for v in data["lambda_grid"]),
    )


def _options_to_dict(options: PipelineOptions):
    return {
        "model": options.model,
        "smooth_dimension": options.smooth_dimension,
        "smooth_penalty": options.smooth_penalty,
        "variance_threshold": options.variance_threshold,
        "max_components": options.max_components,
        "n_components": options.n_components,
        "m1": options.m1,
        "m2": options.m2,
        "lambda_grid_zeta": list(options.lambda_grid_zeta),
        "lambda_grid_t": list(options.lambda_grid_t),
        "sigma_structure": options.sigma_structure,
        "penalty_order": options.penalty_order,
        "t_domain": None if options.t_domain is None else list(options.t_domain),
        "t_basis_kind": options.t_basis_kind,
    }


def _options_from_dict(data) -> PipelineOptions:
    return PipelineOptions(
        model=data["model"],
        smooth_dimension=data["smooth_dimension"],
        smooth_penalty=float(data["smooth_penalty"]),
        variance_threshold=float(data["variance_threshold"]),
        max_components=int(data["max_components"]),
        n_components=data["n_components"],
        m1=int(data["m1"]),
        m2=int(data["m2"]),
        lambda_grid_zeta=tuple(float(v) for v in data["lambda_grid_zeta"]),
        lambda_grid_t=tuple(float(v) for v in data["lambda_grid_t"]),
        sigma_structure=data["sigma_structure"],
        penalty_order=int(data["penalty_order"]),
        t_domain=None if data["t_domain"] is None else tuple(data["t_domain"]),
        t_basis_kind=data["t_basis_kind"],
    )


def save_model(
    path: str,
    fitted: FittedPipeline,
    *,
    training_grid=None,
    seed: int | None = None,
    created: str | None = None,
):
    """Serialize a fitted pipeline to a JSON artifact.

    Everything except the provenance timestamp is a pure function of the
    fitted model, so saving the same model twice (with ``created`` pinned)
    produces identical bytes. ``training_grid`` records the sampling grid
    the model was trained on; prediction enforces it on new data.
    """
    if created is None:
        created = datetime.now(timezone.utc).isoformat(timespec="seconds")
    document = {
        "format_version": FORMAT_VERSION,
        "kind": fitted.kind,
        "provenance": {
            "created": created,
            "seed": seed,
            "tool_version": __version__,
        },
        "training_grid": None
        if training_grid is None
        else [float(g) for g in training_grid],
        "options": _options_to_dict(fitted.options),
        "smoothing_basis": _basis_to_dict(fitted.smoothing_basis),
        "fpca": _fpca_to_dict(fitted.fpca),
        "model": _vcfam_to_dict(fitted.model)
        if fitted.kind == "vcfam"
        else _baseline_to_dict(fitted.model),
    }
    _atomic_write_text(path, json.dumps(document, sort_keys=True, indent=1) + "\n")


def load_artifact(path: str) -> dict:
    """Read and version-check a model artifact, returning the raw document."""
    try:
        with open(path, "r") as handle:
            document = json.load(handle)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise DataError(f"{path}: malformed model artifact: not a JSON object")
    version = document.get("format_version")
    if version != FORMAT_VERSION:
        raise DataError(
            f"{path}: format version {version!r} not supported (expected {FORMAT_VERSION})"
        )
    return document


def model_from_artifact(document: dict, path: str = "artifact") -> FittedPipeline:
    """Rebuild the fitted pipeline described by an artifact document."""
    try:
        kind = document["kind"]
        fpca = _fpca_from_dict(document["fpca"])
        model = (
            _vcfam_from_dict(document["model"], fpca)
            if kind == "vcfam"
            else _baseline_from_dict(document["model"], fpca)
        )
        return FittedPipeline(
            options=_options_from_dict(document["options"]),
            smoothing_basis=_basis_from_dict(document["smoothing_basis"]),
            fpca=fpca,
            model=model,
        )
    except DataError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed model artifact: {exc}") from exc


def load_model(path: str) -> FittedPipeline:
    """Rebuild a fitted pipeline from an artifact written by save_model."""
    return model_from_artifact(load_artifact(path), path)
