"""CSV data formats, report emission and model persistence.

Dataset CSVs
    Scalar/Euclidean data travels in one file with header
    ``x1,...,xd,y1,...,ym`` and one observation per row.  Functional or
    quantile data uses two files (predictors, responses); a side whose first
    row parses as numbers is grid-laid-out (first row = grid, later rows =
    one function each), and a grid equal to the midpoint probability grid
    marks the quantile representation (rows are validated nondecreasing).
    All numbers are written with 17 significant digits, which round-trips
    float64 exactly.

Model persistence
    A self-describing JSON text document with an embedded format-version
    field.  Factorizations are not persisted; they are recomputed on load.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .conformal import HeteroscedasticModel, HomoscedasticModel
from .depth import EmpiricalKME, fit_cme
from .errors import ConfigError
from .hilbert import (PackedPoints, pack_points, probability_grid,
                      quadrature_weights)
from .kernels import KernelSpec
from .simgen import Dataset
from .tolerance import ToleranceRegion

MODEL_FORMAT = "hilbertconformal-model"
MODEL_VERSION = 1


def fmt(v: float) -> str:
    return f"{float(v):.17g}"


# ---------------------------------------------------------------------------
# dataset CSVs


def _side_rows(points: PackedPoints) -> tuple[list[str] | None, np.ndarray]:
    """Header (euclidean) or grid row (functional/quantile) plus the value rows."""
    if points.kind == "euclidean":
        return None, points.values
    grid = points.grid if points.kind == "curve" else probability_grid(points.dim)
    return [fmt(g) for g in grid], points.values


def write_combined_csv(path: Path, xs: PackedPoints, ys: PackedPoints) -> None:
    if xs.kind != "euclidean" or ys.kind != "euclidean":
        raise ConfigError("the combined CSV layout holds Euclidean data only")
    header = [f"x{i + 1}" for i in range(xs.dim)] + [f"y{i + 1}" for i in range(ys.dim)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for xi, yi in zip(xs.values, ys.values):
            w.writerow([fmt(v) for v in xi] + [fmt(v) for v in yi])


def write_side_csv(path: Path, points: PackedPoints, label: str) -> None:
    grid_row, values = _side_rows(points)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if grid_row is None:
            w.writerow([f"{label}{i + 1}" for i in range(points.dim)])
        else:
            w.writerow(grid_row)
        for row in values:
            w.writerow([fmt(v) for v in row])


def write_dataset(dataset: Dataset, out_dir: Path) -> dict[str, Path]:
    """Write a dataset under out_dir; returns the mapping of written files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    xs, ys = pack_points(dataset.x), pack_points(dataset.y)
    if xs.kind == "euclidean" and ys.kind == "euclidean":
        path = out_dir / "data.csv"
        write_combined_csv(path, xs, ys)
        return {"data": path}
    px, py = out_dir / "predictors.csv", out_dir / "responses.csv"
    write_side_csv(px, xs, "x")
    write_side_csv(py, ys, "y")
    return {"predictors": px, "responses": py}


def _parse_rows(path: Path) -> list[list[str]]:
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if len(rows) < 2:
        raise ConfigError(f"{path}: expected a header/grid row plus data rows")
    return rows


def _floats(path: Path, row: list[str], index: int) -> np.ndarray:
    try:
        return np.array([float(v) for v in row], dtype=np.float64)
    except ValueError as exc:
        raise ConfigError(f"{path}: row {index}: {exc}")


def read_side_csv(path: Path) -> PackedPoints:
    """Read one side of a two-file dataset, inferring its representation."""
    path = Path(path)
    rows = _parse_rows(path)
    first = rows[0]
    try:
        float(first[0])
        has_grid = True
    except ValueError:
        has_grid = False
    values = np.vstack([_floats(path, r, i + 1) for i, r in enumerate(rows[1:])])
    if not has_grid:
        return PackedPoints("euclidean", values, np.ones(values.shape[1]))
    grid = _floats(path, first, 0)
    if values.shape[1] != grid.size:
        raise ConfigError(f"{path}: rows have {values.shape[1]} values but the grid has {grid.size}")
    if np.array_equal(grid, probability_grid(grid.size)):
        if np.any(np.diff(values, axis=1) < 0):
            raise ConfigError(f"{path}: quantile rows must be nondecreasing")
        return PackedPoints("quantile", values, quadrature_weights("quantile", grid.size))
    if not np.all(np.diff(grid) > 0):
        raise ConfigError(f"{path}: grid row must be strictly increasing")
    return PackedPoints("curve", values, quadrature_weights("curve", grid.size, grid), grid)


def read_combined_csv(path: Path) -> tuple[PackedPoints, PackedPoints]:
    path = Path(path)
    rows = _parse_rows(path)
    header = rows[0]
    d = sum(1 for name in header if name.strip().startswith("x"))
    m = len(header) - d
    if d < 1 or m < 1:
        raise ConfigError(f"{path}: header must name x1..xd then y1..ym columns")
    data = np.vstack([_floats(path, r, i + 1) for i, r in enumerate(rows[1:])])
    if data.shape[1] != len(header):
        raise ConfigError(f"{path}: rows disagree with the header width")
    return (PackedPoints("euclidean", data[:, :d], np.ones(d)),
            PackedPoints("euclidean", data[:, d:], np.ones(m)))


def read_dataset(path_x: Path, path_y: Path | None = None, name: str = "file") -> Dataset:
    """Load a dataset from one combined CSV or a predictors/responses pair."""
    if path_y is None:
        xs, ys = read_combined_csv(Path(path_x))
    else:
        xs, ys = read_side_csv(Path(path_x)), read_side_csv(Path(path_y))
    if len(xs) != len(ys):
        raise ConfigError("predictor and response files hold different numbers of rows")
    return Dataset(xs.points(), ys.points(), name, seed=-1)


# ---------------------------------------------------------------------------
# model persistence


def _points_payload(points: PackedPoints) -> dict:
    return {
        "kind": points.kind,
        "grid": None if points.grid is None else points.grid.tolist(),
        "values": points.values.tolist(),
    }


def _points_from(payload: dict) -> PackedPoints:
    values = np.asarray(payload["values"], dtype=np.float64)
    grid = payload["grid"]
    grid = None if grid is None else np.asarray(grid, dtype=np.float64)
    w = quadrature_weights(payload["kind"], values.shape[1], grid)
    return PackedPoints(payload["kind"], values, w, grid)


def _kernel_payload(spec: KernelSpec) -> dict:
    return {"family": spec.family, "bandwidth": spec.bandwidth, "space": spec.space}


def _kernel_from(payload: dict) -> KernelSpec:
    return KernelSpec(payload["family"], payload["bandwidth"], payload["space"])


def save_model(model, path: Path, alphas=(), meta: dict | None = None) -> None:
    """Persist a fitted region model as versioned JSON text."""
    doc = {"format": MODEL_FORMAT, "version": MODEL_VERSION, "meta": meta or {}}
    if isinstance(model, ToleranceRegion):
        doc.update({
            "algorithm": "tolerance",
            "kernel_y": _kernel_payload(model.kme.kernel),
            "reference": _points_payload(model.kme.reference),
            "threshold": model.threshold,
            "rank": model.rank,
            "alpha": model.alpha,
            "sample_depths": model.sample_depths.tolist(),
        })
    elif isinstance(model, (HomoscedasticModel, HeteroscedasticModel)):
        cme = model.cme
        doc.update({
            "algorithm": "homo" if isinstance(model, HomoscedasticModel) else "hetero",
            "kernel_x": _kernel_payload(cme.kernel_x),
            "kernel_y": _kernel_payload(cme.kernel_y),
            "ridge": cme.ridge,
            "x_train": _points_payload(cme.x_train),
            "y_train": _points_payload(cme.y_train),
            "alphas": list(alphas),
            "thresholds": [model.threshold(a) for a in alphas],
        })
        if isinstance(model, HomoscedasticModel):
            doc["calibration_scores"] = model.calibration_scores.tolist()
            doc["split_sizes"] = [model.n_train, model.n_calibration]
        else:
            doc.update({
                "bank_x": _points_payload(model.bank_x),
                "bank_scores": model.bank_scores.tolist(),
                "cdf_bandwidth": model.cdf_bandwidth,
                "conformity_scores": model.conformity_scores.tolist(),
                "split_sizes": [model.n_train, model.n_bank, model.n_calibration],
            })
    else:
        raise ConfigError(f"cannot persist a {type(model).__name__}")
    Path(path).write_text(json.dumps(doc, indent=1))


def load_model(path: Path):
    """Load a persisted model; refuses version-mismatched files."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not a model file ({exc})")
    if doc.get("format") != MODEL_FORMAT:
        raise ConfigError(f"{path}: not a {MODEL_FORMAT} file")
    if doc.get("version") != MODEL_VERSION:
        raise ConfigError(f"{path}: model format version {doc.get('version')} "
                          f"is unsupported (expected {MODEL_VERSION})")
    algorithm = doc["algorithm"]
    if algorithm == "tolerance":
        kme = EmpiricalKME(_points_from(doc["reference"]), _kernel_from(doc["kernel_y"]))
        return ToleranceRegion(kme, doc["threshold"], doc["rank"], doc["alpha"],
                               np.asarray(doc["sample_depths"], dtype=np.float64))
    cme = fit_cme(_points_from(doc["x_train"]), _points_from(doc["y_train"]),
                  _kernel_from(doc["kernel_x"]), _kernel_from(doc["kernel_y"]),
                  doc["ridge"])
    if algorithm == "homo":
        n1, n2 = doc["split_sizes"]
        return HomoscedasticModel(cme, np.asarray(doc["calibration_scores"]), n1, n2)
    if algorithm == "hetero":
        n1, n2, n3 = doc["split_sizes"]
        return HeteroscedasticModel(
            cme, _points_from(doc["bank_x"]),
            np.asarray(doc["bank_scores"], dtype=np.float64),
            doc["cdf_bandwidth"],
            np.asarray(doc["conformity_scores"], dtype=np.float64), n1, n2, n3)
    raise ConfigError(f"{path}: unknown algorithm {algorithm!r}")
