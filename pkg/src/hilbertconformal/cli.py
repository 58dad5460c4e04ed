"""Command-line interface.

Subcommands::

    simulate    generate a dataset from a configured DGP and write CSVs
    fit         fit the configured region model and persist it
    predict     score (x, y) query pairs against a persisted model
    coverage    marginal coverage of a model over a dataset
    tolerance   depth-spacing tolerance region summary per level
    bootstrap   bootstrap tolerance-in-probability region summary
    study       Monte Carlo coverage study (report, replicates, plot data)

All randomness flows from the configured seed; reruns are bit-identical.
Failures exit nonzero with a single diagnostic line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bootstrap import bootstrap_tolerance
from .config import StudyConfig, load_config
from .dataio import fmt, load_model, read_dataset, save_model, write_dataset
from .depth import depth_unconditional_many
from .errors import ConfigError, FitError, MismatchError
from .evaluation import (CoverageReport, coverage_indicators, derive_seed, fit_model,
                         run_study)
from .hilbert import euclidean_point, pack_points
from .kernels import KernelSpec, median_heuristic
from .simgen import Dataset, make_dataset
from .tolerance import ToleranceRegion, fit_tolerance

logger = logging.getLogger(__name__)


def _parse_alphas(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse alpha list {text!r}")


def _common(parser: argparse.ArgumentParser, data: bool = False, model: bool = False):
    parser.add_argument("--config", type=Path, help="study config file (key=value sections)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--alpha", type=_parse_alphas, metavar="A[,A...]",
                        help="override the config levels")
    parser.add_argument("--out", type=Path, help="output directory (default: cwd)")
    parser.add_argument("--quiet", action="store_true", help="suppress progress logging")
    if data:
        parser.add_argument("--data", type=Path,
                            help="dataset CSV (combined, or the predictors file)")
        parser.add_argument("--data-y", type=Path,
                            help="responses CSV when the dataset uses two files")
    if model:
        parser.add_argument("--model", type=Path, required=True, help="persisted model file")


def _resolve_config(args) -> StudyConfig:
    cfg = load_config(args.config) if args.config else StudyConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.alpha is not None:
        cfg = replace(cfg, alphas=args.alpha)
    if args.out is not None:
        cfg = replace(cfg, out=str(args.out))
    return cfg.validate()


def _out_dir(cfg: StudyConfig) -> Path:
    out = Path(cfg.out) if cfg.out else Path.cwd()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve_data(cfg: StudyConfig, args) -> Dataset:
    data = getattr(args, "data", None)
    data_y = getattr(args, "data_y", None)
    if data is not None:
        return read_dataset(data, data_y)
    if cfg.dgp == "file":
        return read_dataset(cfg.data_x, cfg.data_y)
    return make_dataset(cfg.dgp, cfg.n, derive_seed(cfg.seed, 0, 0), cfg.m)


def _write_rows(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    logger.info("wrote %s", path)


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(cfg: StudyConfig, args) -> int:
    if cfg.dgp == "file":
        raise ConfigError("[data] dgp: simulate needs a generative DGP, not 'file'")
    dataset = make_dataset(cfg.dgp, cfg.n, derive_seed(cfg.seed, 0, 0), cfg.m)
    paths = write_dataset(dataset, _out_dir(cfg))
    for label, path in paths.items():
        logger.info("wrote %s (%s)", path, label)
    return 0


def cmd_fit(cfg: StudyConfig, args) -> int:
    data = _resolve_data(cfg, args)
    model = fit_model(cfg, data, alpha=cfg.alphas[0], seed=derive_seed(cfg.seed, 0, 1))
    path = _out_dir(cfg) / "model.json"
    save_model(model, path, alphas=cfg.alphas,
               meta={"dgp": data.dgp, "n": data.n, "seed": cfg.seed,
                     "algorithm": cfg.algorithm})
    logger.info("wrote %s", path)
    return 0


def cmd_predict(cfg: StudyConfig, args) -> int:
    model = load_model(args.model)
    data = _resolve_data(cfg, args)
    alpha = cfg.alphas[0]
    if isinstance(model, ToleranceRegion):
        scores = depth_unconditional_many(model.kme, data.y)
        threshold = model.threshold
    else:
        scores = model.score_pairs(pack_points(data.x), pack_points(data.y))
        threshold = model.threshold(alpha)
    rows = [[fmt(s), fmt(threshold), int(s >= threshold)] for s in scores]
    _write_rows(_out_dir(cfg) / "predictions.csv", ["score", "threshold", "member"], rows)
    return 0


def cmd_coverage(cfg: StudyConfig, args) -> int:
    if args.model is not None:
        model = load_model(args.model)
    else:
        train = _resolve_data(cfg, args)
        model = fit_model(cfg, train, alpha=cfg.alphas[0], seed=derive_seed(cfg.seed, 0, 1))
    if args.data is not None:
        fresh = read_dataset(args.data, args.data_y)
    else:
        fresh = make_dataset(cfg.dgp, cfg.n_eval, derive_seed(cfg.seed, 0, 2), cfg.m)
    rows = []
    for alpha in cfg.alphas:
        cov = float(coverage_indicators(model, fresh, alpha).mean())
        rows.append([fmt(alpha), fmt(cov), fresh.n])
    _write_rows(_out_dir(cfg) / "coverage.csv", ["alpha", "coverage", "n_eval"], rows)
    return 0


def cmd_tolerance(cfg: StudyConfig, args) -> int:
    data = _resolve_data(cfg, args)
    yp = pack_points(data.y)
    sigma = median_heuristic(yp) if isinstance(cfg.sigma_y, str) else float(cfg.sigma_y)
    kernel = KernelSpec("gaussian", sigma, yp.kind)
    rows = []
    for alpha in cfg.alphas:
        region = fit_tolerance(yp, kernel, alpha)
        rows.append([fmt(alpha), region.rank, fmt(region.threshold), len(yp)])
    _write_rows(_out_dir(cfg) / "tolerance.csv", ["alpha", "r_n", "threshold", "n"], rows)
    return 0


def cmd_bootstrap(cfg: StudyConfig, args) -> int:
    if cfg.x_query is None:
        raise ConfigError("[bootstrap] x: a query predictor is required")
    if cfg.algorithm not in ("homo", "hetero"):
        raise ConfigError("[model] algorithm: bootstrap regions need 'homo' or 'hetero'")
    data = _resolve_data(cfg, args)
    x = euclidean_point(cfg.x_query)
    rows = []
    for content in cfg.alphas:
        region = bootstrap_tolerance(data, cfg, content=content, x=x)
        rows.append([fmt(content), fmt(cfg.gamma), cfg.n_boot, cfg.direction,
                     fmt(region.base_threshold), fmt(region.adjusted_threshold)])
    _write_rows(_out_dir(cfg) / "bootstrap.csv",
                ["content", "gamma", "n_boot", "direction",
                 "base_threshold", "adjusted_threshold"], rows)
    return 0


def _write_study_reports(report: CoverageReport, out: Path) -> None:
    cfg = report.config
    mean_cov, se_cov = report.mean_coverage(), report.se_coverage()
    mean_l2, se_l2 = report.mean_l2(), report.se_l2()
    rows = []
    for j, alpha in enumerate(report.alphas):
        rows.append([
            cfg.dgp, cfg.algorithm, cfg.n, fmt(alpha), fmt(report.nominal[j]),
            cfg.replicates, fmt(mean_cov[j]), fmt(se_cov[j]),
            fmt(mean_l2[j]) if mean_l2 is not None else "",
            fmt(se_l2[j]) if se_l2 is not None else "",
        ])
    _write_rows(out / "report.csv",
                ["dgp", "algorithm", "n", "alpha", "nominal", "replicates",
                 "mean_coverage", "se_coverage", "mean_l2", "se_l2"], rows)

    rows = []
    for rep in range(cfg.replicates):
        for j, alpha in enumerate(report.alphas):
            cov = report.coverage[rep, j]
            l2 = report.l2_error[rep, j] if report.l2_error is not None else np.nan
            rows.append([rep, report.seeds[rep], report.statuses[rep], fmt(alpha),
                         fmt(cov) if np.isfinite(cov) else "",
                         fmt(l2) if np.isfinite(l2) else ""])
    _write_rows(out / "replicates.csv",
                ["replicate", "seed", "status", "alpha", "coverage", "l2_error"], rows)

    if report.curves is not None:
        header = ["x"] + [f"p_{fmt(a)}" for a in report.alphas]
        rows = [[fmt(x)] + [fmt(report.curves[j, i]) for j in range(len(report.alphas))]
                for i, x in enumerate(report.curve_grid)]
        _write_rows(out / "plotdata.csv", header, rows)


def cmd_study(cfg: StudyConfig, args) -> int:
    report = run_study(cfg)
    _write_study_reports(report, _out_dir(cfg))
    return 0


# ---------------------------------------------------------------------------
# entry point


_COMMANDS = {
    "simulate": (cmd_simulate, dict(data=False, model=False)),
    "fit": (cmd_fit, dict(data=True, model=False)),
    "predict": (cmd_predict, dict(data=True, model=True)),
    "coverage": (cmd_coverage, dict(data=True, model=False)),
    "tolerance": (cmd_tolerance, dict(data=True, model=False)),
    "bootstrap": (cmd_bootstrap, dict(data=True, model=False)),
    "study": (cmd_study, dict(data=False, model=False)),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hilbertconformal",
        description="Depth-based conformal prediction and tolerance regions "
                    "in separable Hilbert spaces.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (fn, opts) in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        _common(p, **opts)
        if name == "coverage":
            p.add_argument("--model", type=Path, help="persisted model file (else fit from config)")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve_config(args)
        return args.func(cfg, args)
    except (ConfigError, FitError, MismatchError, ValueError, OSError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
