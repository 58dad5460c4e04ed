"""Declarative study configuration and the flat config-file parser.

Config files are INI-style text (section headers + key=value lines), e.g.::

    [data]
    dgp = setting2
    n = 1000
    seed = 7

    [model]
    algorithm = homo
    split = 0.5

    [study]
    alphas = 0.05, 0.5
    replicates = 100

See the README for the full key list.  Unknown keys and invalid values raise
:class:`ConfigError` naming the offending field.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigError
from .simgen import DGP_NAMES

ALGORITHMS = ("tolerance", "homo", "hetero", "bootstrap")
DIRECTIONS = ("paper-upper", "conservative-lower")
REFIT_MODES = ("full", "calibration-only")


@dataclass
class StudyConfig:
    # [data]
    dgp: str = "setting2"
    n: int = 200
    m: int | None = None
    seed: int = 0
    data_x: str | None = None
    data_y: str | None = None

    # [model]
    algorithm: str = "homo"
    sigma_x: float | str = "auto"
    sigma_y: float | str = "auto"
    ridge: float = 1e-3
    cdf_bandwidth: float | str = "auto"
    split: float = 0.5
    splits: tuple[float, float, float] = (0.4, 0.3, 0.3)

    # [study]
    alphas: tuple[float, ...] = (0.05,)
    replicates: int = 1
    n_eval: int = 2000
    curve_grid: int = 200
    curve_bandwidth: float | str = "auto"
    workers: int = 1

    # [bootstrap]
    gamma: float = 0.9
    n_boot: int = 200
    direction: str = "paper-upper"
    refit: str = "full"
    x_query: tuple[float, ...] | None = None

    out: str | None = None

    def validate(self) -> "StudyConfig":
        def fail(section: str, key: str, msg: str):
            raise ConfigError(f"[{section}] {key}: {msg}")

        if self.dgp not in DGP_NAMES + ("file",):
            fail("data", "dgp", f"expected one of {DGP_NAMES + ('file',)}, got {self.dgp!r}")
        if self.dgp == "file" and (self.data_x is None or self.data_y is None):
            fail("data", "x/y", "dgp=file requires x and y data paths")
        for key, val in (("n", self.n), ("replicates", self.replicates),
                         ("n_eval", self.n_eval), ("curve_grid", self.curve_grid),
                         ("workers", self.workers), ("n_boot", self.n_boot)):
            if int(val) < 1:
                fail("study", key, f"must be at least 1, got {val}")
        if self.m is not None and self.m < 2:
            fail("data", "m", f"grid size must be at least 2, got {self.m}")
        if self.algorithm not in ALGORITHMS:
            fail("model", "algorithm", f"expected one of {ALGORITHMS}, got {self.algorithm!r}")
        if not self.alphas:
            fail("study", "alphas", "need at least one level")
        for a in self.alphas:
            if not 0.0 < a < 1.0:
                fail("study", "alphas", f"levels must lie in (0, 1), got {a}")
        if not 0.0 < self.split < 1.0:
            fail("model", "split", f"must lie in (0, 1), got {self.split}")
        if len(self.splits) != 3 or any(s <= 0 for s in self.splits) \
                or abs(sum(self.splits) - 1.0) > 1e-8:
            fail("model", "splits", f"need three positive fractions summing to 1, got {self.splits}")
        for key, val in (("sigma_x", self.sigma_x), ("sigma_y", self.sigma_y),
                         ("cdf_bandwidth", self.cdf_bandwidth),
                         ("curve_bandwidth", self.curve_bandwidth)):
            if isinstance(val, str) and val not in ("auto", "median"):
                fail("model", key, f"expected a positive number, 'auto' or 'median', got {val!r}")
            if not isinstance(val, str) and not float(val) > 0:
                fail("model", key, f"must be positive, got {val}")
        if not float(self.ridge) > 0:
            fail("model", "ridge", f"must be positive, got {self.ridge}")
        if not 0.0 < self.gamma < 1.0:
            fail("bootstrap", "gamma", f"must lie in (0, 1), got {self.gamma}")
        if self.direction not in DIRECTIONS:
            fail("bootstrap", "direction", f"expected one of {DIRECTIONS}, got {self.direction!r}")
        if self.refit not in REFIT_MODES:
            fail("bootstrap", "refit", f"expected one of {REFIT_MODES}, got {self.refit!r}")
        return self

    def effective_workers(self) -> int:
        cap = os.environ.get("HC_THREADS")
        workers = self.workers
        if cap is not None:
            try:
                workers = min(workers, max(1, int(cap)))
            except ValueError:
                raise ConfigError(f"HC_THREADS: expected an integer, got {cap!r}")
        return max(1, workers)


def _parse_value(section: str, key: str, raw: str, kind: str):
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "float_or_auto":
            return raw.lower() if raw.lower() in ("auto", "median") else float(raw)
        if kind == "floats":
            return tuple(float(p) for p in raw.replace(",", " ").split())
        return raw
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} as {kind}")


_SCHEMA = {
    ("data", "dgp"): ("dgp", "str"),
    ("data", "n"): ("n", "int"),
    ("data", "m"): ("m", "int"),
    ("data", "seed"): ("seed", "int"),
    ("data", "x"): ("data_x", "str"),
    ("data", "y"): ("data_y", "str"),
    ("model", "algorithm"): ("algorithm", "str"),
    ("model", "sigma_x"): ("sigma_x", "float_or_auto"),
    ("model", "sigma_y"): ("sigma_y", "float_or_auto"),
    ("model", "ridge"): ("ridge", "float"),
    ("model", "cdf_bandwidth"): ("cdf_bandwidth", "float_or_auto"),
    ("model", "split"): ("split", "float"),
    ("model", "splits"): ("splits", "floats"),
    ("study", "alphas"): ("alphas", "floats"),
    ("study", "replicates"): ("replicates", "int"),
    ("study", "n_eval"): ("n_eval", "int"),
    ("study", "curve_grid"): ("curve_grid", "int"),
    ("study", "curve_bandwidth"): ("curve_bandwidth", "float_or_auto"),
    ("study", "workers"): ("workers", "int"),
    ("bootstrap", "gamma"): ("gamma", "float"),
    ("bootstrap", "n_boot"): ("n_boot", "int"),
    ("bootstrap", "direction"): ("direction", "str"),
    ("bootstrap", "refit"): ("refit", "str"),
    ("bootstrap", "x"): ("x_query", "floats"),
    ("output", "dir"): ("out", "str"),
}


def load_config(path: str | Path) -> StudyConfig:
    """Parse and validate a config file."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    cfg = StudyConfig()
    for section in parser.sections():
        for key, raw in parser.items(section):
            spec = _SCHEMA.get((section, key))
            if spec is None:
                raise ConfigError(f"[{section}] {key}: unknown configuration key")
            attr, kind = spec
            cfg = replace(cfg, **{attr: _parse_value(section, key, raw, kind)})
    return cfg.validate()
