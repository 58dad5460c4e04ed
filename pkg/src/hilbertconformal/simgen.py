"""Seeded data generators for the simulation designs.

All generators are bit-reproducible for a fixed (n, seed) and never share
random streams: parallel callers must derive distinct seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .hilbert import (HilbertPoint, curve_point, euclidean_point, probability_grid,
                      quantile_point)

DGP_NAMES = ("setting1", "setting2", "func2func", "distributional")

DEFAULT_CURVE_GRID = 50
DEFAULT_QUANTILE_GRID = 100


@dataclass
class Dataset:
    """Paired predictor/response sample with generation metadata."""

    x: list[HilbertPoint]
    y: list[HilbertPoint]
    dgp: str
    seed: int
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.x)

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError("predictor and response lists must have equal length")


def gen_setting1(n: int, seed: int) -> Dataset:
    """Nonlinear heteroscedastic scalars: Y = 3 + exp(X) + eps*X.

    X ~ U(0, 5), eps ~ U(-1, 1); the noise scale grows linearly in X.
    """
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0.0, 5.0, size=n)
    eps = rng.uniform(-1.0, 1.0, size=n)
    ys = 3.0 + np.exp(xs) + eps * xs
    return Dataset([euclidean_point([v]) for v in xs],
                   [euclidean_point([v]) for v in ys], "setting1", seed)


def gen_setting2(n: int, seed: int) -> Dataset:
    """Linear homoscedastic scalars: Y = X + eps, X ~ U(0, 5), eps ~ U(0, 5)."""
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0.0, 5.0, size=n)
    eps = rng.uniform(0.0, 5.0, size=n)
    ys = xs + eps
    return Dataset([euclidean_point([v]) for v in xs],
                   [euclidean_point([v]) for v in ys], "setting2", seed)


def legendre_basis(grid: np.ndarray, k_max: int = 10) -> np.ndarray:
    """Orthonormal polynomial basis on [0, 1]; rows are phi_1..phi_k.

    Shifted Legendre polynomials, re-orthonormalized against the trapezoid
    inner product on the given grid so the basis is exactly orthonormal in
    the discretized geometry used everywhere else.  phi_1 stays the constant
    function 1.
    """
    from scipy.linalg import cholesky, solve_triangular
    u = 2.0 * grid - 1.0
    out = np.empty((k_max, grid.size))
    for k in range(1, k_max + 1):
        coef = np.zeros(k)
        coef[-1] = 1.0
        out[k - 1] = np.sqrt(2.0 * k - 1.0) * np.polynomial.legendre.legval(u, coef)
    w = np.empty(grid.size)
    w[0] = (grid[1] - grid[0]) / 2.0
    w[-1] = (grid[-1] - grid[-2]) / 2.0
    w[1:-1] = (grid[2:] - grid[:-2]) / 2.0
    gram = (out * w) @ out.T
    lower = cholesky(gram, lower=True)
    return solve_triangular(lower, out, lower=True)


def _func2func_response(grid: np.ndarray, x_vals: np.ndarray, e1: float, e2: float) -> np.ndarray:
    # integral of X(s) * 5 s t ds = 5 t * trapz(X(s) * s)
    signal = 5.0 * np.trapezoid(x_vals * grid, grid) * grid
    return np.sin(np.pi * grid) + signal + np.cos(2.0 * np.pi * grid) * e1 \
        + np.sin(2.0 * np.pi * grid) * e2


def gen_func2func(n: int, seed: int, m: int = DEFAULT_CURVE_GRID) -> Dataset:
    """Function-on-function design on the uniform m-point grid over [0, 1].

    X_i = sum_k psi_ik phi_k with psi_ik ~ N(0, 10 - k + 1) over the first
    ten orthonormal shifted Legendre polynomials;
    Y(t) = sin(pi t) + int X(s) 5 s t ds + cos(2 pi t) e1 + sin(2 pi t) e2
    with e1 ~ N(0, 0.5^2), e2 ~ N(0, 0.75^2).
    """
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 1.0, m)
    basis = legendre_basis(grid)
    sd = np.sqrt(10.0 - np.arange(1, 11) + 1.0)
    coeffs = rng.normal(size=(n, 10)) * sd
    e1 = rng.normal(0.0, 0.5, size=n)
    e2 = rng.normal(0.0, 0.75, size=n)
    xs, ys = [], []
    for i in range(n):
        xv = coeffs[i] @ basis
        xs.append(curve_point(grid, xv))
        ys.append(curve_point(grid, _func2func_response(grid, xv, e1[i], e2[i])))
    return Dataset(xs, ys, "func2func", seed, {"m": m})


def gen_distributional(n: int, seed: int, m: int = DEFAULT_QUANTILE_GRID) -> Dataset:
    """Scalar-to-quantile design: Y is the quantile function of N(2X, (0.5+X)^2).

    X ~ U(0, 1); responses live on the midpoint m-grid and exercise the
    2-Wasserstein kernel path end to end.
    """
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0.0, 1.0, size=n)
    z = ndtri(probability_grid(m))
    xout, yout = [], []
    for v in xs:
        xout.append(euclidean_point([v]))
        yout.append(quantile_point(2.0 * v + (0.5 + v) * z))
    return Dataset(xout, yout, "distributional", seed, {"m": m})


_GENERATORS = {
    "setting1": gen_setting1,
    "setting2": gen_setting2,
    "func2func": gen_func2func,
    "distributional": gen_distributional,
}


def make_dataset(dgp: str, n: int, seed: int, m: int | None = None) -> Dataset:
    """Dispatch on the DGP name; m selects the grid size where relevant."""
    if dgp not in _GENERATORS:
        raise ValueError(f"unknown DGP {dgp!r}; expected one of {DGP_NAMES}")
    if dgp in ("func2func", "distributional") and m is not None:
        return _GENERATORS[dgp](n, seed, m)
    return _GENERATORS[dgp](n, seed)


def sample_conditional(dgp: str, x: HilbertPoint, size: int, seed: int,
                       m: int | None = None) -> list[HilbertPoint]:
    """Fresh draws of Y | X = x for DGPs with a stochastic response."""
    rng = np.random.default_rng(seed)
    if dgp == "setting1":
        v = float(x.values[0])
        ys = 3.0 + np.exp(v) + rng.uniform(-1.0, 1.0, size=size) * v
        return [euclidean_point([w]) for w in ys]
    if dgp == "setting2":
        v = float(x.values[0])
        ys = v + rng.uniform(0.0, 5.0, size=size)
        return [euclidean_point([w]) for w in ys]
    if dgp == "func2func":
        grid = x.grid
        e1 = rng.normal(0.0, 0.5, size=size)
        e2 = rng.normal(0.0, 0.75, size=size)
        return [curve_point(grid, _func2func_response(grid, x.values, e1[i], e2[i]))
                for i in range(size)]
    if dgp == "distributional":
        raise ValueError("the distributional response is deterministic given X")
    raise ValueError(f"unknown DGP {dgp!r}")


def predictor_support(dgp: str) -> tuple[float, float] | None:
    """Scalar predictor support, if the DGP has one (for conditional curves)."""
    if dgp in ("setting1", "setting2"):
        return (0.0, 5.0)
    if dgp == "distributional":
        return (0.0, 1.0)
    return None
