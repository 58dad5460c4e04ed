"""Backend selection for the numerical kernel core.

The compiled extension (``hilbertconformal._native``, built from Cython) is
preferred when importable; otherwise the numpy implementation is used.  The
environment variable ``HC_BACKEND`` forces the choice:

    HC_BACKEND=native   require the compiled core (ImportError if missing)
    HC_BACKEND=numpy    force the numpy fallback
    HC_BACKEND=auto     default behaviour

Both backends expose the same four functions with identical semantics; see
``benchmarks/bench_backends.py`` for a timing comparison.
"""

from __future__ import annotations

import os

import numpy as np

from . import _backend_np

try:
    from . import _native
except ImportError:
    _native = None


def available_backends() -> tuple[str, ...]:
    return ("numpy",) if _native is None else ("native", "numpy")


def _resolve(mode: str):
    mode = mode.lower()
    if mode == "numpy":
        return _backend_np
    if mode == "native":
        if _native is None:
            raise ImportError("compiled core requested via HC_BACKEND=native but not built")
        return _native
    if mode == "auto":
        return _native if _native is not None else _backend_np
    raise ValueError(f"unknown backend {mode!r}; expected auto, native or numpy")


_impl = _resolve(os.environ.get("HC_BACKEND", "auto"))


def current_backend() -> str:
    return _impl.name


def set_backend(mode: str) -> str:
    """Switch backend at runtime (used by tests and benchmarks)."""
    global _impl
    _impl = _resolve(mode)
    return _impl.name


def _c2d(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def _c1d(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def pairwise_sq_dists(a, b, weights):
    return _impl.pairwise_sq_dists(_c2d(a), _c2d(b), _c1d(weights))


def cross_gaussian(a, b, weights, sigma):
    return _impl.cross_gaussian(_c2d(a), _c2d(b), _c1d(weights), float(sigma))


def gram_gaussian(a, weights, sigma):
    return _impl.gram_gaussian(_c2d(a), _c1d(weights), float(sigma))


def nw_cdf(sq_dists, inv_two_h2, bank_scores, query_scores):
    return _impl.nw_cdf(_c2d(sq_dists), float(inv_two_h2), _c1d(bank_scores),
                        _c1d(query_scores))
