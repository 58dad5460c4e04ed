"""NumPy implementations of the hot numerical kernels.

These mirror the compiled routines in ``_native`` and are used when the
extension is unavailable or when ``HC_BACKEND=numpy`` is set.  Pairwise
squared distances use the expanded-product (GEMM) formulation; the compiled
core uses direct summation, so the two may differ by rounding noise only.
"""

import numpy as np

name = "numpy"


def pairwise_sq_dists(a: np.ndarray, b: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted squared distances d2[i, j] = sum_k w[k] * (a[i,k] - b[j,k])**2."""
    sw = np.sqrt(weights)
    aw = a * sw
    bw = b * sw
    d2 = aw @ bw.T
    d2 *= -2.0
    d2 += np.einsum("ij,ij->i", aw, aw)[:, None]
    d2 += np.einsum("ij,ij->i", bw, bw)[None, :]
    # cancellation in the expanded product can leave tiny negatives
    np.maximum(d2, 0.0, out=d2)
    return d2


def cross_gaussian(a: np.ndarray, b: np.ndarray, weights: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian kernel matrix exp(-sigma * d2) between the rows of a and b."""
    d2 = pairwise_sq_dists(a, b, weights)
    d2 *= -sigma
    return np.exp(d2, out=d2)


def gram_gaussian(a: np.ndarray, weights: np.ndarray, sigma: float) -> np.ndarray:
    """Symmetric Gaussian Gram matrix with an exact unit diagonal."""
    k = cross_gaussian(a, a, weights, sigma)
    # GEMM cell ordering is not bitwise symmetric; average the halves
    k = 0.5 * (k + k.T)
    np.fill_diagonal(k, 1.0)
    return k


def nw_cdf(sq_dists: np.ndarray, inv_two_h2: float, bank_scores: np.ndarray,
           query_scores: np.ndarray) -> np.ndarray:
    """Nadaraya-Watson conditional CDF estimates.

    For each query row i:
        g[i] = sum_j exp(-sq_dists[i,j] * inv_two_h2) * 1{bank_scores[j] <= query_scores[i]}
               / sum_j exp(-sq_dists[i,j] * inv_two_h2)

    Rows whose weights all underflow to zero are returned as NaN; the caller
    decides the fallback.
    """
    w = np.exp(-inv_two_h2 * sq_dists)
    den = w.sum(axis=1)
    ind = bank_scores[None, :] <= query_scores[:, None]
    num = np.einsum("ij,ij->i", w, ind.astype(np.float64))
    with np.errstate(invalid="ignore", divide="ignore"):
        g = num / den
    g[den == 0.0] = np.nan
    return g
