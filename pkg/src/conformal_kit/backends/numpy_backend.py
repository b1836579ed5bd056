"""Pure-NumPy implementations of the hot kernels.

This is the fallback backend used when the compiled extension is not
available. Semantics (tie-breaking, accumulation in log space) match the
compiled kernels exactly; floating-point results may differ by rounding
because distances are computed via the inner-product expansion here.
"""

import numpy as np

NAME = "numpy"

_LOG_2PI = float(np.log(2.0 * np.pi))


def _as_matrix(a, name):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    return a


def sq_dists(a, b):
    """Pairwise squared Euclidean distances, shape (len(a), len(b))."""
    a = _as_matrix(a, "a")
    b = _as_matrix(b, "b")
    a2 = np.einsum("ij,ij->i", a, a)[:, None]
    b2 = np.einsum("ij,ij->i", b, b)[None, :]
    d2 = a2 + b2 - 2.0 * (a @ b.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def knn(points, queries, k, chunk=1024):
    """k nearest neighbours of each query among ``points``.

    Returns (idx, dist) of shapes (n_queries, k); rows sorted by ascending
    distance with ties broken by lower point index. ``dist`` is Euclidean.
    """
    points = _as_matrix(points, "points")
    queries = _as_matrix(queries, "queries")
    m = queries.shape[0]
    idx = np.empty((m, k), dtype=np.int64)
    dist = np.empty((m, k), dtype=np.float64)
    for lo in range(0, m, chunk):
        hi = min(lo + chunk, m)
        d2 = sq_dists(queries[lo:hi], points)
        # stable sort keeps lower index first among exact ties
        order = np.argsort(d2, axis=1, kind="stable")[:, :k]
        idx[lo:hi] = order
        dist[lo:hi] = np.sqrt(np.take_along_axis(d2, order, axis=1))
    return idx, dist


def kde_logdensity(points, queries, bandwidth, chunk=256):
    """Log of the mean product-Gaussian kernel at each query point.

    Accumulates in log space with max-subtraction so far-away queries do
    not underflow to -inf.
    """
    points = _as_matrix(points, "points")
    queries = _as_matrix(queries, "queries")
    bandwidth = np.asarray(bandwidth, dtype=np.float64)
    n, d = points.shape
    lognorm = float(np.log(bandwidth).sum() + 0.5 * d * _LOG_2PI)
    out = np.empty(queries.shape[0], dtype=np.float64)
    inv_bw = 1.0 / bandwidth
    for lo in range(0, queries.shape[0], chunk):
        hi = min(lo + chunk, queries.shape[0])
        z = (queries[lo:hi, None, :] - points[None, :, :]) * inv_bw
        logk = -0.5 * np.einsum("qnd,qnd->qn", z, z)
        best = logk.max(axis=1)
        out[lo:hi] = (
            best
            + np.log(np.exp(logk - best[:, None]).sum(axis=1))
            - np.log(n)
            - lognorm
        )
    return out


def assign_nearest(points, centroids):
    """Nearest-centroid assignment; ties go to the lower centroid index.

    Returns (labels, sq_dist) of shapes (len(points),).
    """
    d2 = sq_dists(points, centroids)
    labels = np.argmin(d2, axis=1).astype(np.int64)  # argmin takes first tie
    sqd = d2[np.arange(d2.shape[0]), labels]
    return labels, sqd
