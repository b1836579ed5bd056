# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: pairwise distances, k-NN selection, KDE log-density,
nearest-centroid assignment.

Tie-breaking and log-space accumulation mirror the NumPy backend. Distances
are accumulated term by term (not via the inner-product expansion), so exact
float values can differ from the fallback by rounding; all call sites treat
backends as interchangeable up to tolerance.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, sqrt

cnp.import_array()

NAME = "c"

cdef double _LOG_2PI = 1.8378770664093453


def sq_dists(a, b):
    """Pairwise squared Euclidean distances, shape (len(a), len(b))."""
    cdef double[:, ::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[:, ::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t na = av.shape[0], nb = bv.shape[0], d = av.shape[1]
    if bv.shape[1] != d:
        raise ValueError("dimension mismatch")
    out = np.empty((na, nb), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, j, t
    cdef double acc, diff
    with nogil:
        for i in range(na):
            for j in range(nb):
                acc = 0.0
                for t in range(d):
                    diff = av[i, t] - bv[j, t]
                    acc += diff * diff
                ov[i, j] = acc
    return out


cdef inline bint _lex_less(double d1, Py_ssize_t i1, double d2, Py_ssize_t i2) nogil:
    if d1 != d2:
        return d1 < d2
    return i1 < i2


cdef void _sift_down(double* hd, Py_ssize_t* hi, Py_ssize_t k, Py_ssize_t root) nogil:
    # max-heap on (dist, idx) lexicographic order
    cdef Py_ssize_t child
    cdef double dv
    cdef Py_ssize_t iv
    dv = hd[root]
    iv = hi[root]
    while True:
        child = 2 * root + 1
        if child >= k:
            break
        if child + 1 < k and _lex_less(hd[child], hi[child], hd[child + 1], hi[child + 1]):
            child += 1
        if _lex_less(dv, iv, hd[child], hi[child]):
            hd[root] = hd[child]
            hi[root] = hi[child]
            root = child
        else:
            break
    hd[root] = dv
    hi[root] = iv


def knn(points, queries, Py_ssize_t k, chunk=None):
    """k nearest neighbours per query; rows ascending by (distance, index)."""
    cdef double[:, ::1] pv = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[:, ::1] qv = np.ascontiguousarray(queries, dtype=np.float64)
    cdef Py_ssize_t n = pv.shape[0], m = qv.shape[0], d = pv.shape[1]
    if qv.shape[1] != d:
        raise ValueError("dimension mismatch")
    if k < 1 or k > n:
        raise ValueError("k out of range")
    idx = np.empty((m, k), dtype=np.int64)
    dist = np.empty((m, k), dtype=np.float64)
    cdef long long[:, ::1] iv = idx
    cdef double[:, ::1] dv = dist
    hd_arr = np.empty(k, dtype=np.float64)
    hi_arr = np.empty(k, dtype=np.intp)
    cdef double[::1] hd = hd_arr
    cdef Py_ssize_t[::1] hi = hi_arr
    cdef Py_ssize_t i, j, t, size, last
    cdef double acc, diff, tmpd
    cdef Py_ssize_t tmpi
    with nogil:
        for i in range(m):
            size = 0
            for j in range(n):
                acc = 0.0
                for t in range(d):
                    diff = qv[i, t] - pv[j, t]
                    acc += diff * diff
                if size < k:
                    # grow heap: append then sift up
                    hd[size] = acc
                    hi[size] = j
                    t = size
                    size += 1
                    while t > 0 and _lex_less(hd[(t - 1) // 2], hi[(t - 1) // 2], hd[t], hi[t]):
                        tmpd = hd[t]; tmpi = hi[t]
                        hd[t] = hd[(t - 1) // 2]; hi[t] = hi[(t - 1) // 2]
                        hd[(t - 1) // 2] = tmpd; hi[(t - 1) // 2] = tmpi
                        t = (t - 1) // 2
                elif _lex_less(acc, j, hd[0], hi[0]):
                    hd[0] = acc
                    hi[0] = j
                    _sift_down(&hd[0], &hi[0], k, 0)
            # heap-sort in place: extract max to the back
            last = k - 1
            while last > 0:
                tmpd = hd[0]; tmpi = hi[0]
                hd[0] = hd[last]; hi[0] = hi[last]
                hd[last] = tmpd; hi[last] = tmpi
                _sift_down(&hd[0], &hi[0], last, 0)
                last -= 1
            for j in range(k):
                iv[i, j] = hi[j]
                dv[i, j] = sqrt(hd[j])
    return idx, dist


def kde_logdensity(points, queries, bandwidth, chunk=None):
    """Log of the mean product-Gaussian kernel at each query point."""
    cdef double[:, ::1] pv = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[:, ::1] qv = np.ascontiguousarray(queries, dtype=np.float64)
    cdef double[::1] bw = np.ascontiguousarray(bandwidth, dtype=np.float64)
    cdef Py_ssize_t n = pv.shape[0], m = qv.shape[0], d = pv.shape[1]
    if qv.shape[1] != d or bw.shape[0] != d:
        raise ValueError("dimension mismatch")
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] ov = out
    buf_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] buf = buf_arr
    cdef Py_ssize_t i, j, t
    cdef double acc, z, best, s, lognorm
    lognorm = 0.5 * d * _LOG_2PI
    for t in range(d):
        lognorm += log(bw[t])
    with nogil:
        for i in range(m):
            best = -1e308
            for j in range(n):
                acc = 0.0
                for t in range(d):
                    z = (qv[i, t] - pv[j, t]) / bw[t]
                    acc += z * z
                buf[j] = -0.5 * acc
                if buf[j] > best:
                    best = buf[j]
            s = 0.0
            for j in range(n):
                s += exp(buf[j] - best)
            ov[i] = best + log(s) - log(<double> n) - lognorm
    return out


def assign_nearest(points, centroids):
    """Nearest-centroid assignment; ties go to the lower centroid index."""
    cdef double[:, ::1] pv = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[:, ::1] cv = np.ascontiguousarray(centroids, dtype=np.float64)
    cdef Py_ssize_t n = pv.shape[0], kc = cv.shape[0], d = pv.shape[1]
    if cv.shape[1] != d:
        raise ValueError("dimension mismatch")
    labels = np.empty(n, dtype=np.int64)
    sqd = np.empty(n, dtype=np.float64)
    cdef long long[::1] lv = labels
    cdef double[::1] sv = sqd
    cdef Py_ssize_t i, j, t, best_j
    cdef double acc, diff, best
    with nogil:
        for i in range(n):
            best = 1e308
            best_j = 0
            for j in range(kc):
                acc = 0.0
                for t in range(d):
                    diff = pv[i, t] - cv[j, t]
                    acc += diff * diff
                if acc < best:
                    best = acc
                    best_j = j
            lv[i] = best_j
            sv[i] = best
    return labels, sqd
