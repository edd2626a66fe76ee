# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the functions in ``_pykernels``.

Same arithmetic in the same order; the loops release the GIL so per-class
trees can be grown from worker threads.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, copysign, fmax

cnp.import_array()

NAME = "cython"


def build_histogram(const cnp.uint8_t[:, ::1] binned, samples, const double[::1] g,
                    const double[::1] h, Py_ssize_t n_bins_max):
    cdef Py_ssize_t n_features = binned.shape[1]
    cdef cnp.intp_t[::1] idx = np.ascontiguousarray(samples, dtype=np.intp)
    hist_g_arr = np.zeros((n_features, n_bins_max))
    hist_h_arr = np.zeros((n_features, n_bins_max))
    hist_c_arr = np.zeros((n_features, n_bins_max), dtype=np.int64)
    cdef double[:, ::1] hist_g = hist_g_arr
    cdef double[:, ::1] hist_h = hist_h_arr
    cdef cnp.int64_t[:, ::1] hist_c = hist_c_arr
    cdef Py_ssize_t i, f, s, b, n = idx.shape[0]
    cdef double gs, hs
    with nogil:
        for i in range(n):
            s = idx[i]
            gs = g[s]
            hs = h[s]
            for f in range(n_features):
                b = binned[s, f]
                hist_g[f, b] += gs
                hist_h[f, b] += hs
                hist_c[f, b] += 1
    return hist_g_arr, hist_h_arr, hist_c_arr


cdef inline double _objective(double grad, double hess, double reg_alpha, double reg_lambda) nogil:
    if reg_alpha != 0.0:
        grad = copysign(fmax(fabs(grad) - reg_alpha, 0.0), grad)
    return grad * grad / (hess + reg_lambda)


def find_best_split(const double[:, ::1] hist_g, const double[:, ::1] hist_h,
                    const cnp.int64_t[:, ::1] hist_c, n_bins_arr,
                    double parent_g, double parent_h, cnp.int64_t parent_n,
                    cnp.int64_t min_samples_leaf, double min_child_weight,
                    double min_split_gain, double reg_alpha, double reg_lambda):
    cdef cnp.intp_t[::1] n_bins = np.ascontiguousarray(n_bins_arr, dtype=np.intp)
    cdef Py_ssize_t n_features = hist_g.shape[0], f, b
    cdef double lg, lh, rg, rh, gain, parent_obj
    cdef double best_gain = 0.0, best_lg = 0.0, best_lh = 0.0
    cdef cnp.int64_t ln, rn, best_ln = 0
    cdef Py_ssize_t best_f = -1, best_b = -1
    cdef bint found = False
    parent_obj = _objective(parent_g, parent_h, reg_alpha, reg_lambda)
    with nogil:
        for f in range(n_features):
            lg = 0.0
            lh = 0.0
            ln = 0
            for b in range(n_bins[f] - 1):
                lg += hist_g[f, b]
                lh += hist_h[f, b]
                ln += hist_c[f, b]
                rg = parent_g - lg
                rh = parent_h - lh
                rn = parent_n - ln
                if ln < min_samples_leaf or rn < min_samples_leaf:
                    continue
                if lh < min_child_weight or rh < min_child_weight:
                    continue
                if not (lh + reg_lambda > 0.0 and rh + reg_lambda > 0.0):
                    continue
                gain = (_objective(lg, lh, reg_alpha, reg_lambda)
                        + _objective(rg, rh, reg_alpha, reg_lambda)) - parent_obj
                if not gain > min_split_gain:
                    continue
                if not found or gain > best_gain:
                    found = True
                    best_gain = gain
                    best_f = f
                    best_b = b
                    best_lg = lg
                    best_lh = lh
                    best_ln = ln
    if not found:
        return -1, -1, 0.0, 0.0, 0.0, 0
    return best_f, best_b, best_gain, best_lg, best_lh, best_ln


def partition(const cnp.uint8_t[:, ::1] binned, samples, Py_ssize_t feature, Py_ssize_t threshold):
    cdef cnp.intp_t[::1] idx = np.ascontiguousarray(samples, dtype=np.intp)
    cdef Py_ssize_t n = idx.shape[0], i, nl = 0, nr = 0
    left_arr = np.empty(n, dtype=np.intp)
    right_arr = np.empty(n, dtype=np.intp)
    cdef cnp.intp_t[::1] left = left_arr
    cdef cnp.intp_t[::1] right = right_arr
    with nogil:
        for i in range(n):
            if binned[idx[i], feature] <= threshold:
                left[nl] = idx[i]
                nl += 1
            else:
                right[nr] = idx[i]
                nr += 1
    return left_arr[:nl], right_arr[:nr]


def route(const cnp.uint8_t[:, ::1] binned, feature_arr, threshold_arr, left_arr, right_arr):
    cdef cnp.intp_t[::1] feature = np.ascontiguousarray(feature_arr, dtype=np.intp)
    cdef cnp.intp_t[::1] threshold = np.ascontiguousarray(threshold_arr, dtype=np.intp)
    cdef cnp.intp_t[::1] left = np.ascontiguousarray(left_arr, dtype=np.intp)
    cdef cnp.intp_t[::1] right = np.ascontiguousarray(right_arr, dtype=np.intp)
    cdef Py_ssize_t n = binned.shape[0], i, node
    out_arr = np.empty(n, dtype=np.intp)
    cdef cnp.intp_t[::1] out = out_arr
    with nogil:
        for i in range(n):
            node = 0
            while left[node] >= 0:
                if binned[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[i] = node
    return out_arr
