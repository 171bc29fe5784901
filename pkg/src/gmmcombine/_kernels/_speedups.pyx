# Compiled versions of the inference kernels in reference.py.
# Loops are arranged as contiguous row sweeps over the outcome axis so the
# compiler can vectorize them; one weight buffer is the only temporary.

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from "math.h":
    double exp_c "exp"(double x) nogil
    double log_c "log"(double x) nogil


def logsumexp(double[::1] values):
    """log(sum(exp(values))) with a max shift, for a 1-D float64 array."""
    cdef Py_ssize_t p, n = values.shape[0]
    cdef double m = values[0]
    cdef double acc = 0.0
    for p in range(1, n):
        if values[p] > m:
            m = values[p]
    if m != m or m == float("inf") or m == float("-inf"):
        return m
    for p in range(n):
        acc += exp_c(values[p] - m)
    return m + log_c(acc)


def sum_rows(double[:, ::1] matrix):
    """Column sums of a 2-D array: joint log weight from per-agent rows."""
    cdef Py_ssize_t i, p
    cdef Py_ssize_t k = matrix.shape[0], n = matrix.shape[1]
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(k):
        for p in range(n):
            out[p] += matrix[i, p]
    return out_arr


def log_linear_moments(double[:, ::1] stats, double[::1] coeffs):
    """Moments of a log-linear distribution over enumerated outcomes.

    The distribution places weight exp(coeffs @ stats[:, p]) on outcome p.
    Returns ``(logz, means)`` with the log normalizer and the expectation
    of each statistic row under the normalized distribution.
    """
    cdef Py_ssize_t j, p
    cdef Py_ssize_t k = stats.shape[0], n = stats.shape[1]
    cdef double m, acc, total, c, ep
    w_arr = np.zeros(n, dtype=np.float64)
    means_arr = np.zeros(k, dtype=np.float64)
    cdef double[::1] w = w_arr
    cdef double[::1] means = means_arr

    for j in range(k):
        c = coeffs[j]
        for p in range(n):
            w[p] += c * stats[j, p]

    m = w[0]
    for p in range(1, n):
        if w[p] > m:
            m = w[p]

    total = 0.0
    for p in range(n):
        ep = exp_c(w[p] - m)
        w[p] = ep
        total += ep

    for j in range(k):
        acc = 0.0
        for p in range(n):
            acc += stats[j, p] * w[p]
        means[j] = acc / total
    return m + log_c(total), means_arr
