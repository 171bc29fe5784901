"""NumPy implementation of the inference kernels.

These three functions are the numeric core shared by every exact-inference
operation: accumulating per-agent log potentials into joint log weights,
reducing log weights to a log-partition value, and computing softmax-weighted
moments of a statistics matrix. The compiled module in ``_speedups.pyx``
provides the same signatures; either backend may be selected at import time.

All inputs are expected to be float64. ``stats`` matrices are laid out one
row per statistic, one column per enumerated outcome.
"""

import numpy as np


def logsumexp(values):
    """log(sum(exp(values))) with a max shift, for a 1-D float64 array."""
    m = float(np.max(values))
    if not np.isfinite(m):
        return m
    return m + float(np.log(np.sum(np.exp(values - m))))


def sum_rows(matrix):
    """Column sums of a 2-D array: joint log weight from per-agent rows."""
    return np.asarray(matrix).sum(axis=0)


def log_linear_moments(stats, coeffs):
    """Moments of a log-linear distribution over enumerated outcomes.

    The distribution places weight exp(coeffs @ stats[:, p]) on outcome p.
    Returns ``(logz, means)`` where ``logz`` is the log normalizer and
    ``means[j]`` is the expectation of ``stats[j]`` under the normalized
    distribution.
    """
    stats = np.asarray(stats, dtype=np.float64)
    coeffs = np.asarray(coeffs, dtype=np.float64)
    w = coeffs @ stats
    m = float(np.max(w))
    e = np.exp(w - m)
    total = float(e.sum())
    probs = e / total
    return m + float(np.log(total)), stats @ probs
