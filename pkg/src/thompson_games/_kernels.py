"""Compiled inner loops.

Both kernels consume a ``numpy.random.Generator`` directly; numba draws from
the same bit stream as NumPy, so a kernel and the pure-Python round in
``dynamics.step`` produce identical trajectories for identical seeds.
"""

import numpy as np
from numba import njit


@njit(nogil=True, cache=True)
def argmax_counts(gen, means, sds, samples):
    K = means.shape[0]
    counts = np.zeros(K, np.int64)
    for _ in range(samples):
        best = -np.inf
        arg = 0
        for k in range(K):
            th = means[k] + sds[k] * gen.standard_normal()
            if th > best:
                best = th
                arg = k
        counts[arg] += 1
    return counts


@njit(nogil=True, cache=True)
def run_rounds(
    gen,
    A,
    B,
    thr_A,
    thr_B,
    bernoulli,
    counts1,
    sums1,
    counts2,
    sums2,
    first_round,
    last_round,
    record_rounds,
    rec_counts1,
    rec_sums1,
    rec_counts2,
    rec_sums2,
    max_abs1,
    max_abs2,
):
    """Advance both players from ``first_round`` to ``last_round`` inclusive.

    ``counts``/``sums`` are updated in place.  After every round listed in
    ``record_rounds`` (sorted, 1-based) the statistics are copied into the
    next row of the ``rec_*`` buffers.  ``max_abs*`` track the running maximum
    of each posterior mean's magnitude.  Returns the number of rows written.
    """
    I = counts1.shape[0]
    J = counts2.shape[0]
    mean1 = np.empty(I)
    sd1 = np.empty(I)
    mean2 = np.empty(J)
    sd2 = np.empty(J)
    for k in range(I):
        mean1[k] = sums1[k] / (counts1[k] + 1.0)
        sd1[k] = 1.0 / np.sqrt(counts1[k] + 1.0)
        max_abs1[k] = max(max_abs1[k], abs(mean1[k]))
    for k in range(J):
        mean2[k] = sums2[k] / (counts2[k] + 1.0)
        sd2[k] = 1.0 / np.sqrt(counts2[k] + 1.0)
        max_abs2[k] = max(max_abs2[k], abs(mean2[k]))

    n_rec = record_rounds.shape[0]
    ptr = 0
    while ptr < n_rec and record_rounds[ptr] < first_round:
        ptr += 1
    written = 0

    for n in range(first_round, last_round + 1):
        best = -np.inf
        i = 0
        for k in range(I):
            th = mean1[k] + sd1[k] * gen.standard_normal()
            if th > best:
                best = th
                i = k
        best = -np.inf
        j = 0
        for k in range(J):
            th = mean2[k] + sd2[k] * gen.standard_normal()
            if th > best:
                best = th
                j = k
        za = gen.standard_normal()
        zb = gen.standard_normal()
        if bernoulli:
            a = 1.0 if za < thr_A[i, j] else 0.0
            b = 1.0 if zb < thr_B[i, j] else 0.0
        else:
            a = A[i, j] + za
            b = B[i, j] + zb

        counts1[i] += 1
        sums1[i] += a
        mean1[i] = sums1[i] / (counts1[i] + 1.0)
        sd1[i] = 1.0 / np.sqrt(counts1[i] + 1.0)
        if abs(mean1[i]) > max_abs1[i]:
            max_abs1[i] = abs(mean1[i])
        counts2[j] += 1
        sums2[j] += b
        mean2[j] = sums2[j] / (counts2[j] + 1.0)
        sd2[j] = 1.0 / np.sqrt(counts2[j] + 1.0)
        if abs(mean2[j]) > max_abs2[j]:
            max_abs2[j] = abs(mean2[j])

        if ptr < n_rec and record_rounds[ptr] == n:
            for k in range(I):
                rec_counts1[written, k] = counts1[k]
                rec_sums1[written, k] = sums1[k]
            for k in range(J):
                rec_counts2[written, k] = counts2[k]
                rec_sums2[written, k] = sums2[k]
            written += 1
            ptr += 1
    return written
