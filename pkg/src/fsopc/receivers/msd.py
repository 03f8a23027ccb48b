"""Sorting-based block decoder for the marginalized and known-background
sequence metrics.

The block metric depends on a labelling only through (n_on, r_on), and the
candidate worth checking for each n_on takes the n_on largest counts, so the
search over 2**L labellings reduces to L+1 metric evaluations on the sorted
counts plus the reverse index mapping.
"""

from __future__ import annotations

import numpy as np

from .metrics import WindowStats, gmlsd_log_metric, mlsd_log_metric


def msd_block_decode(counts, metric):
    """Decode one block: pick n_on maximizing metric(n_on, sum of n_on largest).

    metric is a callable (n_on, g_on) -> float. Ties resolve toward the
    smaller n_on; equal counts keep their original order in the sorting.
    """
    counts = np.asarray(counts)
    length = counts.size
    if length < 1:
        raise ValueError("block must contain at least one slot")
    order = np.argsort(-counts, kind="stable")
    prefix = np.concatenate(([0], np.cumsum(counts[order])))
    best_n = 0
    best_val = metric(0, 0.0)
    for n_on in range(1, length + 1):
        val = metric(n_on, float(prefix[n_on]))
        if val > best_val:
            best_val = val
            best_n = n_on
    bits = np.zeros(length, dtype=np.int64)
    bits[order[:best_n]] = 1
    return bits


def gmlsd_block_metric(length, n_b):
    """Block metric for the known-background receiver over length-L windows."""

    def metric(n_on, g_on):
        return gmlsd_log_metric(
            WindowStats(n_on, g_on, length - n_on, 0.0), n_b
        )

    return metric


def mlsd_block_metric(length, n_s, n_b, density=None):
    """Block metric of the fading-marginalized receiver (quadrature-based)."""

    def metric(n_on, g_on):
        return mlsd_log_metric(
            WindowStats(n_on, g_on, length - n_on, 0.0),
            length,
            n_s,
            n_b,
            density,
        )

    return metric
