"""Threshold rule of the genie receiver that knows the true count parameters."""

from __future__ import annotations

import math


def ideal_threshold(n_r, n_b):
    """Optimal count threshold n_r / ln(1 + n_r/n_b) for the mark decision.

    Limits: n_r -> 0 gives n_b; n_b == 0 gives 0.0, which under the strict
    comparison of :func:`ideal_decide` is the "any photon means mark" rule.
    """
    if n_r < 0 or n_b < 0:
        raise ValueError("count parameters must be nonnegative")
    if n_b == 0.0:
        return 0.0
    if n_r == 0.0:
        return n_b
    return n_r / math.log1p(n_r / n_b)


def ideal_decide(count, threshold):
    """Mark iff the count strictly exceeds the threshold."""
    return 1 if count > threshold else 0
