"""Decision metrics shared by the sequence and symbol-by-symbol receivers.

All metrics are log-domain scalars evaluated from window statistics; the
x*log(x) limit at zero counts is defined as 0 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..numerics import log_sum_exp, xlogy
from .ideal import ideal_threshold


@dataclass(frozen=True)
class WindowStats:
    """Sufficient statistics of a hypothesized window.

    n_on / n_off count the slots labelled mark / space, r_on / r_off are the
    summed photon counts over those slots.
    """

    n_on: int
    r_on: float
    n_off: int
    r_off: float

    def __post_init__(self):
        if min(self.n_on, self.r_on, self.n_off, self.r_off) < 0:
            raise ValueError("window statistics must be nonnegative")
        if self.n_on == 0 and self.r_on != 0:
            raise ValueError("r_on must be 0 when no slots are labelled mark")
        if self.n_off == 0 and self.r_off != 0:
            raise ValueError("r_off must be 0 when no slots are labelled space")

    def combined(self, other):
        return WindowStats(
            self.n_on + other.n_on,
            self.r_on + other.r_on,
            self.n_off + other.n_off,
            self.r_off + other.r_off,
        )


def glrt_metric(stats):
    """Log metric of the background-agnostic sequence receiver:
    r_off*ln(r_off/n_off) + r_on*ln(r_on/n_on)."""
    if stats.n_on < 1 or stats.n_off < 1:
        raise ValueError("metric needs at least one slot of each class")
    return xlogy(stats.r_off, stats.r_off / stats.n_off) + xlogy(
        stats.r_on, stats.r_on / stats.n_on
    )


def glrt_nr_nb_estimates(stats):
    """Joint count-parameter estimates implied by a window labelling.

    nb_hat is the space-slot average; nr_hat is the mark/space average gap and
    may come out negative, which is reported as-is.
    """
    if stats.n_on < 1 or stats.n_off < 1:
        raise ValueError("estimates need at least one slot of each class")
    nb_hat = stats.r_off / stats.n_off
    nr_hat = stats.r_on / stats.n_on - nb_hat
    return nr_hat, nb_hat


def gmlsd_log_metric(stats, n_b):
    """Log metric of the known-background sequence receiver:
    r_on*ln(r_on/(n_on*n_b)) - r_on + n_b*n_on."""
    if n_b <= 0:
        raise ValueError("background mean must be positive")
    if stats.n_on == 0:
        return 0.0
    return (
        xlogy(stats.r_on, stats.r_on / (stats.n_on * n_b))
        - stats.r_on
        + n_b * stats.n_on
    )


def glrt_dfb_psi(stats, count):
    """Metric difference of the two one-symbol extensions for the
    background-agnostic feedback receiver; decide mark iff positive.

    Each x*ln(...) term with a zero prefactor takes its limit value 0.
    """
    r = count
    n_on, r_on = stats.n_on, stats.r_on
    n_off, r_off = stats.n_off, stats.r_off
    if r > 0:
        term_new = r * math.log(
            (n_off + 1) / (r_off + r) * (r_on + r) / (n_on + 1)
        )
    else:
        term_new = 0.0
    if r_on > 0:
        term_on = r_on * math.log((n_on + 1) / (r_on + r) * r_on / n_on)
    else:
        term_on = 0.0
    if r_off > 0:
        term_off = r_off * math.log((r_off + r) / (n_off + 1) * n_off / r_off)
    else:
        term_off = 0.0
    return term_new - term_on - term_off


def gmlsd_dfb_psi0(r_on, n_on, count, n_b):
    """Extension-metric difference for the known-background feedback receiver."""
    if n_b <= 0:
        raise ValueError("background mean must be positive")
    r = count
    return (
        xlogy(r_on + r, (r_on + r) / ((n_on + 1) * n_b))
        - xlogy(r_on, r_on / (n_on * n_b))
        - r
        + n_b
    )


def asymptotic_decide(nr_hat, nb_hat, count):
    """Plug-in threshold rule: mark iff count exceeds the ideal-receiver
    threshold evaluated at the estimated parameters."""
    if nr_hat <= 0 or nb_hat <= 0:
        raise ValueError("plug-in rule needs positive estimates")
    return 1 if count > ideal_threshold(nr_hat, nb_hat) else 0


def mlsd_log_metric(stats, length, n_s, n_b, density=None):
    """Log of the fading-marginalized sequence likelihood.

    Integrates (h*n_s/n_b + 1)**r_on * exp(-(n_s*n_on*h + n_b*L)) against the
    gain density by quadrature, shifted in the log domain. density exposes
    `nodes` and `log_mass`; None is the degenerate unit-gain hook with the
    closed form r_on*ln(n_s/n_b + 1) - n_s*n_on - n_b*L.
    """
    if n_b <= 0:
        raise ValueError("background mean must be positive")
    if density is None:
        return (
            stats.r_on * math.log1p(n_s / n_b)
            - n_s * stats.n_on
            - n_b * length
        )
    import numpy as np

    h = np.asarray(density.nodes, dtype=float)
    log_terms = (
        np.asarray(density.log_mass, dtype=float)
        + stats.r_on * np.log1p(h * (n_s / n_b))
        - n_s * stats.n_on * h
    )
    return log_sum_exp(log_terms) - n_b * length
