"""Special-function and quadrature kernels used by the channel model and receivers.

All operations are pure functions; metric-facing quantities are computed in the
natural-log domain so that photon-count powers never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp


class IntegrationError(ArithmeticError):
    """Raised when a quadrature evaluation hits a non-finite integrand."""

    def __init__(self, message, abscissa=None):
        super().__init__(message)
        self.abscissa = abscissa


def log_gamma(x):
    """Natural log of the Gamma function for x > 0 (scalar or array)."""
    if np.isscalar(x):
        if x <= 0:
            raise ValueError(f"log_gamma requires x > 0, got {x}")
        return math.lgamma(x)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("log_gamma requires x > 0")
    return sp.gammaln(x)


def poisson_log_pmf(r, lam):
    """Log PMF of a Poisson count: r*ln(lam) - lam - ln(r!).

    lam == 0 is the degenerate distribution at zero: log-probability 0 for
    r == 0 and -inf for r > 0.
    """
    if r < 0 or int(r) != r:
        raise ValueError(f"count must be a nonnegative integer, got {r}")
    if lam < 0:
        raise ValueError(f"mean count must be nonnegative, got {lam}")
    r = int(r)
    if lam == 0.0:
        return 0.0 if r == 0 else -math.inf
    return r * math.log(lam) - lam - math.lgamma(r + 1)


def poisson_cdf(k, lam):
    """P(X <= k) for X ~ Poisson(lam), via the regularized incomplete gamma.

    Stable for lam up to ~1e4 and beyond; accepts scalars or arrays in k.
    """
    scalar = np.isscalar(k) and np.isscalar(lam)
    k = np.asarray(k, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(k < 0) or np.any(lam < 0):
        raise ValueError("poisson_cdf requires k >= 0 and lam >= 0")
    out = sp.gammaincc(np.floor(k) + 1.0, lam)
    return float(out) if scalar else out


def poisson_sf(k, lam):
    """P(X > k) for X ~ Poisson(lam); exact complement of :func:`poisson_cdf`."""
    scalar = np.isscalar(k) and np.isscalar(lam)
    k = np.asarray(k, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(k < 0) or np.any(lam < 0):
        raise ValueError("poisson_sf requires k >= 0 and lam >= 0")
    out = sp.gammainc(np.floor(k) + 1.0, lam)
    return float(out) if scalar else out


def _log_cosh(y):
    # log(cosh(y)) without overflow: |y| - ln 2 + log1p(exp(-2|y|))
    y = np.abs(y)
    return y - math.log(2.0) + np.log1p(np.exp(-2.0 * y))


def _bessel_k_grid(nu, x_max_decay):
    """Panelled Gauss-Legendre nodes covering the K_nu integrand support."""
    # Peak of -x*cosh(t) + log cosh(nu*t) sits at t=0 for nu <= x and near
    # asinh(nu/x) otherwise; carry the grid until the integrand has dropped
    # by ~e^-60 relative to its peak.
    t_hi = x_max_decay
    n_panels = max(6, int(math.ceil(t_hi / 0.5)))
    edges = np.linspace(0.0, t_hi, n_panels + 1)
    base_x, base_w = np.polynomial.legendre.leggauss(32)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    nodes = (mid[:, None] + half[:, None] * base_x[None, :]).ravel()
    weights = (half[:, None] * base_w[None, :]).ravel()
    return nodes, weights


def _log_bessel_k_batch(nu, x):
    """Shared-grid evaluation for arguments of comparable magnitude."""
    x_min = float(np.min(x))
    # Upper truncation: walk out from the peak until the log-integrand for the
    # smallest x (the slowest-decaying case) has fallen 60 nats below its peak.
    t_peak = math.asinh(nu / x_min) if nu > x_min else 0.0
    g = lambda t: -x_min * math.cosh(t) + float(_log_cosh(nu * t))
    g_max = g(t_peak)
    t_hi = t_peak + 1.0
    while g(t_hi) > g_max - 60.0:
        t_hi += 0.5
    nodes, weights = _bessel_k_grid(nu, t_hi)

    # log integrand, shape (len(x), len(nodes))
    log_f = -np.outer(x, np.cosh(nodes)) + _log_cosh(nu * nodes)[None, :]
    shift = np.max(log_f, axis=1)
    vals = shift + np.log(np.exp(log_f - shift[:, None]) @ weights)
    return vals


def log_bessel_k(nu, x):
    """ln K_nu(x) for x > 0 via log-domain quadrature of the cosh representation.

    Accepts a scalar order and scalar or array argument; even in the order.
    Accurate to better than 1e-8 relative for nu in [0, 40], x in [1e-6, 100].
    Arrays are processed in magnitude groups so a few tiny arguments do not
    force an oversized grid onto the whole batch.
    """
    nu = abs(float(nu))
    scalar = np.isscalar(x)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0):
        raise ValueError("bessel_k requires x > 0")
    if x.size == 1:
        vals = _log_bessel_k_batch(nu, x)
        return float(vals[0]) if scalar else vals

    order = np.argsort(x)
    xs = x[order]
    out = np.empty_like(xs)
    lo = 0
    while lo < xs.size:
        hi = int(np.searchsorted(xs, xs[lo] * 10.0, side="right"))
        hi = max(hi, lo + 1)
        out[lo:hi] = _log_bessel_k_batch(nu, xs[lo:hi])
        lo = hi
    result = np.empty_like(out)
    result[order] = out
    return result


def bessel_k(nu, x):
    """Modified Bessel function of the second kind, K_nu(x), for x > 0."""
    return np.exp(log_bessel_k(nu, x))


@dataclass(frozen=True)
class QuadratureRule:
    """Affine-mapped quadrature rule: nodes, positive weights, and the interval."""

    nodes: tuple
    weights: tuple
    domain: tuple

    def __post_init__(self):
        if any(w <= 0 for w in self.weights):
            raise ValueError("quadrature weights must be positive")
        lo, hi = self.domain
        span = hi - lo
        if span <= 0:
            raise ValueError("quadrature domain must have positive length")
        total = math.fsum(self.weights)
        if abs(total - span) > 1e-12 * abs(span):
            raise ValueError(
                f"weights sum to {total}, expected interval length {span}"
            )


def gauss_legendre(n, lo, hi):
    """Gauss-Legendre rule with n nodes mapped onto [lo, hi]."""
    base_x, base_w = np.polynomial.legendre.leggauss(n)
    half = (hi - lo) / 2.0
    mid = (hi + lo) / 2.0
    return QuadratureRule(
        nodes=tuple(mid + half * base_x),
        weights=tuple(half * base_w),
        domain=(lo, hi),
    )


def integrate(f, rule):
    """Apply a quadrature rule to f; non-finite values of f are an error."""
    total = 0.0
    for xi, wi in zip(rule.nodes, rule.weights):
        fx = f(xi)
        if not math.isfinite(fx):
            raise IntegrationError(
                f"integrand returned {fx} at x={xi}", abscissa=xi
            )
        total += wi * fx
    return total


def integrate_adaptive(f, lo, hi, rel_tol=1e-10, max_depth=28):
    """Adaptive bisection quadrature on [lo, hi].

    Each interval is accepted when one more bisection changes its value by
    less than rel_tol (relative to the running whole-interval scale) or the
    depth cap is reached.
    """
    base_x, base_w = np.polynomial.legendre.leggauss(21)

    def panel(a, b):
        half = (b - a) / 2.0
        mid = (b + a) / 2.0
        total = 0.0
        for xi, wi in zip(base_x, base_w):
            x = mid + half * xi
            fx = f(x)
            if not math.isfinite(fx):
                raise IntegrationError(
                    f"integrand returned {fx} at x={x}", abscissa=x
                )
            total += wi * fx
        return half * total

    scale = abs(panel(lo, hi)) + 1e-300

    def recurse(a, b, coarse, depth):
        mid = (a + b) / 2.0
        left = panel(a, mid)
        right = panel(mid, b)
        fine = left + right
        if depth >= max_depth or abs(fine - coarse) <= rel_tol * max(scale, abs(fine)):
            return fine
        return recurse(a, mid, left, depth + 1) + recurse(mid, b, right, depth + 1)

    return recurse(lo, hi, panel(lo, hi), 0)


def log_sum_exp(log_terms, weights=None):
    """log(sum(w * exp(log_terms))) with max-shifting; -inf-safe."""
    log_terms = np.asarray(log_terms, dtype=float)
    shift = np.max(log_terms)
    if not np.isfinite(shift):
        return -math.inf
    terms = np.exp(log_terms - shift)
    if weights is not None:
        terms = terms * np.asarray(weights, dtype=float)
    return float(shift + math.log(terms.sum()))


def xlogy(x, y):
    """x * log(y) with the x == 0 limit defined as 0."""
    if x == 0.0:
        return 0.0
    return x * math.log(y)
