"""Channel gain model: Gamma-Gamma turbulence times a bounded pointing-error factor.

The combined gain is normalized so its mean is exactly one; path loss is folded
into the turbulence factor (equivalent to a unit path-loss convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import log_bessel_k, log_gamma

# Measured parameter presets used throughout the experiments.
TURBULENCE_PRESETS = {
    "weak": (17.13, 16.04),
    "strong": (2.23, 1.54),
}
POINTING_PRESET = (0.0198, 2.8071)  # (a0, gamma_sq)


@dataclass(frozen=True)
class ChannelParams:
    """Gamma-Gamma shapes plus optional pointing-error constants.

    alpha, beta are the large/small-scale eddy shape parameters. a0 and
    gamma_sq describe the pointing factor's bounded-support pdf
    gamma_sq * h**(gamma_sq - 1) / a0**gamma_sq on (0, a0]; both None disables
    pointing. With normalize_mean the sampled gain has unit mean exactly.
    """

    alpha: float
    beta: float
    a0: float | None = None
    gamma_sq: float | None = None
    normalize_mean: bool = True

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("turbulence shapes must be positive")
        if (self.a0 is None) != (self.gamma_sq is None):
            raise ValueError("a0 and gamma_sq must be supplied together")
        if self.a0 is not None and (self.a0 <= 0 or self.gamma_sq <= 0):
            raise ValueError("pointing parameters must be positive")

    @property
    def has_pointing(self):
        return self.a0 is not None

    @property
    def pointing_mean(self):
        """E[h_p] = a0 * gamma_sq / (gamma_sq + 1); 1.0 when pointing is off."""
        if not self.has_pointing:
            return 1.0
        return self.a0 * self.gamma_sq / (self.gamma_sq + 1.0)

    @property
    def pointing_upper(self):
        """Upper support limit of the (optionally normalized) pointing factor."""
        if not self.has_pointing:
            return 1.0
        if self.normalize_mean:
            return (self.gamma_sq + 1.0) / self.gamma_sq
        return self.a0

    @classmethod
    def preset(cls, name, pointing=True, normalize_mean=True):
        """Named turbulence presets ("weak", "strong"), optionally with pointing."""
        try:
            alpha, beta = TURBULENCE_PRESETS[name]
        except KeyError:
            raise KeyError(
                f"unknown turbulence preset {name!r}; choose from "
                f"{sorted(TURBULENCE_PRESETS)}"
            ) from None
        if pointing:
            a0, gamma_sq = POINTING_PRESET
            return cls(alpha, beta, a0, gamma_sq, normalize_mean)
        return cls(alpha, beta, normalize_mean=normalize_mean)


@dataclass(frozen=True)
class ChannelSample:
    """One draw of the channel gain and its two factors."""

    h: float
    h_a: float
    h_p: float


def scintillation_index(alpha, beta):
    """Normalized variance of the turbulence factor: 1/a + 1/b + 1/(a*b)."""
    if alpha <= 0 or beta <= 0:
        raise ValueError("shape parameters must be positive")
    return 1.0 / alpha + 1.0 / beta + 1.0 / (alpha * beta)


def sample_gamma_gamma(params, rng, size=None):
    """Draw the turbulence factor as a product of two unit-mean gamma variates."""
    big = rng.gamma(params.alpha, 1.0 / params.alpha, size=size)
    small = rng.gamma(params.beta, 1.0 / params.beta, size=size)
    return big * small


def sample_pointing(params, rng, size=None):
    """Inverse-CDF draw of the raw pointing factor on (0, a0]."""
    if not params.has_pointing:
        raise ValueError("channel has no pointing-error model")
    u = 1.0 - rng.random(size=size)  # uniform on (0, 1]
    return params.a0 * u ** (1.0 / params.gamma_sq)


def sample_channel_gain(params, rng, size=None):
    """Draw the combined gain; unit mean when params.normalize_mean is set."""
    h_a = sample_gamma_gamma(params, rng, size=size)
    if params.has_pointing:
        h_p = sample_pointing(params, rng, size=size)
        h = h_a * h_p
        if params.normalize_mean:
            h = h / params.pointing_mean
    else:
        h_p = np.ones_like(np.asarray(h_a)) if size is not None else 1.0
        h = h_a
    return ChannelSample(h=h, h_a=h_a, h_p=h_p)


def log_pdf_gamma_gamma(params, v):
    """Log-pdf of the unit-mean Gamma-Gamma turbulence factor (vectorized)."""
    v = np.asarray(v, dtype=float)
    a, b = params.alpha, params.beta
    const = (
        math.log(2.0)
        + 0.5 * (a + b) * math.log(a * b)
        - log_gamma(a)
        - log_gamma(b)
    )
    out = np.full(v.shape, -np.inf)
    pos = v > 0
    if np.any(pos):
        vp = v[pos]
        out[pos] = (
            const
            + (0.5 * (a + b) - 1.0) * np.log(vp)
            + log_bessel_k(a - b, 2.0 * np.sqrt(a * b * vp))
        )
    return out


# Log-spaced panels for integrating over the pointing factor's CDF; the mass
# of the pointing distribution below u = 1e-12 is itself 1e-12.
_U_LOG_LO = math.log(1e-12)


def _pointing_cdf_grid(n_panels=40, n_nodes=12):
    base_x, base_w = np.polynomial.legendre.leggauss(n_nodes)
    edges = np.linspace(_U_LOG_LO, 0.0, n_panels + 1)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    s = (mid[:, None] + half[:, None] * base_x[None, :]).ravel()
    w = (half[:, None] * base_w[None, :]).ravel()
    return s, w


def log_pdf_h(params, h):
    """Log-density of the combined gain h (vectorized over h).

    With pointing, integrates (1/a) p_turb(a) p_point(h/a) over a > h/A by
    quadrature over the pointing factor's probability scale, which is exact
    for the bounded-support factor and keeps all nodes inside the support.
    """
    h = np.asarray(h, dtype=float)
    if not params.has_pointing:
        return log_pdf_gamma_gamma(params, h)

    s, w = _pointing_cdf_grid()
    u = np.exp(s)
    x = params.pointing_upper * u ** (1.0 / params.gamma_sq)

    out = np.full(h.shape, -np.inf)
    pos = h > 0
    if np.any(pos):
        hp = h[pos]
        v = hp[:, None] / x[None, :]
        log_terms = (
            log_pdf_gamma_gamma(params, v.ravel()).reshape(v.shape)
            - np.log(x)[None, :]
            + s[None, :]  # du = u ds on the log grid
        )
        shift = np.max(log_terms, axis=1)
        vals = shift + np.log(np.exp(log_terms - shift[:, None]) @ w)
        out[pos] = np.where(np.isfinite(shift), vals, -np.inf)
    return out


def pdf_h(params, h):
    """Density of the combined gain; zero for h <= 0."""
    scalar = np.isscalar(h)
    out = np.exp(log_pdf_h(params, np.atleast_1d(np.asarray(h, dtype=float))))
    return float(out[0]) if scalar else out.reshape(np.shape(h))
