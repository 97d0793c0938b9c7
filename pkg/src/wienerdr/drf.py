"""Distortion functions of the sampled Wiener process.

All curves live on one diagram.  With bitrate R (bits per unit time),
sampling rate fs and bits per sample rbar = R/fs:

* ``d_w``      distortion-rate function of the continuous process,
               2 sigma2 / (pi^2 ln2 R);
* ``d_bar``    distortion-rate function of the sample walk, waterfilled over
               the unshifted density (per-sample MSE, absolute units);
* ``mmse_fs``  sampling-only error floor sigma2 / (6 fs);
* ``d_opt``    the optimal sampled encoding: mmse_fs plus the waterfilled
               distortion of the shifted density;
* ``d_ce``     compress-the-samples-then-interpolate encoding;
* ``d_upper``  the cruder bound mmse_fs + d_bar.

The dimensionless sections (``d_tilde``, ``g_fun`` and the excess-distortion
ratios) depend on rbar alone; the absolute functions scale linearly in
sigma2 and reduce to the rbar forms, which is what makes a single
equilibrium point and a single penalty curve meaningful.

Two distinct water levels coexist: the shifted density's (d_opt) and the
unshifted density's (d_bar, d_ce).  ``DistortionBundle`` carries both so
they cannot be mixed up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectral import SAMPLED_WIENER, SHIFTED_SAMPLED_WIENER, ProcessParams
from .waterfill import (WaterfillPoint, integrate_density, integrate_on_unit,
                        solve_theta_for_rate)

__all__ = [
    "RateSpec",
    "DistortionBundle",
    "MIN_RBAR",
    "d_w",
    "d_bar",
    "mmse_fs",
    "d_opt",
    "d_tilde",
    "equilibrium_rbar",
    "g_fun",
    "d_ce",
    "d_ce_assembled",
    "d_upper",
    "ratio_smp",
    "ratio_qnt",
    "ce_penalty",
    "dr_asym_coeffs",
    "bundle",
]

#: below this many bits per sample the distortion integrals blow up
MIN_RBAR = 1e-4

_ORDERING_SLACK = 1e-9


@dataclass(frozen=True)
class RateSpec:
    """Bitrate in bits per unit time (> 0)."""

    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be positive and finite, got {self.rate}")

    def per_sample(self, params: ProcessParams) -> float:
        """Bits per sample rbar = rate / fs."""
        return self.rate / params.fs


@dataclass(frozen=True)
class DistortionBundle:
    """All distortion curves at one (params, rate) point, plus both water levels.

    Distortions are per unit time (units of sigma2); thetas are in units of
    sigma2/fs.  Construction enforces the ordering
    max{mmse, d_w} <= d_opt <= d_ce <= d_upper and d_bar <= d_w up to a
    1e-9 slack; a violation indicates a quadrature failure.
    """

    d_opt: float
    d_ce: float
    d_upper: float
    d_w: float
    d_bar: float
    mmse: float
    theta_opt: float
    theta_ce: float

    def __post_init__(self):
        slack = _ORDERING_SLACK * max(1.0, abs(self.d_upper))
        ordered = (max(self.mmse, self.d_w) - slack <= self.d_opt
                   <= self.d_ce + slack <= self.d_upper + 2 * slack)
        if not (ordered and self.d_bar <= self.d_w + slack):
            raise ValueError("distortion ordering violated; quadrature suspect")


def _check_rbar(rbar: float) -> float:
    rbar = float(rbar)
    if not rbar >= MIN_RBAR:
        raise ValueError(f"bits per sample must be >= {MIN_RBAR}, got {rbar}")
    return rbar


@lru_cache(maxsize=65536)
def _shifted_point(rbar: float) -> WaterfillPoint:
    return solve_theta_for_rate(SHIFTED_SAMPLED_WIENER, rbar)


@lru_cache(maxsize=65536)
def _sampled_point(rbar: float) -> WaterfillPoint:
    return solve_theta_for_rate(SAMPLED_WIENER, rbar)


def d_w(rate: RateSpec, sigma2: float) -> float:
    """DRF of the continuous Wiener process: 2 sigma2 / (pi^2 ln2 R)."""
    return 2.0 * sigma2 / (math.pi ** 2 * math.log(2.0) * rate.rate)


def mmse_fs(params: ProcessParams) -> float:
    """Interpolation error floor sigma2 / (6 fs)."""
    return params.sigma2 / (6.0 * params.fs)


def d_bar(params: ProcessParams, rate: RateSpec) -> float:
    """DRF of the sampled walk at rbar bits per sample, in absolute units.

    Equals (sigma2/fs) * 2**(-2 rbar) exactly for rbar >= 1, where the water
    level drops below the density floor 1/4.
    """
    rbar = _check_rbar(rate.per_sample(params))
    return (params.sigma2 / params.fs) * _sampled_point(rbar).distortion


def d_tilde(rbar: float) -> float:
    """Dimensionless lossy-compression distortion of the interpolator.

    Waterfilled over the shifted density; satisfies
    d_opt = (sigma2/fs) * (1/6 + d_tilde(rbar)).  For rbar beyond the border
    point (1 + log2(sqrt(3)+2))/2 it equals (2+sqrt(3))/6 * 2**(-2 rbar).
    """
    return _shifted_point(_check_rbar(rbar)).distortion


def d_opt(params: ProcessParams, rate: RateSpec) -> float:
    """Optimal distortion from rate-R encoded samples: mmse + shifted waterfill."""
    rbar = _check_rbar(rate.per_sample(params))
    return mmse_fs(params) + (params.sigma2 / params.fs) * d_tilde(rbar)


@lru_cache(maxsize=1)
def equilibrium_rbar() -> float:
    """Bits per sample at which sampling and compression errors are equal.

    Solves d_tilde(rbar) = 1/6 by bisection to 1e-10; lands near 0.98.
    """
    lo, hi = 0.5, 1.5
    f_lo = d_tilde(lo) - 1.0 / 6.0
    if not f_lo > 0:
        raise RuntimeError("equilibrium bracket lost its sign change")
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if d_tilde(mid) - 1.0 / 6.0 > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def g_fun(rbar: float) -> float:
    """Auxiliary integral of min{density, theta} / density on the unshifted curve.

    theta solves the unshifted rate equation at rbar; for rbar >= 1 the
    integral collapses to 2 * theta = 2**(1 - 2 rbar).
    """
    theta = _sampled_point(_check_rbar(rbar)).theta
    return integrate_density(SAMPLED_WIENER, "reciprocal-weighted", theta=theta)


@lru_cache(maxsize=65536)
def _ce_lossy_term(rbar: float) -> float:
    """Dimensionless CE compression term: min{theta, S} (S - 1/6) / S."""
    theta = _sampled_point(rbar).theta
    cross = SAMPLED_WIENER.crossing(theta)
    bps = () if cross is None else (cross,)

    def f(phi):
        s = SAMPLED_WIENER(phi)
        return np.minimum(theta, s) * (s - 1.0 / 6.0) / s

    return integrate_on_unit(f, breakpoints=bps, what="ce")


def d_ce(params: ProcessParams, rate: RateSpec) -> float:
    """Distortion of compress-the-samples-then-interpolate, in absolute units.

    mmse plus the weighted integral of min{theta, S} (S - 1/6)/S with theta
    solved on the unshifted density; reduces to
    mmse + (2/3)(sigma2/fs) 2**(-2 rbar) for rbar >= 1.
    """
    rbar = _check_rbar(rate.per_sample(params))
    return mmse_fs(params) + (params.sigma2 / params.fs) * _ce_lossy_term(rbar)


def d_ce_assembled(params: ProcessParams, rate: RateSpec) -> float:
    """Second route to d_ce: mmse + d_bar - (sigma2 / 6 fs) * g_fun.

    Algebraically identical to the direct integral; kept as an independent
    computation path for cross-checking.
    """
    rbar = _check_rbar(rate.per_sample(params))
    scale = params.sigma2 / params.fs
    return (mmse_fs(params) + scale * _sampled_point(rbar).distortion
            - (scale / 6.0) * g_fun(rbar))


def d_upper(params: ProcessParams, rate: RateSpec) -> float:
    """Upper bound mmse + d_bar; equals (sigma2/fs)(1/6 + 2**(-2 rbar)) for rbar >= 1."""
    return mmse_fs(params) + d_bar(params, rate)


def ratio_smp(rbar: float) -> float:
    """Excess distortion of sampling: d_opt / d_w at matching bits per sample."""
    rbar = _check_rbar(rbar)
    return (math.pi ** 2 * math.log(2.0) / 2.0) * rbar * (1.0 / 6.0 + d_tilde(rbar))


def ratio_qnt(rbar: float) -> float:
    """Excess distortion of lossy compression: d_opt / mmse_fs = 1 + 6 d_tilde."""
    return 1.0 + 6.0 * d_tilde(_check_rbar(rbar))


def ce_penalty(rbar: float) -> float:
    """Penalty of compress-first encoding: d_ce / d_opt (fs-free)."""
    rbar = _check_rbar(rbar)
    return (1.0 / 6.0 + _ce_lossy_term(rbar)) / (1.0 / 6.0 + d_tilde(rbar))


def dr_asym_coeffs(order: str) -> dict:
    """Reported series coefficients of the high-sampling-rate expansions.

    ``first`` returns the leading R**-1 coefficient (shared by d_bar and
    d_opt); ``second`` the R/fs**2 coefficients, keyed by curve.  These are
    catalog values for the validation routines that compare them against
    numerically evaluated differences.
    """
    if order == "first":
        lead = 2.0 / (math.pi ** 2 * math.log(2.0))
        return {"d_bar": lead, "d_opt": lead}
    if order == "second":
        return {"d_bar": math.log(2.0) / 12.0, "d_opt": math.log(2.0) / 18.0}
    raise ValueError(f"order must be 'first' or 'second', got {order!r}")


def bundle(params: ProcessParams, rate: RateSpec) -> DistortionBundle:
    """All six distortion values plus both water levels, computed once."""
    rbar = _check_rbar(rate.per_sample(params))
    scale = params.sigma2 / params.fs
    shifted = _shifted_point(rbar)
    sampled = _sampled_point(rbar)
    mmse = mmse_fs(params)
    return DistortionBundle(
        d_opt=mmse + scale * shifted.distortion,
        d_ce=mmse + scale * _ce_lossy_term(rbar),
        d_upper=mmse + scale * sampled.distortion,
        d_w=d_w(rate, params.sigma2),
        d_bar=scale * sampled.distortion,
        mmse=mmse,
        theta_opt=shifted.theta,
        theta_ce=sampled.theta,
    )
