"""Reverse waterfilling over a spectral density on (0, 1].

A water level theta splits the density into a flooded part (counted toward
distortion) and the part above water (counted toward rate):

    distortion(theta) = integral_0^1 min{theta, density(phi)} dphi
    rate(theta)       = 1/2 integral_0^1 log2+[density(phi) / theta] dphi

Rates are in bits per sample throughout; distortions carry the density's
units (sigma2/fs for the analytic densities).  ``solve_theta_for_rate``
inverts the strictly monotone rate map by bisection on log theta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import QuadratureError, integrate_unit
from .spectral import SpectralDensity

__all__ = [
    "WaterfillPoint",
    "BracketExpansionError",
    "distortion_at_theta",
    "rate_at_theta",
    "solve_theta_for_rate",
    "integrate_density",
    "integrate_on_unit",
]

#: every waterfilling integral must come back with an error estimate below this
ERROR_BOUND = 1e-9

#: relative tolerance of the theta bisection
THETA_RTOL = 1e-12


class BracketExpansionError(RuntimeError):
    """The theta bracket failed to straddle the target rate (pathological density)."""


@dataclass(frozen=True)
class WaterfillPoint:
    """A consistent (theta, rate, distortion) triple on one parametric curve."""

    theta: float
    rate: float
    distortion: float


def _checked(value_err, what: str) -> float:
    value, err = value_err
    if err > ERROR_BOUND:
        raise QuadratureError(f"{what} integral exceeded the error budget", err)
    return value


def integrate_on_unit(f, *, breakpoints=(), graded: bool = True,
                      tol: float = 1e-11, what: str = "density") -> float:
    """Integrate a vectorized function of phi over (0, 1] with the shared engine."""
    return _checked(
        integrate_unit(f, graded=graded, tol=tol, breakpoints=breakpoints), what)


def distortion_at_theta(density: SpectralDensity, theta: float, *,
                        graded: bool = True) -> float:
    """integral of min{theta, density} over (0, 1]; lies in (0, theta]."""
    if not theta > 0:
        raise ValueError("theta must be > 0")
    if theta <= density.floor:
        # the water level sits below the whole density, min saturates at theta
        return float(theta)
    cross = density.crossing(theta)
    bps = () if cross is None else (cross,)
    f = lambda phi: np.minimum(theta, density(phi))
    return _checked(integrate_unit(f, graded=graded, breakpoints=bps),
                    "distortion")


def rate_at_theta(density: SpectralDensity, theta: float, *,
                  graded: bool = True) -> float:
    """(1/2) integral of log2+[density / theta]; bits per sample.

    Finite for every theta > 0 (the log divergence at phi -> 0 is
    integrable) and strictly positive for the analytic densities, which are
    unbounded near 0.
    """
    if not theta > 0:
        raise ValueError("theta must be > 0")
    cross = density.crossing(theta)
    if cross is not None:
        upper = cross
    elif theta <= density.floor:
        upper = 1.0  # water below the whole density, log+ positive a.e.
    else:
        return 0.0   # fully submerged (constant stub only)
    f = lambda phi: 0.5 * np.log2(density(phi) / theta)
    return _checked(integrate_unit(f, upper=upper, graded=graded), "rate")


def solve_theta_for_rate(density: SpectralDensity, rate_bits_per_sample: float,
                         *, graded: bool = True) -> WaterfillPoint:
    """Invert the rate map: find theta with rate_at_theta(theta) == rate.

    Bisection on log theta, seeded by the small-theta asymptote
    rate ~ -1/2 log2 theta: initial bracket [2**(-2r-8), 2**(-2r+8)],
    expanded geometrically (up to 200 doublings per side) until it
    straddles.  Converges to relative tolerance 1e-12 in theta.
    """
    r = float(rate_bits_per_sample)
    if not r > 0:
        raise ValueError("rate must be > 0")

    def gap(th):
        return rate_at_theta(density, th, graded=graded) - r

    lo = 2.0 ** (-2.0 * r - 8.0)
    hi = 2.0 ** (-2.0 * r + 8.0)
    g_lo = gap(lo)
    for _ in range(200):
        if g_lo > 0:
            break
        hi, lo = lo, lo * 0.5
        g_lo = gap(lo)
    else:
        raise BracketExpansionError(
            "rate not bracketed from below after 200 doublings")
    g_hi = gap(hi)
    for _ in range(200):
        if g_hi < 0:
            break
        lo, hi = hi, hi * 2.0
        g_hi = gap(hi)
    else:
        raise BracketExpansionError(
            "rate not bracketed from above after 200 doublings")

    for _ in range(200):
        if hi - lo <= THETA_RTOL * lo:
            break
        mid = np.sqrt(lo * hi)
        if not lo < mid < hi:
            break  # bracket exhausted floating-point resolution
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    theta = float(np.sqrt(lo * hi))
    return WaterfillPoint(theta=theta,
                          rate=rate_at_theta(density, theta, graded=graded),
                          distortion=distortion_at_theta(density, theta,
                                                         graded=graded))


def integrate_density(density: SpectralDensity, transform: str = "identity",
                      *, theta: float = None, graded: bool = True) -> float:
    """Integrate a transform of the density over (0, 1].

    transform:
        ``identity``             density itself (diverges for the analytic kinds,
                                 surfacing as a QuadratureError);
        ``reciprocal``           1 / density;
        ``reciprocal-weighted``  min{theta, density} / density (needs theta).
    """
    if transform == "identity":
        f = density
        bps = ()
    elif transform == "reciprocal":
        f = lambda phi: 1.0 / density(phi)
        bps = ()
    elif transform == "reciprocal-weighted":
        if theta is None or not theta > 0:
            raise ValueError("reciprocal-weighted transform needs theta > 0")
        f = lambda phi: np.minimum(theta, density(phi)) / density(phi)
        cross = density.crossing(theta)
        bps = () if cross is None else (cross,)
    else:
        raise ValueError(f"unknown transform {transform!r}")
    return _checked(integrate_unit(f, graded=graded, breakpoints=bps),
                    f"{transform} transform")
