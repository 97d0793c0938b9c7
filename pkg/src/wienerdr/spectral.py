"""Spectral densities and Karhunen-Loeve eigensystems of the sampled Wiener model.

A Wiener process of intensity sigma2, sampled at rate fs, yields a Gaussian
random walk whose covariance matrix is (sigma2/fs) * min{i, j}.  Its KL
eigenvalue staircase converges to the density

    S(phi) = 1 / (4 sin^2(pi phi / 2)),   phi in (0, 1],

while the piecewise-linear interpolator of the samples has the shifted
density S(phi) - 1/6.  This module provides both densities, closed-form
finite-rank eigensystems for the two covariance kernels (the discrete walk
and the interpolator kernel on [0, n/fs]), and brute-force eigensolver /
Nystrom oracles used to validate the closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "NumericalDegeneracyError",
    "ProcessParams",
    "SpectralDensity",
    "SAMPLED_WIENER",
    "SHIFTED_SAMPLED_WIENER",
    "constant_density",
    "s_bar",
    "s_tilde_density",
    "EigenSystem",
    "discrete_wiener_eigensystem",
    "interp_kernel_eigensystem",
    "interp_covariance",
    "nystrom_interp_eigenvalues",
    "fredholm_residual",
]


class NumericalDegeneracyError(RuntimeError):
    """An eigenvalue denominator fell below the safe magnitude."""


@dataclass(frozen=True)
class ProcessParams:
    """Wiener intensity sigma2 and uniform sampling rate fs (both > 0)."""

    sigma2: float
    fs: float

    def __post_init__(self):
        if not (self.sigma2 > 0 and np.isfinite(self.sigma2)):
            raise ValueError(f"sigma2 must be positive and finite, got {self.sigma2}")
        if not (self.fs > 0 and np.isfinite(self.fs)):
            raise ValueError(f"fs must be positive and finite, got {self.fs}")

    @property
    def ts(self) -> float:
        """Sampling interval 1/fs (derived, never stored)."""
        return 1.0 / self.fs


def _check_phi(phi):
    arr = np.asarray(phi, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr > 1.0):
        raise ValueError("phi must lie in (0, 1]")
    return arr


def s_bar(phi):
    """Eigenvalue density of the sampled Wiener walk: 1/(4 sin^2(pi phi/2)).

    Strictly decreasing on (0, 1] with infimum 1/4 at phi = 1; diverges like
    (pi phi / 2)**-2 / 4 as phi -> 0+.  Accepts scalars or arrays.
    """
    arr = _check_phi(phi)
    out = 1.0 / (4.0 * np.sin(0.5 * np.pi * arr) ** 2)
    return float(out) if np.isscalar(phi) or arr.ndim == 0 else out


def s_tilde_density(phi):
    """Shifted density s_bar(phi) - 1/6; infimum 1/12 at phi = 1."""
    arr = _check_phi(phi)
    out = 1.0 / (4.0 * np.sin(0.5 * np.pi * arr) ** 2) - 1.0 / 6.0
    return float(out) if np.isscalar(phi) or arr.ndim == 0 else out


@dataclass(frozen=True)
class SpectralDensity:
    """A named eigenvalue density on (0, 1], in units of sigma2/fs.

    kind is one of ``sampled-wiener``, ``shifted-sampled-wiener`` or
    ``constant`` (a test stub at ``level``).  The analytic kinds are strictly
    decreasing, so the water-level crossing has a closed form used by the
    quadrature to split panels at the min/log+ kink.
    """

    kind: str
    level: float = 0.0

    _KINDS = ("sampled-wiener", "shifted-sampled-wiener", "constant")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown density kind {self.kind!r}")
        if self.kind == "constant" and not self.level > 0:
            raise ValueError("constant density level must be > 0")

    def __call__(self, phi):
        if self.kind == "sampled-wiener":
            return s_bar(phi)
        if self.kind == "shifted-sampled-wiener":
            return s_tilde_density(phi)
        arr = _check_phi(phi)
        return self.level if arr.ndim == 0 else np.full_like(arr, self.level)

    @property
    def floor(self) -> float:
        """Infimum of the density over (0, 1]."""
        if self.kind == "sampled-wiener":
            return 0.25
        if self.kind == "shifted-sampled-wiener":
            return 1.0 / 12.0
        return self.level

    def crossing(self, theta: float) -> Optional[float]:
        """The phi in (0, 1) where the density equals theta, if any."""
        if self.kind == "constant":
            return None
        shift = 0.0 if self.kind == "sampled-wiener" else 1.0 / 6.0
        if theta <= self.floor:
            return None
        arg = 0.5 / np.sqrt(theta + shift)
        phi = (2.0 / np.pi) * np.arcsin(arg)
        return float(phi) if 0.0 < phi < 1.0 else None


SAMPLED_WIENER = SpectralDensity("sampled-wiener")
SHIFTED_SAMPLED_WIENER = SpectralDensity("shifted-sampled-wiener")


def constant_density(level: float) -> SpectralDensity:
    """Constant test-stub density."""
    return SpectralDensity("constant", level)


@dataclass(frozen=True)
class EigenSystem:
    """Finite-rank eigen-decomposition of a covariance kernel.

    ``eigenvalues`` are strictly positive and sorted decreasing.  For the
    discrete walk kernel, ``eigenvectors`` holds the unit-norm eigenvectors
    as rows (entry [k-1, m-1] pairs eigenvalue k with sample index m = 1..n).
    For the interpolator kernel, ``node_values`` holds the already-normalized
    eigenfunction values on the sampling grid t = m*ts, m = 0..n; the
    eigenfunctions are piecewise linear between those nodes.
    ``normalizers`` keeps the per-mode normalization constants (for the
    discrete kernel, n * normalizers**2 -> 2 as n grows, a useful
    diagnostic).
    """

    n: int
    eigenvalues: np.ndarray
    ts: float
    eigenvectors: Optional[np.ndarray] = None
    node_values: Optional[np.ndarray] = None
    normalizers: Optional[np.ndarray] = field(default=None, repr=False)

    def eigenvector(self, k: int) -> np.ndarray:
        """Unit-norm eigenvector for mode k (1-based)."""
        if self.eigenvectors is None:
            raise ValueError("this eigensystem has no discrete eigenvectors")
        if not 1 <= k <= self.n:
            raise ValueError(f"k must be in 1..{self.n}")
        return self.eigenvectors[k - 1]

    def eigenfunction(self, k: int, t):
        """Piecewise-linear eigenfunction for mode k evaluated at time(s) t."""
        if self.node_values is None:
            raise ValueError("this eigensystem has no eigenfunctions")
        if not 1 <= k <= self.n:
            raise ValueError(f"k must be in 1..{self.n}")
        t_arr = np.asarray(t, dtype=float)
        horizon = self.n * self.ts
        if np.any(t_arr < 0) or np.any(t_arr > horizon * (1 + 1e-12)):
            raise ValueError("t must lie in [0, n*ts]")
        pos = t_arr / self.ts
        idx = np.minimum(pos.astype(int), self.n - 1)
        frac = pos - idx
        v = self.node_values[k - 1]
        out = v[idx] * (1.0 - frac) + v[idx + 1] * frac
        return float(out) if t_arr.ndim == 0 else out


def discrete_wiener_eigensystem(params: ProcessParams, n: int) -> EigenSystem:
    """Closed-form eigensystem of the covariance (sigma2/fs) * min{i, j}.

    Eigenvalues (sigma2/fs) / (4 sin^2((2k-1) pi / (2(2n+1)))) come out
    sorted decreasing in k; eigenvectors are the sine vectors
    sin((2k-1) pi m / (2n+1)), m = 1..n, scaled to unit Euclidean norm.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(1, n + 1)
    lam = (params.sigma2 / params.fs) / (
        4.0 * np.sin((2 * k - 1) * np.pi / (2.0 * (2 * n + 1))) ** 2)
    m = np.arange(1, n + 1)
    vecs = np.sin(np.outer((2 * k - 1) * np.pi / (2 * n + 1), m))
    norms = np.linalg.norm(vecs, axis=1)
    vecs /= norms[:, None]
    return EigenSystem(n=n, eigenvalues=lam, ts=params.ts,
                       eigenvectors=vecs, normalizers=1.0 / norms)


def _pwl_l2_norm_sq(values: np.ndarray, ts: float) -> np.ndarray:
    """Squared L2[0, n*ts] norm of piecewise-linear functions given node rows."""
    a = values[..., :-1]
    b = values[..., 1:]
    return (ts / 3.0) * np.sum(a * a + a * b + b * b, axis=-1)


def interp_kernel_eigensystem(params: ProcessParams, n: int) -> EigenSystem:
    """Closed-form eigensystem of the sample-interpolator kernel on [0, n*ts].

    The kernel has rank n; its eigenvalues are

        lam_k = (sigma2 ts^2 / 6) * (2 cos(k pi) - s_k) / (cos(k pi) + s_k),
        s_k = sin((2k-1)(n-1) pi / (2n)),

    and the eigenfunctions are piecewise linear with node values
    sin((2k-1) pi m / (2n)), m = 0..n, normalized to unit L2 norm.  A
    denominator magnitude below 1e-12 raises NumericalDegeneracyError
    (does not occur for n <= 4096).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ts = params.ts
    k = np.arange(1, n + 1)
    s_k = np.sin((2 * k - 1) * (n - 1) * np.pi / (2.0 * n))
    cos_k = np.cos(k * np.pi)
    denom = cos_k + s_k
    bad = np.abs(denom) < 1e-12
    if np.any(bad):
        k_bad = int(k[bad][0])
        raise NumericalDegeneracyError(
            f"eigenvalue denominator below 1e-12 at k={k_bad}, n={n}")
    lam = (params.sigma2 * ts * ts / 6.0) * (2.0 * cos_k - s_k) / denom

    m = np.arange(0, n + 1)
    nodes = np.sin(np.outer((2 * k - 1) * np.pi / (2.0 * n), m))
    scale = 1.0 / np.sqrt(_pwl_l2_norm_sq(nodes, ts))
    nodes *= scale[:, None]

    order = np.argsort(np.abs(lam))[::-1]
    return EigenSystem(n=n, eigenvalues=lam[order], ts=ts,
                       node_values=nodes[order], normalizers=scale[order])


def _bridge_cov_grid(params: ProcessParams, t: np.ndarray, s: np.ndarray):
    """Covariance of the interpolation-error bridge at times t x s (outer)."""
    ts = params.ts
    it = np.floor(t * params.fs * (1 + 1e-14)).astype(int)
    is_ = np.floor(s * params.fs * (1 + 1e-14)).astype(int)
    same = it[:, None] == is_[None, :]
    t_hi = (it + 1) * ts
    t_lo = it * ts
    tmax = np.maximum(t[:, None], s[None, :])
    tmin = np.minimum(t[:, None], s[None, :])
    vals = (params.sigma2 / ts) * (t_hi[:, None] - tmax) * (tmin - t_lo[:, None])
    return np.where(same, vals, 0.0)


def interp_covariance(params: ProcessParams, t, s):
    """Kernel of the sample interpolator: sigma2*min(t,s) minus the bridge term."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    k_w = params.sigma2 * np.minimum(t_arr[:, None], s_arr[None, :])
    out = k_w - _bridge_cov_grid(params, t_arr, s_arr)
    if np.isscalar(t) and np.isscalar(s):
        return float(out[0, 0])
    return out


def _trapezoid_weights(num_points: int, dt: float) -> np.ndarray:
    w = np.full(num_points, dt)
    w[0] = w[-1] = 0.5 * dt
    return w


def nystrom_interp_eigenvalues(params: ProcessParams, n: int,
                               grid_points: int = 200,
                               method: str = "auto") -> np.ndarray:
    """Brute-force spectrum of the interpolator kernel on a uniform grid.

    Discretizes the kernel on ``grid_points`` nodes per sampling interval
    with trapezoid weights and returns the n largest eigenvalues of the
    symmetrized Nystrom matrix, sorted decreasing.

    method "dense" evaluates the kernel pointwise and calls the dense
    symmetric eigensolver; "factored" exploits that the interpolator is a
    linear map of the samples, so the Nystrom matrix is H C H^T with hat
    factors H, and reduces the problem to n x n without changing the
    spectrum.  "auto" picks dense for small grids (the fully independent
    route) and factored above 3500 nodes, where the dense matrix no longer
    fits comfortably.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    ts = params.ts
    total = n * grid_points + 1
    dt = ts / grid_points
    t = np.arange(total) * dt
    w = _trapezoid_weights(total, dt)

    if method == "auto":
        method = "dense" if total <= 3500 else "factored"

    if method == "dense":
        kmat = interp_covariance(params, t, t)
        sq = np.sqrt(w)
        sym = sq[:, None] * kmat * sq[None, :]
        vals = np.linalg.eigvalsh(sym)[::-1]
        return vals[:n]
    if method != "factored":
        raise ValueError(f"unknown method {method!r}")

    # interpolator value at t in interval idx is (1-frac)*W_idx + frac*W_{idx+1};
    # column j of H carries the weight on sample j+1 (sample 0 is pinned at 0)
    idx = np.minimum((t / ts).astype(int), n - 1)
    frac = t / ts - idx
    hmat = np.zeros((total, n))
    rows = np.arange(total)
    inner = idx >= 1
    hmat[rows[inner], idx[inner] - 1] = 1.0 - frac[inner]
    hmat[rows, idx] += frac
    cov = (params.sigma2 * ts) * np.minimum.outer(np.arange(1, n + 1),
                                                  np.arange(1, n + 1))
    chol = np.linalg.cholesky(cov)
    mid = hmat.T @ (w[:, None] * hmat)
    vals = np.linalg.eigvalsh(chol.T @ mid @ chol)[::-1]
    return vals[:n]


def fredholm_residual(system: EigenSystem, params: ProcessParams, k: int,
                      grid_points: int) -> float:
    """Sup-norm residual of the eigen-equation under trapezoid quadrature.

    Evaluates lam_k * phi_k(t) - integral K(t, s) phi_k(s) ds on a grid with
    ``grid_points`` nodes per sampling interval; shrinks as the grid is
    refined, so it doubles as a convergence diagnostic for the closed-form
    eigensystem.
    """
    if system.node_values is None:
        raise ValueError("residual is defined for the interpolator kernel")
    if not 1 <= k <= system.n:
        raise ValueError(f"k must be in 1..{system.n}")
    if grid_points < 50:
        raise ValueError("grid_points must be >= 50 per sampling interval")
    n = system.n
    ts = system.ts
    total = n * grid_points + 1
    dt = ts / grid_points
    t = np.arange(total) * dt
    phi_vals = system.eigenfunction(k, t)
    w = _trapezoid_weights(total, dt)
    lam = system.eigenvalues[k - 1]

    resid = np.empty(total)
    chunk = max(1, 2_000_000 // total)
    for lo in range(0, total, chunk):
        hi = min(lo + chunk, total)
        kblock = interp_covariance(params, t[lo:hi], t)
        resid[lo:hi] = lam * phi_vals[lo:hi] - kblock @ (w * phi_vals)
    return float(np.max(np.abs(resid)))
