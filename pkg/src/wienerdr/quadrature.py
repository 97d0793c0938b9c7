"""Adaptive composite Gauss-Legendre quadrature on bounded intervals.

Shared engine for the waterfilling integrals over (0, 1].  Those integrands
are smooth away from the left endpoint but inherit an integrable singularity
at phi = 0 from the spectral densities (a phi**-2 blow-up of the density
itself, a log divergence of the rate integrand).  Two strategies are
supported:

* graded: substitute phi = u**2 and integrate in u, which clusters nodes at
  the singular endpoint and removes most of the stiffness (the default);
* plain: adaptive bisection directly in phi, kept as an independent
  cross-check of the graded scheme.

Panels are refined in breadth-first waves so the integrand is always
evaluated on one batched array per refinement level.  Every integral returns
an a-posteriori error estimate (the sum of the inter-refinement deltas of
the accepted panels).  Panels that fail to settle within the depth budget
raise :class:`QuadratureError` carrying the estimate reached, which is how
divergent integrands surface.
"""

from __future__ import annotations

import numpy as np

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(32)

#: per-panel acceptance floor as a fraction of the requested tolerance
_PANEL_FLOOR = 1e-2


class QuadratureError(RuntimeError):
    """Quadrature failed to converge; carries the achieved error estimate."""

    def __init__(self, message: str, error_estimate: float):
        super().__init__(f"{message} (achieved error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


def _panel_values(f, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """32-node Gauss-Legendre values for a batch of panels [lo_i, hi_i]."""
    half = 0.5 * (hi - lo)
    nodes = half[:, None] * _NODES[None, :] + (0.5 * (hi + lo))[:, None]
    vals = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return half * (vals @ _WEIGHTS)


def integrate(f, a: float, b: float, *, tol: float = 1e-11,
              breakpoints=(), initial_panels: int = 4,
              max_depth: int = 52, max_panels: int = 40000):
    """Integrate a vectorized integrand on [a, b].

    Parameters
    ----------
    f : callable
        Vectorized integrand; never evaluated at the endpoints a, b.
    tol : float
        Per-panel acceptance is ``delta <= tol * max(width, 0.01 * (b - a))``
        where ``delta`` is the coarse-vs-bisected discrepancy; the total
        error estimate is the sum of accepted deltas.
    breakpoints : iterable of float
        Known kinks (e.g. the water-level crossing); panel edges are placed
        there so each panel sees a smooth integrand.
    initial_panels : int
        Uniform panels laid over each breakpoint segment before adaptivity.

    Returns
    -------
    (value, error_estimate)
    """
    if not b > a:
        raise ValueError("integration interval is empty")
    edges = sorted({a, b, *(float(p) for p in breakpoints if a < p < b)})
    span = b - a
    floor = _PANEL_FLOOR * span

    lo_list, hi_list = [], []
    for seg_lo, seg_hi in zip(edges, edges[1:]):
        cuts = np.linspace(seg_lo, seg_hi, initial_panels + 1)
        lo_list.append(cuts[:-1])
        hi_list.append(cuts[1:])
    lo = np.concatenate(lo_list)
    hi = np.concatenate(hi_list)
    coarse = _panel_values(f, lo, hi)

    total = 0.0
    err = 0.0
    seen = len(lo)
    for depth in range(max_depth + 1):
        mid = 0.5 * (lo + hi)
        child_lo = np.concatenate([lo, mid])
        child_hi = np.concatenate([mid, hi])
        child_vals = _panel_values(f, child_lo, child_hi)
        n = len(lo)
        fine = child_vals[:n] + child_vals[n:]
        if not np.all(np.isfinite(fine)):
            raise QuadratureError("integrand is not finite", np.inf)
        delta = np.abs(fine - coarse)
        accept = delta <= tol * np.maximum(hi - lo, floor)
        total += float(fine[accept].sum())
        err += float(delta[accept].sum())
        keep = ~accept
        if not np.any(keep):
            return total, err
        if depth == max_depth:
            raise QuadratureError(
                "tolerance not reached at maximum panel refinement",
                err + float(delta[keep].sum()))
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        coarse = np.concatenate([child_vals[:n][keep], child_vals[n:][keep]])
        seen += len(lo)
        if seen > max_panels:
            raise QuadratureError("panel budget exhausted",
                                  err + float(delta[keep].sum()))
    raise AssertionError("unreachable")


def integrate_unit(f, *, upper: float = 1.0, graded: bool = True,
                   tol: float = 1e-11, breakpoints=(),
                   initial_panels: int = 2):
    """Integrate a vectorized integrand over (0, upper], upper <= 1.

    With ``graded=True`` the integral is computed in the substituted
    variable u = sqrt(phi) on a partition graded geometrically toward the
    singular endpoint, so almost no adaptive bisection is left to do;
    breakpoints are given in phi either way.
    """
    if not 0.0 < upper <= 1.0:
        raise ValueError("upper must lie in (0, 1]")
    if graded:
        g = lambda u: f(u * u) * (2.0 * u)
        root = np.sqrt(upper)
        bps = [np.sqrt(p) for p in breakpoints]
        bps += [root * 2.0 ** (-j) for j in range(1, 16)]
        return integrate(g, 0.0, root, tol=tol, breakpoints=bps,
                         initial_panels=initial_panels)
    return integrate(f, 0.0, upper, tol=tol, breakpoints=breakpoints,
                     initial_panels=initial_panels)
