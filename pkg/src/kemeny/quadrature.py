"""Adaptive Simpson quadrature for vectorized integrands.

The recursion is run breadth first: at each level every unconverged panel is
bisected and the integrand is evaluated once on the concatenated array of new
nodes.  This keeps the classic error control of adaptive Simpson (compare one
Simpson step with two half steps, accept when the difference is below 15 times
the panel tolerance, add the Richardson correction) while letting numpy do the
work.
"""
import math

import numpy as np

from .errors import QuadratureFailure

MAX_DEPTH = 40
MAX_PANELS = 2_000_000


class Panels:
    """Accepted panels of an adaptive Simpson run, sorted by left edge."""

    def __init__(self, lo, hi, values):
        order = np.argsort(lo, kind="stable")
        self.lo = lo[order]
        self.hi = hi[order]
        self.values = values[order]

    @property
    def edges(self):
        return np.append(self.lo, self.hi[-1])

    @property
    def total(self):
        return math.fsum(self.values)


def _simpson(h, fa, fm, fb):
    return h / 6.0 * (fa + 4.0 * fm + fb)


def simpson_panels(f, breaks, tol=1e-10, rel_tol=0.0, max_depth=MAX_DEPTH):
    """Adaptive Simpson over consecutive intervals of ``breaks``.

    ``f`` maps a 1-d array of nodes to a 1-d array of values.  Each initial
    interval receives a share of ``tol`` proportional to its width; a panel is
    accepted when its error estimate is below ``max(tol_i, rel_tol * |I_i|)``.
    Integrand kinks should be placed on ``breaks``.

    Raises QuadratureFailure if a panel is still unconverged at ``max_depth``
    bisections below its initial interval.
    """
    breaks = np.unique(np.asarray(breaks, dtype=float))
    if breaks.size < 2:
        raise ValueError("need at least two distinct break points")
    a = breaks[:-1]
    b = breaks[1:]
    width = breaks[-1] - breaks[0]
    tols = tol * (b - a) / width
    m = 0.5 * (a + b)
    vals = f(np.concatenate([a, m, b]))
    k = a.size
    fa, fm, fb = vals[:k], vals[k:2 * k], vals[2 * k:]
    whole = _simpson(b - a, fa, fm, fb)
    depth = 0
    out_lo, out_hi, out_val = [], [], []
    while a.size:
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        new = f(np.concatenate([lm, rm]))
        flm, frm = new[: a.size], new[a.size:]
        with np.errstate(invalid="ignore", over="ignore"):
            left = _simpson(m - a, fa, flm, fm)
            right = _simpson(b - m, fm, frm, fb)
            both = left + right
            diff = both - whole
            bound = np.maximum(tols, rel_tol * np.abs(both))
            ok = np.abs(diff) <= 15.0 * bound
        if not np.all(np.isfinite(both)):
            bad = ~np.isfinite(both)
            raise QuadratureFailure(
                f"integrand not finite on [{a[bad][0]!r}, {b[bad][0]!r}]"
            )
        out_lo.append(a[ok])
        out_hi.append(b[ok])
        out_val.append(both[ok] + diff[ok] / 15.0)
        todo = ~ok
        if not todo.any():
            break
        depth += 1
        if depth > max_depth:
            i = np.flatnonzero(todo)[0]
            raise QuadratureFailure(
                f"tolerance not met on [{a[i]!r}, {b[i]!r}] after {max_depth} bisections"
            )
        a, m, b = a[todo], m[todo], b[todo]
        fa, flm, fm, frm, fb = fa[todo], flm[todo], fm[todo], frm[todo], fb[todo]
        left, right, tols = left[todo], right[todo], tols[todo]
        if 2 * a.size > MAX_PANELS:
            raise QuadratureFailure("panel budget exhausted")
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        fa, fm, fb = (
            np.concatenate([fa, fm]),
            np.concatenate([flm, frm]),
            np.concatenate([fm, fb]),
        )
        whole = np.concatenate([left, right])
        tols = np.concatenate([tols, tols]) / 2.0
    return Panels(np.concatenate(out_lo), np.concatenate(out_hi), np.concatenate(out_val))


def adaptive_simpson(f, a, b, tol=1e-10, rel_tol=0.0, breaks=(), max_depth=MAX_DEPTH):
    """Integral of ``f`` over ``[a, b]`` with optional interior ``breaks``."""
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_simpson(f, b, a, tol, rel_tol, breaks, max_depth)
    pts = [a, b] + [t for t in breaks if a < t < b]
    return simpson_panels(f, pts, tol, rel_tol, max_depth).total


def boole(f, a, b):
    """Five-point closed Newton-Cotes rule on ``[a, b]``, vectorized over arrays
    of endpoints."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    h = b - a
    nodes = a[None, :] + np.array([0.0, 0.25, 0.5, 0.75, 1.0])[:, None] * h[None, :]
    v = f(nodes.ravel()).reshape(5, -1)
    return h / 90.0 * (7 * v[0] + 32 * v[1] + 12 * v[2] + 32 * v[3] + 7 * v[4])


class CumulativeIntegral:
    """``x -> integral of f from origin to x`` backed by adaptive panels.

    Partial sums are accumulated outward from ``origin`` on each side, so the
    value near the origin never suffers cancellation against a large integral
    elsewhere in the table.  Inside a panel the remainder is integrated with
    :func:`boole`; outside the tabulated range the integral from the nearest
    table edge is computed adaptively.
    """

    def __init__(self, f, panels, origin, tol=1e-10, rel_tol=1e-12):
        self.f = f
        self.tol = tol
        self.rel_tol = rel_tol
        edges = panels.edges
        if not edges[0] <= origin <= edges[-1]:
            raise ValueError("origin must lie inside the tabulated range")
        io = int(np.searchsorted(edges, origin))
        if edges[io] != origin:
            raise ValueError("origin must be a panel edge")
        self.edges = edges
        self.origin = float(origin)
        self._io = io
        cum = np.zeros(edges.size)
        vals = panels.values
        cum[io + 1:] = np.cumsum(vals[io:])
        cum[:io] = -np.cumsum(vals[:io][::-1])[::-1]
        self._cum = cum

    @property
    def lower(self):
        return float(self.edges[0])

    @property
    def upper(self):
        return float(self.edges[-1])

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        edges = self.edges
        inside = (x >= edges[0]) & (x <= edges[-1])
        xi = x[inside]
        if xi.size:
            k = np.clip(np.searchsorted(edges, xi, side="right") - 1, 0, edges.size - 2)
            right = k >= self._io
            res = np.empty_like(xi)
            if right.any():
                kr = k[right]
                res[right] = self._cum[kr] + boole(self.f, edges[kr], xi[right])
            if (~right).any():
                kl = k[~right]
                res[~right] = self._cum[kl + 1] - boole(self.f, xi[~right], edges[kl + 1])
            out[inside] = res
        for i in np.flatnonzero(~inside):
            edge = 0 if x[i] < edges[0] else -1
            out[i] = self._cum[edge] + adaptive_simpson(
                self.f, edges[edge], x[i], self.tol, self.rel_tol
            )
        return float(out[0]) if scalar else out
