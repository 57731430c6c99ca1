r"""One-dimensional regular diffusions ``dX = b(X) dt + sigma(X) dW``.

Normalization
-------------
With ``s'(u) = exp(-int_{x0}^u 2 b / sigma^2)`` and speed density
``m'(u) = 2 / (sigma(u)^2 s'(u))`` of total mass ``M``, the stationary law is
``pi = m' / M`` and the scale function is premultiplied by the mass,
``S(x) = M int_{x0}^x s'``.  With this choice the Green function is a plain
difference of scale values, ``v_z(x, y) = min(S(x), S(y)) - S(z)`` on the side
above ``z`` (mirror image below), and ``h(x, y) = |S(x) - S(y)|``.  For the
reflected three-dimensional Bessel process on ``(0, 1]`` this reproduces
``S(x) = -2 / (3x) + const`` and ``pi(dx) = 3 x^2 dx``.

Numerics
--------
``log s'``, ``S``, the speed CDF and ``int S dpi`` are tabulated once per
analysis as :class:`~kemeny.quadrature.CumulativeIntegral` objects over a
computational window.  A finite entrance endpoint is cut off at
``left + 1e-12 * width`` so coefficients are never evaluated there; an infinite
endpoint is replaced by the point beyond which the stationary law carries a
relative mass below ``TAIL_MASS``.  Break points are placed geometrically
toward finite endpoints so singular integrands are resolved within the depth
cap.
"""
import math
import warnings
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import (
    Divergent,
    DomainError,
    NotPositiveRecurrent,
    QuadratureFailure,
    SigmaVanishes,
    ValidationError,
)
from .expr import Expr, eval_expression, parse_expression
from .quadrature import CumulativeIntegral, adaptive_simpson, simpson_panels

BOUNDARY_KINDS = ("reflecting", "entrance")
ENDPOINT_CUTOFF = 1e-12
VALIDATION_POINTS = 1001
TOL = 1e-10
TABLE_REL_TOL = 1e-13
TAIL_MASS = 1e-16
MAX_SHELLS = 60
LOG_OVERFLOW = 600.0
GAMMA_GUARD = 1e100


def chebyshev_points(lo, hi, n):
    """``n`` Chebyshev points of the first kind, strictly inside ``(lo, hi)``,
    in increasing order."""
    k = np.arange(n)
    return np.sort(0.5 * (lo + hi) - 0.5 * (hi - lo) * np.cos((2 * k + 1) * np.pi / (2 * n)))


def default_anchor(left, right):
    if math.isfinite(left) and math.isfinite(right):
        return 0.5 * (left + right)
    if math.isfinite(left):
        return left + 0.5
    if math.isfinite(right):
        return right - 0.5
    return 0.0


def _probe_bounds(left, right, anchor):
    lo = left if math.isfinite(left) else anchor - 10.0
    hi = right if math.isfinite(right) else anchor + 10.0
    return lo, hi


@dataclass(frozen=True)
class DiffusionSpec:
    """Coefficients, state interval and boundary behavior of a diffusion."""

    drift: Expr
    sigma: Expr
    left: float
    right: float
    left_boundary: str
    right_boundary: str
    anchor: float
    drift_src: str = ""
    sigma_src: str = ""

    @property
    def bounded(self):
        return math.isfinite(self.left) and math.isfinite(self.right)


def make_spec(drift, sigma, left, right, left_boundary="reflecting",
              right_boundary="reflecting", anchor=None):
    """Parse and validate a diffusion specification.

    ``drift`` and ``sigma`` are expression strings in ``x`` (or parsed
    :class:`Expr` trees).  Both are probed on 1001 Chebyshev points inside the
    interval (infinite sides are probed out to 10 units from the anchor);
    ``sigma`` must be strictly positive there.  A finite endpoint where
    ``sigma`` is not positive only triggers a warning.
    """
    drift_src = drift if isinstance(drift, str) else str(drift)
    sigma_src = sigma if isinstance(sigma, str) else str(sigma)
    drift = parse_expression(drift) if isinstance(drift, str) else drift
    sigma = parse_expression(sigma) if isinstance(sigma, str) else sigma
    left, right = float(left), float(right)
    if not left < right:
        raise ValidationError(f"empty interval ({left}, {right})")
    for side, kind, end in (("left", left_boundary, left), ("right", right_boundary, right)):
        if kind not in BOUNDARY_KINDS:
            raise ValidationError(f"{side} boundary must be one of {BOUNDARY_KINDS}, got {kind!r}")
        if kind == "reflecting" and not math.isfinite(end):
            raise ValidationError(f"reflecting {side} endpoint must be finite")
    anchor = default_anchor(left, right) if anchor is None else float(anchor)
    if not left < anchor < right:
        raise ValidationError(f"anchor {anchor} is not inside ({left}, {right})")
    grid = chebyshev_points(*_probe_bounds(left, right, anchor), VALIDATION_POINTS)
    eval_expression(drift, grid)
    sig = eval_expression(sigma, grid)
    if np.any(sig <= 0):
        where = float(grid[np.flatnonzero(sig <= 0)[0]])
        raise SigmaVanishes(f"sigma is not positive at x={where!r}")
    for end in (left, right):
        if math.isfinite(end):
            try:
                ok = eval_expression(sigma, end) > 0
            except DomainError:
                ok = False
            if not ok:
                warnings.warn(f"sigma is not positive at the endpoint x={end!r}", stacklevel=2)
    return DiffusionSpec(drift, sigma, left, right, left_boundary, right_boundary,
                         anchor, drift_src, sigma_src)


def truncate(spec, radius):
    """Restrict ``spec`` to ``[-radius, radius]``; cut sides become reflecting."""
    left, lb = spec.left, spec.left_boundary
    right, rb = spec.right, spec.right_boundary
    if left < -radius:
        left, lb = -float(radius), "reflecting"
    if right > radius:
        right, rb = float(radius), "reflecting"
    if not left < right:
        raise ValidationError(f"truncation radius {radius} leaves an empty interval")
    anchor = spec.anchor if left < spec.anchor < right else 0.5 * (left + right)
    return replace(spec, left=left, right=right, left_boundary=lb,
                   right_boundary=rb, anchor=anchor)


class DiffusionAnalysis:
    """Scale function, speed measure and stationary law of a positive
    recurrent diffusion.  Build with :func:`build_analysis`."""

    def __init__(self, spec, tol=TOL):
        self.spec = spec
        self.tol = tol
        self._setup()

    # coefficient helpers -------------------------------------------------

    def _log_scale_rate(self, u):
        b = eval_expression(self.spec.drift, u)
        s = eval_expression(self.spec.sigma, u)
        return -2.0 * b / (s * s)

    def _finite_side(self, end, kind, inward):
        """Window edge and geometric break points toward a finite endpoint."""
        x0 = self.spec.anchor
        d = abs(x0 - end)
        if kind == "entrance":
            width = (self.spec.right - self.spec.left) if self.spec.bounded else 2.0 * d
            edge = end + inward * ENDPOINT_CUTOFF * width
            depth = 40
        else:
            edge = end
            depth = 8
        pts = [end + inward * d * 2.0 ** -k for k in range(1, depth + 1)]
        pts = [p for p in pts if (p - edge) * inward > 0]
        return edge, pts

    def _infinite_side(self, direction):
        """Walk outward in doubling shells until the speed mass is negligible.

        Returns the window edge and the shell edges used as break points.
        """
        x0 = self.spec.anchor
        log_s = 0.0
        total = 0.0
        edges = [x0]
        for k in range(1, MAX_SHELLS + 1):
            a, b = edges[-1], x0 + direction * (2.0 ** k - 1.0)
            lo, hi = min(a, b), max(a, b)
            panels = simpson_panels(self._log_scale_rate, [lo, hi], self.tol, TABLE_REL_TOL)
            table = CumulativeIntegral(self._log_scale_rate, panels, a)
            offset = log_s

            def speed(u, table=table, offset=offset):
                s = eval_expression(self.spec.sigma, u)
                return 2.0 * np.exp(-(offset + table(u))) / (s * s)

            try:
                with np.errstate(over="ignore", under="ignore"):
                    mass = adaptive_simpson(speed, lo, hi, self.tol, TABLE_REL_TOL)
            except QuadratureFailure:
                break  # the speed density overflowed
            log_s = offset + table(b)
            total += mass
            edges.append(b)
            if not math.isfinite(total) or total > 1e300:
                break
            if k >= 3 and mass <= TAIL_MASS * total:
                edges.pop()
                return edges[-1], edges[1:-1]
            if abs(log_s) > LOG_OVERFLOW and mass <= 1e-8 * total:
                return b, edges[1:-1]
        raise NotPositiveRecurrent(
            "speed measure mass does not converge toward the "
            f"{'right' if direction > 0 else 'left'} infinite endpoint"
        )

    def _setup(self):
        spec = self.spec
        x0 = spec.anchor
        breaks = [x0]
        if math.isfinite(spec.left):
            lo, pts = self._finite_side(spec.left, spec.left_boundary, +1)
        else:
            lo, pts = self._infinite_side(-1)
        breaks += pts
        if math.isfinite(spec.right):
            hi, pts = self._finite_side(spec.right, spec.right_boundary, -1)
        else:
            hi, pts = self._infinite_side(+1)
        breaks += pts + [lo, hi]
        self.lower, self.upper = float(lo), float(hi)
        self.breaks = np.unique(np.array(breaks, dtype=float))
        try:
            self._build_tables()
        except DomainError as exc:
            raise ValidationError(f"coefficients are not finite on the state space: {exc}") from exc

    def _panels(self, f):
        return simpson_panels(f, self.breaks, self.tol, TABLE_REL_TOL)

    def _build_tables(self):
        x0 = self.spec.anchor
        self._log_s = CumulativeIntegral(self._log_scale_rate, self._panels(self._log_scale_rate), x0)
        self._raw_scale = CumulativeIntegral(self.s_prime, self._panels(self.s_prime), x0)
        speed_panels = self._panels(self.speed_density)
        mass = speed_panels.total
        if not math.isfinite(mass) or mass <= 0:
            raise NotPositiveRecurrent(f"speed measure mass {mass!r} is not finite and positive")
        self.mass = mass
        self._speed_cdf = CumulativeIntegral(self.speed_density, speed_panels, self.lower)
        self._speed_sf = CumulativeIntegral(self.speed_density, speed_panels, self.upper)
        self._check_entrance_mass()

    def _check_entrance_mass(self):
        """Ratio test on dyadic shells next to a finite entrance endpoint.

        For a locally integrable speed density the mass of successive shells
        toward the endpoint shrinks; equal or growing shells mean the total
        mass diverges and the cutoff merely hid it.
        """
        spec = self.spec
        for end, kind, inward in ((spec.left, spec.left_boundary, 1),
                                  (spec.right, spec.right_boundary, -1)):
            if kind != "entrance" or not math.isfinite(end):
                continue
            d = abs(spec.anchor - end)
            cut = self.lower if inward > 0 else self.upper
            k = int(math.floor(math.log2(d / abs(cut - end)))) - 1
            p = [end + inward * d * 2.0 ** -j for j in (k + 1, k, k - 1)]
            cdf = self._speed_cdf(np.array(p))
            inner, outer = abs(cdf[1] - cdf[0]), abs(cdf[2] - cdf[1])
            if inner > 1e-14 * self.mass and inner >= 0.999 * outer:
                raise NotPositiveRecurrent(
                    f"speed measure mass diverges at the entrance endpoint {end!r}"
                )

    # public evaluables ---------------------------------------------------

    def s_prime(self, x):
        """Derivative of the unnormalized scale function (1 at the anchor)."""
        with np.errstate(over="ignore"):
            return np.exp(self._log_s(x))

    def speed_density(self, x):
        """Speed density ``2 / (sigma^2 s')``."""
        s = eval_expression(self.spec.sigma, x)
        with np.errstate(under="ignore"):
            return 2.0 * np.exp(-self._log_s(x)) / (s * s)

    def scale(self, x):
        """Scale function ``S(x) = M int_{x0}^x s'`` (zero at the anchor)."""
        return self.mass * self._raw_scale(x)

    def pi_density(self, x):
        return self.speed_density(x) / self.mass

    def pi_cdf(self, x):
        return np.clip(self._speed_cdf(x) / self.mass, 0.0, 1.0)

    def pi_sf(self, x):
        """``1 - F(x)`` accumulated from the right end of the window."""
        return np.clip(-self._speed_sf(x) / self.mass, 0.0, 1.0)

    @cached_property
    def _scale_moment(self):
        # G(x) = int_{x0}^x S dpi = int_{x0}^x Sraw m'
        def f(u):
            return self._raw_scale(u) * self.speed_density(u)

        return CumulativeIntegral(f, self._panels(f), self.spec.anchor)

    def scale_moment(self, x):
        """``G(x) = int_{x0}^x S(y) pi(dy)``."""
        return self._scale_moment(x)

    def in_state_space(self, x):
        x = np.asarray(x, dtype=float)
        s = self.spec
        left_ok = x >= s.left if s.left_boundary == "reflecting" else x > s.left
        right_ok = x <= s.right if s.right_boundary == "reflecting" else x < s.right
        return left_ok & right_ok


def build_analysis(spec, tol=TOL):
    """Tabulate scale, speed and stationary law for ``spec``.

    Raises NotPositiveRecurrent when the speed mass diverges (for instance
    standard Brownian motion on the line) and QuadratureFailure when a table
    cannot reach its tolerance.
    """
    return DiffusionAnalysis(spec, tol)


def _check_points(a, *pts):
    for p in pts:
        if not np.all(a.in_state_space(p)):
            raise ValueError(f"point {p!r} is outside the state space")


def green_function(a, z, x, y):
    """``v_z(x, y)``: zero when ``x`` and ``y`` are on opposite sides of ``z``,
    otherwise the scale distance from ``z`` to whichever of ``x``, ``y`` is
    nearer to ``z``."""
    _check_points(a, z, x, y)
    sx, sy, sz = (np.asarray(a.scale(v), dtype=float) for v in (x, y, z))
    above = np.minimum(sx, sy) - sz
    below = sz - np.maximum(sx, sy)
    out = np.where((sx >= sz) & (sy >= sz), above, np.where((sx <= sz) & (sy <= sz), below, 0.0))
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def h_metric(a, x, y):
    """``h(x, y) = |S(x) - S(y)| = v_y(x, x)``."""
    _check_points(a, x, y)
    out = np.abs(np.asarray(a.scale(x)) - np.asarray(a.scale(y)))
    return float(out) if out.ndim == 0 else out


def expected_hitting(a, x, z, tol=TOL):
    """``E^x[T_z] = int v_z(x, y) pi(dy)`` by adaptive Simpson with the kinks at
    ``x`` and ``z`` on the break list."""
    _check_points(a, x, z)
    x, z = float(x), float(z)
    if x == z:
        return 0.0
    sx, sz = a.scale(x), a.scale(z)
    if x > z:
        def f(y):
            return (np.minimum(sx, a.scale(y)) - sz) * a.pi_density(y)
        lo, hi = z, a.upper
    else:
        def f(y):
            return (sz - np.maximum(sx, a.scale(y))) * a.pi_density(y)
        lo, hi = a.lower, z
    if hi <= lo:
        return 0.0
    return max(adaptive_simpson(f, lo, hi, tol, TABLE_REL_TOL, breaks=[x]), 0.0)


def hitting_times_from(a, x, zs):
    """``E^x[T_z]`` for an array of targets via the tabulated scale, CDF and
    ``G = int S dpi``; no per-target quadrature.

    Below ``x``:  ``G(x) - G(z) - S(z)(F(x) - F(z)) + (S(x) - S(z))(1 - F(x))``.
    Above ``x``:  ``(S(z) - S(x)) F(x) + S(z)(F(z) - F(x)) - (G(z) - G(x))``.
    """
    zs = np.asarray(zs, dtype=float)
    sx, fx, sfx, gx = a.scale(x), a.pi_cdf(x), a.pi_sf(x), a.scale_moment(x)
    sz, gz = a.scale(zs), a.scale_moment(zs)
    below = zs <= x
    out = np.empty_like(zs)
    zb = zs[below]
    if zb.size:
        mass_between = (a._speed_cdf(x) - a._speed_cdf(zb)) / a.mass
        out[below] = (gx - gz[below]) - sz[below] * mass_between + (sx - sz[below]) * sfx
    za = zs[~below]
    if za.size:
        mass_between = (a._speed_cdf(za) - a._speed_cdf(x)) / a.mass
        out[~below] = (sz[~below] - sx) * fx + sz[~below] * mass_between - (gz[~below] - gx)
    return out


def kemeny_value(a, x, tol=TOL):
    """``K(x) = int E^x[T_z] pi(dz)``, split at ``x``."""
    def f(zs):
        return hitting_times_from(a, x, zs) * a.pi_density(zs)

    return adaptive_simpson(f, a.lower, a.upper, tol, TABLE_REL_TOL, breaks=[x])


@dataclass(frozen=True)
class DiffusionKemenyReport:
    grid: np.ndarray
    k_values: np.ndarray
    kappa: float
    gamma: float
    spread: float
    residual_gamma: float
    divergent: bool = False


def _cell_weights(a, grid):
    """Stationary mass of the nearest-grid-point cells (a pi-quadrature rule for
    a profile known only on ``grid``)."""
    cuts = np.concatenate([[a.lower], 0.5 * (grid[1:] + grid[:-1]), [a.upper]])
    return np.diff(a._speed_cdf(cuts)) / a.mass


def default_grid(a, n=21):
    return chebyshev_points(a.lower, a.upper, n)


def kemeny_profile(a, grid=None, tol=TOL):
    """Kemeny function on ``grid`` with ``kappa``, ``gamma`` and their residual.

    On an unbounded interval where ``gamma`` diverges the profile is reported
    as identically infinite (``divergent=True``).
    """
    grid = default_grid(a) if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a non-empty strictly increasing sequence")
    _check_points(a, grid)
    g = gamma(a)
    if not math.isfinite(g):
        inf = np.full(grid.size, math.inf)
        return DiffusionKemenyReport(grid, inf, math.inf, math.inf, math.nan, math.nan, True)
    k = np.array([kemeny_value(a, x, tol) for x in grid])
    kappa = float(_cell_weights(a, grid) @ k)
    return DiffusionKemenyReport(grid, k, kappa, g, float(k.max() - k.min()), abs(kappa - g / 2))


def _gamma_window(a, tol=TOL):
    # gamma = E|S(X) - S(Y)| = 2 int F (1 - F) dS = 2 M int s' F (1 - F) dy
    def f(y):
        return 2.0 * a.mass * a.s_prime(y) * a.pi_cdf(y) * a.pi_sf(y)

    return adaptive_simpson(f, a.lower, a.upper, tol, TABLE_REL_TOL, breaks=a.breaks)


def gamma(a, truncation=None, tol=TOL):
    """Double stationary integral of ``h``, reduced to a single integral.

    On an unbounded interval ``truncation=R`` computes gamma for the process
    reflected at ``+-R``.  Without a truncation, gamma is computed for
    doubling radii until the stationary tail beyond the radius is negligible;
    if it is still growing after that point (or exceeds ``GAMMA_GUARD``) the
    result is ``inf``.
    """
    spec = a.spec
    if truncation is not None:
        if spec.left >= -truncation and spec.right <= truncation:
            return _gamma_window(a, tol)
        return _gamma_window(build_analysis(truncate(spec, truncation), a.tol), tol)
    if spec.bounded:
        return _gamma_window(a, tol)
    return _gamma_expansion(a, tol)


def _gamma_expansion(a, tol):
    spec = a.spec
    reach = max(abs(a.lower), abs(a.upper))
    prev = None
    radius = 1.0
    settled = 0
    while True:
        value = _gamma_window(build_analysis(truncate(spec, radius), a.tol), tol)
        if not math.isfinite(value) or value > GAMMA_GUARD:
            return math.inf
        if radius >= reach:
            settled += 1
            if abs(value - prev) <= 1e-8 * max(1.0, value):
                return value
            if settled >= 2:
                return math.inf
        prev = value
        radius *= 2.0
        if radius > 2.0 ** 12:
            raise Divergent("gamma expansion did not settle")


def gamma_truncation_study(spec, radii=(1.0, 2.0, 3.0, 4.0), tol=TOL):
    """Gamma of the process reflected at ``+-R`` for each radius.

    Returns ``(values, increasing)`` where ``increasing`` reports whether the
    sequence is strictly increasing, the numerical witness of an infinite
    gamma for processes such as Ornstein-Uhlenbeck.
    """
    values = [_gamma_window(build_analysis(truncate(spec, r), TOL), tol) for r in radii]
    increasing = all(b > a for a, b in zip(values, values[1:]))
    return values, increasing
