import math

import numpy as np
import pytest
from scipy import integrate

from kemeny.errors import QuadratureFailure
from kemeny.quadrature import CumulativeIntegral, adaptive_simpson, boole, simpson_panels


@pytest.mark.parametrize(
    "f, a, b, exact",
    [
        (np.exp, 0.0, 1.0, math.e - 1),
        (np.sin, 0.0, math.pi, 2.0),
        (lambda x: 1 / (1 + x**2), -5.0, 5.0, 2 * math.atan(5.0)),
        (lambda x: np.exp(-x * x / 2), -10.0, 10.0, math.sqrt(2 * math.pi) * math.erf(10 / math.sqrt(2))),
    ],
)
def test_adaptive_simpson_known_integrals(f, a, b, exact):
    assert adaptive_simpson(f, a, b, tol=1e-12) == pytest.approx(exact, abs=1e-11)


def test_cubic_is_exact_on_one_panel():
    panels = simpson_panels(lambda x: x**3 - 2 * x, [0.0, 2.0], tol=1e-14)
    assert panels.total == pytest.approx(0.0, abs=1e-15)


def test_endpoint_singularity_with_geometric_breaks():
    # sqrt has unbounded slope at 0; dyadic breaks keep each panel well scaled
    breaks = [2.0**-k for k in range(1, 41)]
    assert adaptive_simpson(np.sqrt, 0.0, 1.0, tol=1e-12, breaks=breaks) == pytest.approx(2 / 3, abs=1e-12)


def test_kink_on_break_point():
    f = lambda x: np.abs(x - 0.3)
    exact = (0.3**2 + 0.7**2) / 2
    assert adaptive_simpson(f, 0.0, 1.0, tol=1e-13, breaks=[0.3]) == pytest.approx(exact, abs=1e-14)


def test_orientation_and_empty_interval():
    assert adaptive_simpson(np.exp, 1.0, 0.0) == pytest.approx(1 - math.e, abs=1e-10)
    assert adaptive_simpson(np.exp, 2.0, 2.0) == 0.0


def test_relative_tolerance_controls_tiny_integrals():
    f = lambda x: 1e-30 * np.exp(x)
    value = adaptive_simpson(f, 0.0, 1.0, tol=1e-10, rel_tol=1e-12)
    assert value == pytest.approx(1e-30 * (math.e - 1), rel=1e-11)


def test_nonfinite_integrand_fails():
    with pytest.raises(QuadratureFailure):
        with np.errstate(divide="ignore"):
            adaptive_simpson(lambda x: 1 / x, 0.0, 1.0)


def test_depth_cap_fails():
    with pytest.raises(QuadratureFailure, match="bisections"):
        adaptive_simpson(lambda x: np.sign(x - 1 / 3), 0.0, 1.0, tol=1e-15, max_depth=5)


def test_needs_two_breaks():
    with pytest.raises(ValueError):
        simpson_panels(np.exp, [1.0])


def test_boole_exact_for_quintic():
    f = lambda x: x**5 - x**2
    a = np.array([0.0, -1.0])
    b = np.array([1.0, 2.0])
    exact = (b**6 - a**6) / 6 - (b**3 - a**3) / 3
    assert np.allclose(boole(f, a, b), exact, rtol=1e-14, atol=1e-14)


def test_cumulative_integral_against_scipy():
    f = lambda x: np.exp(-x) * (1 + np.sin(3 * x))
    panels = simpson_panels(f, [-1.0, 0.0, 2.0], tol=1e-12)
    cum = CumulativeIntegral(f, panels, origin=0.0, tol=1e-12)
    xs = np.array([-1.0, -0.37, 0.0, 0.5, 1.234, 2.0, 2.7, -1.5])
    expected = [integrate.quad(f, 0.0, x, epsabs=1e-13, epsrel=1e-13, limit=200)[0] for x in xs]
    assert np.allclose(cum(xs), expected, rtol=1e-11, atol=1e-12)
    assert cum(0.0) == 0.0
    assert (cum.lower, cum.upper) == (-1.0, 2.0)


def test_cumulative_origin_must_be_an_edge():
    panels = simpson_panels(np.exp, [0.0, 1.0])
    with pytest.raises(ValueError):
        CumulativeIntegral(np.exp, panels, origin=5.0)
