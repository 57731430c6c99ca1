"""
A diffusion with an entrance boundary
=====================================

The radial part of 3-d Brownian motion in the unit ball, reflected at the
sphere: drift 1/x, unit noise on (0, 1].  Its stationary law is 3x^2 dx and
every mean hitting time has a closed form.
"""
from pathlib import Path

import numpy as np

from kemeny import build_analysis, expected_hitting, gamma, kemeny_profile, load_diffusion_spec

MODELS = Path(__file__).resolve().parent / "models"

spec = load_diffusion_spec(MODELS / "bessel.json")
a = build_analysis(spec)
print("working window:", a.lower, a.upper)
print("speed mass:", a.mass)

xs = np.array([0.25, 0.5, 1.0])
print("pi density:", a.pi_density(xs), " vs 3x^2:", 3 * xs**2)

# hitting time of 1/2 from 1; closed form 5/12
print("\nE^1[T_0.5] =", expected_hitting(a, 1.0, 0.5), " 5/12 =", 5 / 12)
# from below only the time to climb counts: (z^2 - x^2)/3
print("E^0.2[T_0.6] =", expected_hitting(a, 0.2, 0.6), " closed form", (0.36 - 0.04) / 3)

# K on 21 points, its pi-average, and gamma = E|S(X) - S(Y)|
prof = kemeny_profile(a)
print("\nK on the grid:", np.round(prof.k_values, 13))
print("kappa:", prof.kappa, " gamma:", prof.gamma, " gamma/2:", prof.gamma / 2)
print("gamma on its own:", gamma(a))
