"""
When the constant is infinite
=============================

For the Ornstein-Uhlenbeck process dX = -X/2 dt + dB the scale function grows
like exp(x^2/2), fast enough that gamma, and with it K, is infinite.  Reflect
the process at +-R and watch gamma_R grow with R.
"""
from pathlib import Path

import numpy as np

from kemeny import build_analysis, gamma, gamma_truncation_study, kemeny_profile, load_diffusion_spec
from kemeny.diffusion import truncate

MODELS = Path(__file__).resolve().parent / "models"

spec = load_diffusion_spec(MODELS / "ou.json")
a = build_analysis(spec)
print("speed mass:", a.mass, " sqrt(8 pi) =", np.sqrt(8 * np.pi))

radii = [1, 2, 3, 4, 8, 16]
values, increasing = gamma_truncation_study(spec, radii)
for r, v in zip(radii, values):
    print(f"R = {r:2d}  gamma_R = {v:8.4f}")
print("strictly increasing:", increasing)
# the growth is slow: |S| pi ~ 2/|x| in the tails, so gamma_R grows like log R

print("\nuntruncated gamma:", gamma(a))

# each truncated process is an ordinary reflecting diffusion with flat K
prof = kemeny_profile(build_analysis(truncate(spec, 4.0)))
print("R = 4: kappa", prof.kappa, " spread", prof.spread, " gamma/2", prof.gamma / 2)
