"""
Monte Carlo checks
==================

Simulated counterparts of the exact numbers: hitting times, occupation
counts, and an Euler-Maruyama run on the Bessel diffusion.
"""
from pathlib import Path

from kemeny import build_analysis, load_diffusion_spec
from kemeny import fixtures as fx
from kemeny.sim import (
    RngStream,
    estimate_hitting_diffusion,
    estimate_kemeny_ctmc,
    estimate_kemeny_dtmc,
    run_occupation_suite_with_budget,
    verify_occupation_lemma_dtmc,
)

MODELS = Path(__file__).resolve().parent / "models"

est = estimate_kemeny_dtmc(fx.TWO_STATE, 0, 100_000, RngStream(42))
print("two-state chain:", est.mean, "+-", est.std_error, " exact", est.target_exact, " z", round(est.z_score, 2))

est = estimate_kemeny_ctmc(fx.TWO_STATE_Q, 0, 100_000, RngStream(42), streams=4)
print("two-state generator:", est.mean, "+-", est.std_error, " exact", est.target_exact)

# occupation counts before entering a pi-random target, started from pi
check = verify_occupation_lemma_dtmc(fx.CYCLE3, 100_000, RngStream(1))
print("\n3-cycle visits:", check.means, " expected", check.exact, " max |z|", check.max_abs_z)

# fixed start and target: the identity fails, as it should
check = verify_occupation_lemma_dtmc(fx.CYCLE3, 10_000, RngStream(1), start=0, target=2)
print("fixed target:", check.means, " vs", check.exact, " max |z|", check.max_abs_z)

ok, runs = run_occupation_suite_with_budget(100_000, seed=42, reseed=4242)
print("\nten-chain suite passed:", ok)
for name, z in zip(runs[-1].names, runs[-1].max_abs_z):
    print(f"  {name:15s} max |z| {z:.2f}")

# Euler-Maruyama: the band around the target and the time step both bias
# the estimate; shrinking them moves it toward 5/12
a = build_analysis(load_diffusion_spec(MODELS / "bessel.json"))
print("\nE^1[T_0.5], exact 5/12 =", 5 / 12)
for h, eps in [(4e-4, 4e-2), (1e-4, 2e-2), (5e-5, 1e-2)]:
    est = estimate_hitting_diffusion(a, 1.0, 0.5, step=h, band=eps, n_samples=10_000, rng=42)
    print(f"  h = {h:.0e}, band = {eps:.0e}: {est.mean:.4f}  ({est.relative_error:+.1%})")
