"""
Kemeny function of a finite chain
=================================

Start a chain at x, pick a target z at random from the stationary law, and
count the steps until the chain first sits at z.  The mean of that count does
not depend on x.
"""
import numpy as np

from kemeny import dual_chain, kemeny_function, stationary_distribution, trace_kemeny
from kemeny import fixtures as fx

# the two-state chain that switches with probabilities 0.3 and 0.2
P = fx.TWO_STATE
rep = kemeny_function(P)
print("K(x) for each start:", rep.k_values)
print("kappa:", rep.kappa, " expected 1/(0.3 + 0.2) =", 1 / 0.5)

# a random chain with 8 states; K is still flat
rng = np.random.default_rng(1)
P = fx.random_chain(8, rng, sparse=True)
rep = kemeny_function(P)
print("\nrandom chain, K(x):", np.round(rep.k_values, 12))
print("spread:", rep.spread)

# same constant from the fundamental matrix
print("trace formula:", trace_kemeny(P), " vs kappa", rep.kappa)

# the time-reversed chain has the same constant
pi = stationary_distribution(P).pi
print("dual chain kappa:", kemeny_function(dual_chain(P, pi)).kappa)

# all residuals the report carries
for name, value in rep.residuals.items():
    print(f"  {name:22s} {value: .3e}")

# the flip chain sits exactly on the lower bound (n - 1) / 2
rep = kemeny_function(fx.FLIP)
print("\nflip chain kappa:", rep.kappa, " Hunter margin:", rep.residuals["hunter_margin"])
