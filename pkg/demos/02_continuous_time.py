"""
Continuous-time chains
======================

Same construction with real time in place of step counts.  Uniformization
gives a second, independent route to the same hitting times.
"""
import numpy as np

from kemeny import fixtures as fx
from kemeny import kemeny_function_ct, uniformization_crosscheck

Q = fx.TWO_STATE_Q  # leave state 0 at rate 1, state 1 at rate 2
rep = kemeny_function_ct(Q)
print("K(x):", rep.k_values, " expected 1/(1 + 2) =", 1 / 3)

# uniformize at rate lambda: each jump of P = I + Q/lambda takes 1/lambda on average
for lam in (2.2, 4.4, 10.0):
    print(f"lambda = {lam:4}: worst discrepancy {uniformization_crosscheck(Q, lam):.2e}")

# doubling every rate halves every hitting time
rng = np.random.default_rng(5)
G = fx.random_generator(6, rng)
k1 = kemeny_function_ct(G).k_values
k2 = kemeny_function_ct(2 * G).k_values
print("\nK(2Q) == K(Q)/2 bitwise:", np.array_equal(k2, k1 / 2))
print("residuals:", kemeny_function_ct(G).residuals)
