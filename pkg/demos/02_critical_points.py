"""
Rational maps with prescribed critical points.

Normalized maps F = P/Q with P monic of degree n+1 and no z^n term, Q monic of
degree n. Given 2n distinct points the solver returns every map it finds whose
critical points are exactly those points.
"""

import numpy as np

from openup import SolverConfig, solve_critical_points, verify_critical_points
from openup.critpoints import sample_start_map

# Points +1 and -1: the Joukowski map (z^2 + 1)/z.
for F in solve_critical_points((1, -1)):
    print("eta = (1, -1):  P =", F.P, " Q =", F.Q)

# Points +i and -i give (z^2 - 1)/z.
for F in solve_critical_points((1j, -1j)):
    print("eta = (i, -i):  P =", F.P, " Q =", F.Q)

# Round trip: draw a random map, hand its critical points to the solver,
# and look for the original among the answers.
rng = np.random.default_rng(7)
for n in (2, 3, 4):
    F, eta = sample_start_map(n, rng)
    maps = solve_critical_points(eta, SolverConfig(rng_seed=n))
    err = min(np.max(np.abs(F.free - G.free)) for G in maps)
    print(f"n={n}: {len(maps)} maps found, original recovered to {err:.1e}")
    assert all(verify_critical_points(G, eta).passed for G in maps)

# Different seeds land on the same finite set.
_, eta = sample_start_map(3, np.random.default_rng(3))
sets = [solve_critical_points(eta, SolverConfig(rng_seed=s)) for s in range(3)]
print("solution counts for seeds 0, 1, 2:", [len(s) for s in sets])
