"""
Rational maps with prescribed critical values.

The unknowns are the free coefficients of P and Q together with the 2n
critical points z_j, and the equations say P(z_j) = zeta_j Q(z_j) and that the
Wronskian vanishes at z_j. A parameter homotopy moves the values from those of
a random map to the targets; loops in value space then pick up the rest.
"""

import numpy as np

from openup import (
    SolverConfig,
    alternation_heuristic,
    normalize_map,
    solve_critical_values,
    weak_hermite_solve,
)
from openup.critpoints import sample_start_map

sols = solve_critical_values((2, -2))
for s in sols:
    print("zeta = (2, -2):  P =", s.map.P, " Q =", s.map.Q, " nodes =", np.round(s.nodes, 12))

# A random n=2 map: extract its critical values and solve for them.
F, crit = sample_start_map(2, np.random.default_rng(11))
zeta = F(crit)
sols = solve_critical_values(zeta, SolverConfig(rng_seed=0))
err = min(np.max(np.abs(F.free - s.map.free)) for s in sols)
print(f"n=2 round trip: {len(sols)} solutions, original recovered to {err:.1e}")

# Normalization: z + 1 + 1/z is a shifted Joukowski map.
G = normalize_map([1, 1, 1], [0, 1])
print("normalize z + 1 + 1/z ->  P =", G.P, " Q =", G.Q)

# With the nodes fixed the problem is linear in the coefficients of (A, B).
basis = weak_hermite_solve((1, -1), (2, -2))
A, B = basis[0]
c = 1 / A.leading()
print("weak Hermite space dimension:", len(basis), f"  spanned by ({c * A}, {c * B})")

# Alternating between the two linear halves converges for a nearby start.
start = normalize_map([1, 0.2, 1], [0, 1])
print("alternation from a perturbed start ->", alternation_heuristic((2, -2), start).P)
