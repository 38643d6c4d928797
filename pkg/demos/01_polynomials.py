"""
Polynomial toolkit: evaluation, Wronskians, root extraction and the
coprimality test that the solvers rely on.
"""

import numpy as np

from openup import (
    ComplexPolynomial,
    coeffs_from_roots,
    coprime_check,
    rho_coefficients,
    roots,
    wronskian,
)

# Coefficients are stored lowest power first.
P = ComplexPolynomial([1, 0, 1])   # z^2 + 1
Q = ComplexPolynomial([0, 1])      # z
print("P =", P, "  Q =", Q)
print("P(i) =", P(1j), "  P(1) =", P(1))

# F = P/Q has F' = W / Q^2 with W = P'Q - PQ'.
W = wronskian(P, Q)
print("W =", W)
print("bilinear coefficients:", rho_coefficients(P, Q, n=1))

# Roots come with multiplicities.
for p in (ComplexPolynomial([2, -3, 0, 1]), ComplexPolynomial([1, -2, 1])):
    print(p, "->", [(np.round(z, 12), m) for z, m in roots(p)])

# Round trip through the roots of a degree 12 polynomial.
rng = np.random.default_rng(1)
pts = rng.uniform(-2, 2, 12) + 1j * rng.uniform(-2, 2, 12)
p = coeffs_from_roots(pts)
back = coeffs_from_roots([z for z, m in roots(p) for _ in range(m)])
print("degree 12 round trip, max coefficient error:", np.max(np.abs(back.coeffs - p.coeffs)))

# The Sylvester test flags shared roots.
print("gcd(z^2+1, z) = 1 ?", coprime_check(P, Q).coprime)
shared = coprime_check(P, ComplexPolynomial([-1j, 1]))
print("gcd(z^2+1, z-i) = 1 ?", shared.coprime, " ratio =", shared.ratio)
