"""Dense complex polynomials, root finding and the Wronskian.

Coefficients are stored lowest power first: ``coeffs[k]`` multiplies ``z**k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import RootFindingError


def _trim(c: np.ndarray) -> np.ndarray:
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        return c[:0]
    return c[: nz[-1] + 1]


class ComplexPolynomial:
    """Immutable dense polynomial over the complex numbers.

    Trailing (highest power) exact zeros are dropped, so the leading
    coefficient is nonzero; the zero polynomial has no coefficients and
    degree -1.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[complex] = ()):
        c = _trim(np.array(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs,
                           dtype=complex).ravel())
        c = c.copy()
        c.setflags(write=False)
        self._c = c

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    def is_zero(self) -> bool:
        return len(self._c) == 0

    def leading(self) -> complex:
        return complex(self._c[-1]) if len(self._c) else 0j

    def coeff(self, k: int) -> complex:
        return complex(self._c[k]) if 0 <= k < len(self._c) else 0j

    def padded(self, length: int) -> np.ndarray:
        out = np.zeros(length, dtype=complex)
        out[: min(length, len(self._c))] = self._c[:length]
        return out

    def __call__(self, z):
        return evaluate(self, z)

    def __eq__(self, other):
        if not isinstance(other, ComplexPolynomial):
            return NotImplemented
        return np.array_equal(self._c, other._c)

    def __hash__(self):
        return hash(self._c.tobytes())

    def __add__(self, other):
        other = _as_poly(other)
        m = max(len(self._c), len(other._c))
        return ComplexPolynomial(self.padded(m) + other.padded(m))

    __radd__ = __add__

    def __neg__(self):
        return ComplexPolynomial(-self._c)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            return ComplexPolynomial(self._c * other)
        other = _as_poly(other)
        if self.is_zero() or other.is_zero():
            return ComplexPolynomial()
        return ComplexPolynomial(np.convolve(self._c, other._c))

    __rmul__ = __mul__

    def __repr__(self):
        return f"ComplexPolynomial({[complex(c) for c in self._c]})"

    def __str__(self):
        terms = []
        for k in range(len(self._c) - 1, -1, -1):
            c = complex(self._c[k])
            c = complex(round(c.real, 10) + 0.0, round(c.imag, 10) + 0.0)
            if c == 0:
                continue
            coef = f"{c.real:g}" if c.imag == 0 else f"({c.real:g}{c.imag:+g}j)"
            mono = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
            if mono and coef in ("1", "-1"):
                coef = coef[:-1]
            terms.append(f"{coef}{mono}")
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"


def _as_poly(x) -> ComplexPolynomial:
    if isinstance(x, ComplexPolynomial):
        return x
    return ComplexPolynomial([x])


def evaluate(p: ComplexPolynomial, z):
    """Horner evaluation; ``z`` may be a scalar or an array."""
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z)
    for c in p.coeffs[::-1]:
        acc = acc * z + c
    return complex(acc) if acc.ndim == 0 else acc


def derivative(p: ComplexPolynomial) -> ComplexPolynomial:
    if p.degree < 1:
        return ComplexPolynomial()
    k = np.arange(1, len(p.coeffs))
    return ComplexPolynomial(k * p.coeffs[1:])


def wronskian(P: ComplexPolynomial, Q: ComplexPolynomial) -> ComplexPolynomial:
    """``P'Q - PQ'``, the numerator of ``(P/Q)'``."""
    return derivative(P) * Q - P * derivative(Q)


def rho_coefficients(P: ComplexPolynomial, Q: ComplexPolynomial, n: int | None = None) -> np.ndarray:
    """Wronskian coefficients from the bilinear formula.

    ``rho[l] = sum_{j+k=l+1} (j-k) p_j q_k`` for ``l = 0..2n``. Used as an
    independent route to :func:`wronskian`.
    """
    if n is None:
        n = max(P.degree - 1, Q.degree, 0)
    if P.degree > n + 1 or Q.degree > n:
        raise ValueError(f"degrees ({P.degree}, {Q.degree}) exceed type ({n + 1}, {n})")
    p = P.padded(n + 2)
    q = Q.padded(n + 1)
    rho = np.zeros(2 * n + 1, dtype=complex)
    for j in range(n + 2):
        for k in range(n + 1):
            ell = j + k - 1
            if 0 <= ell <= 2 * n and j != k:
                rho[ell] += (j - k) * p[j] * q[k]
    return rho


def coeffs_from_roots(points: Sequence[complex]) -> ComplexPolynomial:
    """Monic polynomial ``prod (z - point)``."""
    c = np.array([1.0 + 0j])
    for a in points:
        c = np.convolve(c, np.array([-complex(a), 1.0]))
    return ComplexPolynomial(c)


@dataclass(frozen=True)
class RootSet:
    """Distinct root locations with multiplicities."""

    roots: tuple[tuple[complex, int], ...]

    @property
    def locations(self) -> np.ndarray:
        return np.array([r for r, _ in self.roots], dtype=complex)

    @property
    def multiplicities(self) -> list[int]:
        return [m for _, m in self.roots]

    @property
    def total_multiplicity(self) -> int:
        return sum(self.multiplicities)

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)


def _scaled_residual(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    num = np.abs(evaluate(ComplexPolynomial(c), z))
    den = evaluate(ComplexPolynomial(np.abs(c)), np.abs(z)).real
    return num / np.maximum(den, np.finfo(float).tiny)


def aberth_refine(c: np.ndarray, z0: np.ndarray, max_iter: int = 50, tol: float = 1e-12):
    """Aberth-Ehrlich refinement of simultaneous root estimates.

    A root is frozen once its backward-error residual drops below ``tol`` or
    an update stops decreasing ``|p(z)|``; clustered (multiple) roots from
    the eigenvalue seed are therefore left where they are.
    Returns ``(roots, residuals)``.
    """
    p = ComplexPolynomial(c)
    dp = derivative(p)
    z = np.array(z0, dtype=complex)
    res = _scaled_residual(p.coeffs, z)
    active = res > tol
    for _ in range(max_iter):
        if not active.any():
            break
        pz = evaluate(p, z)
        dpz = evaluate(dp, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            newton = pz / dpz
            step = newton / (1.0 - newton * inv.sum(axis=1))
        z_new = np.where(active & np.isfinite(step), z - step, z)
        better = np.abs(evaluate(p, z_new)) < np.abs(pz)
        moved = active & better
        z = np.where(moved, z_new, z)
        res = _scaled_residual(p.coeffs, z)
        active = moved & (res > tol)
    return z, res


def _cluster(z: np.ndarray, radius: float) -> list[tuple[complex, int]]:
    parent = list(range(len(z)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(z)):
        for j in range(i + 1, len(z)):
            if abs(z[i] - z[j]) < radius:
                parent[find(i)] = find(j)
    groups: dict[int, list[complex]] = {}
    for i in range(len(z)):
        groups.setdefault(find(i), []).append(z[i])
    out = [(complex(np.mean(g)), len(g)) for g in groups.values()]
    out.sort(key=lambda rm: (round(rm[0].real, 10), round(rm[0].imag, 10)))
    return out


def roots(p: ComplexPolynomial, cluster_radius: float = 1e-6, max_iter: int = 50,
          tol: float = 1e-12) -> RootSet:
    """All complex roots of ``p`` with multiplicities.

    Companion-matrix eigenvalues seed an Aberth refinement; estimates closer
    than ``cluster_radius`` are merged into one root.
    """
    if p.is_zero():
        raise ValueError("the zero polynomial has no finite root set")
    if p.degree == 0:
        return RootSet(())
    seed = np.roots(p.coeffs[::-1])
    z, res = aberth_refine(p.coeffs, seed, max_iter=max_iter, tol=tol)
    if np.any(~np.isfinite(z)) or np.max(res) > 1e-10:
        raise RootFindingError("root refinement did not converge",
                               residuals=[float(r) for r in res])
    return RootSet(tuple(_cluster(z, cluster_radius)))


def sylvester_matrix(P: ComplexPolynomial, Q: ComplexPolynomial) -> np.ndarray:
    m, k = P.degree, Q.degree
    size = m + k
    S = np.zeros((size, size), dtype=complex)
    ph, qh = P.coeffs[::-1], Q.coeffs[::-1]
    for i in range(k):
        S[i, i:i + m + 1] = ph
    for i in range(m):
        S[k + i, i:i + k + 1] = qh
    return S


@dataclass(frozen=True)
class CoprimeReport:
    coprime: bool
    ratio: float

    def __bool__(self):
        return self.coprime


def coprime_check(P: ComplexPolynomial, Q: ComplexPolynomial, tol: float = 1e-10) -> CoprimeReport:
    """Numerical coprimality via the Sylvester matrix.

    ``ratio`` is the smallest singular value over the largest, after scaling
    both polynomials to unit coefficient norm.
    """
    if P.is_zero() or Q.is_zero():
        raise ValueError("coprime_check needs nonzero polynomials")
    if P.degree + Q.degree == 0:
        return CoprimeReport(True, 1.0)
    P = P * (1.0 / np.linalg.norm(P.coeffs))
    Q = Q * (1.0 / np.linalg.norm(Q.coeffs))
    s = np.linalg.svd(sylvester_matrix(P, Q), compute_uv=False)
    ratio = float(s[-1] / s[0])
    return CoprimeReport(ratio > tol, ratio)


@dataclass(frozen=True)
class RationalMap:
    """``F = P/Q`` of type (n+1, n) normalized by p_{n+1} = q_n = 1, p_n = 0."""

    P: ComplexPolynomial
    Q: ComplexPolynomial
    n: int

    def __post_init__(self):
        n = self.n
        if n < 0:
            raise ValueError("n must be nonnegative")
        if self.P.degree != n + 1 or self.Q.degree != n:
            raise ValueError(f"expected degrees ({n + 1}, {n}), got ({self.P.degree}, {self.Q.degree})")
        if (abs(self.P.coeff(n + 1) - 1) > 1e-12 or abs(self.P.coeff(n)) > 1e-12
                or abs(self.Q.coeff(n) - 1) > 1e-12):
            raise ValueError("map is not normalized (p_{n+1}=1, p_n=0, q_n=1)")

    @classmethod
    def from_free(cls, p_low: Sequence[complex], q_low: Sequence[complex]) -> RationalMap:
        """Build from ``(p_0..p_{n-1})`` and ``(q_0..q_{n-1})``."""
        n = len(p_low)
        if len(q_low) != n:
            raise ValueError("p and q blocks must have equal length n")
        P = ComplexPolynomial(list(p_low) + [0, 1])
        Q = ComplexPolynomial(list(q_low) + [1])
        return cls(P, Q, n)

    @property
    def free(self) -> np.ndarray:
        """Concatenated free coefficients ``(p_0..p_{n-1}, q_0..q_{n-1})``."""
        n = self.n
        return np.concatenate([self.P.padded(n), self.Q.padded(n)])

    def __call__(self, z):
        return evaluate(self.P, z) / evaluate(self.Q, z)

    def wronskian(self) -> ComplexPolynomial:
        return wronskian(self.P, self.Q)

    def critical_points(self, cluster_radius: float = 1e-6) -> RootSet:
        return roots(self.wronskian(), cluster_radius)


def canonical_key(vec: np.ndarray, digits: int = 8) -> tuple:
    """Lexicographic (Re, Im) sort key, rounded so float noise cannot reorder."""
    out = []
    for v in np.asarray(vec, dtype=complex):
        out.append(round(v.real, digits) + 0.0)
        out.append(round(v.imag, digits) + 0.0)
    return tuple(out)


def random_normalized_map(n: int, rng: np.random.Generator) -> RationalMap:
    """Free coefficients drawn uniformly from the unit disk."""
    r = np.sqrt(rng.uniform(size=2 * n))
    t = rng.uniform(0, 2 * np.pi, size=2 * n)
    c = r * np.exp(1j * t)
    return RationalMap.from_free(c[:n], c[n:])


def min_separation(points: Sequence[complex]) -> float:
    pts = np.asarray(points, dtype=complex)
    if len(pts) < 2:
        return np.inf
    d = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(d, np.inf)
    return float(d.min())
