"""Normalized rational maps with prescribed critical points.

The Wronskian identity ``P'Q - PQ' = prod (z - eta_j)`` is a quadratic
system ``rho_l(p, q) = c_l`` in the free coefficients. Its top three
equations are linear after normalization and are eliminated in closed
form; the rest are solved by parameter homotopy from random maps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateSpec, NoConvergence, NoSolutionFound, NumericalError, ValidationError
from .homotopy import (
    SolverConfig,
    monodromy_rng,
    newton,
    random_triangle,
    run_pool,
    start_seeds,
    track,
)
from .poly import (
    RationalMap,
    canonical_key,
    coeffs_from_roots,
    coprime_check,
    min_separation,
    random_normalized_map,
    roots,
)

SEPARATION_TOL = 1e-8


@dataclass(frozen=True)
class CriticalPointSpec:
    points: tuple[complex, ...]

    def __post_init__(self):
        pts = tuple(complex(p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2 or len(pts) % 2:
            raise ValidationError("need an even number (>= 2) of critical points",
                                  count=len(pts))
        sep = min_separation(pts)
        if sep <= SEPARATION_TOL:
            raise DegenerateSpec("critical points are not pairwise distinct", separation=sep)

    @property
    def n(self) -> int:
        return len(self.points) // 2


def _full_rho(x: np.ndarray, n: int) -> np.ndarray:
    p = np.concatenate([x[:n], [0.0, 1.0]])
    q = np.concatenate([x[n:], [1.0]])
    rho = np.zeros(2 * n + 1, dtype=complex)
    for j in range(n + 2):
        for k in range(n + 1):
            if j != k and 0 <= j + k - 1 <= 2 * n:
                rho[j + k - 1] += (j - k) * p[j] * q[k]
    return rho


def _full_rho_jacobian(x: np.ndarray, n: int) -> np.ndarray:
    """d rho_l / d(p_0..p_{n-1}, q_0..q_{n-1}), shape (2n+1, 2n)."""
    p = np.concatenate([x[:n], [0.0, 1.0]])
    q = np.concatenate([x[n:], [1.0]])
    J = np.zeros((2 * n + 1, 2 * n), dtype=complex)
    for j in range(n):
        for k in range(n + 1):
            ell = j + k - 1
            if 0 <= ell <= 2 * n:
                J[ell, j] += (j - k) * q[k]
    for k in range(n):
        for j in range(n + 2):
            ell = j + k - 1
            if 0 <= ell <= 2 * n:
                J[ell, n + k] += (j - k) * p[j]
    return J


def _elimination(n: int) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Affine parametrization ``x = L @ c + T @ y`` of the tail equations.

    Tails: q_{n-1} = c_{2n-1}/2;  3 q_{n-2} - p_{n-1} = c_{2n-2};
    4 q_{n-3} - 2 p_{n-2} = c_{2n-3} (terms with negative index drop out).
    """
    L = np.zeros((2 * n, 2 * n + 1))
    iq = lambda k: n + k  # noqa: E731
    L[iq(n - 1), 2 * n - 1] = 0.5
    L[n - 1, 2 * n - 2] = -1.0
    if n >= 2:
        L[n - 2, 2 * n - 3] = -0.5
    free = list(range(n - 2)) + [iq(k) for k in range(n - 1)] if n >= 2 else []
    T = np.zeros((2 * n, len(free)))
    for col, idx in enumerate(free):
        T[idx, col] = 1.0
        if idx == iq(n - 2):
            T[n - 1, col] = 3.0
        if n >= 3 and idx == iq(n - 3):
            T[n - 2, col] = 2.0
    return L, T, free


@dataclass(frozen=True)
class CoefficientSystem:
    n: int
    targets: np.ndarray
    L: np.ndarray = field(repr=False)
    T: np.ndarray = field(repr=False)
    free: tuple[int, ...]

    @property
    def residual_indices(self) -> list[int]:
        """Equations left after eliminating the linear tail (l = 0..2n-4)."""
        return list(range(max(2 * self.n - 3, 0)))

    def expand(self, y: np.ndarray) -> np.ndarray:
        return self.L @ self.targets + self.T @ y

    def restrict(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=complex)[list(self.free)]

    def full_residual(self, x: np.ndarray) -> np.ndarray:
        """``rho_l(x) - c_l`` for l = 0..2n."""
        return _full_rho(x, self.n) - self.targets

    def residual(self, y: np.ndarray) -> np.ndarray:
        return self.full_residual(self.expand(y))[self.residual_indices]

    def jacobian(self, y: np.ndarray) -> np.ndarray:
        J = _full_rho_jacobian(self.expand(y), self.n)
        return J[self.residual_indices] @ self.T

    def scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.targets))))


def build_system(spec: CriticalPointSpec | Sequence[complex]) -> CoefficientSystem:
    if not isinstance(spec, CriticalPointSpec):
        spec = CriticalPointSpec(tuple(spec))
    return _system_for_targets(spec.n, coeffs_from_roots(spec.points).padded(2 * spec.n + 1))


def _system_for_targets(n: int, c: np.ndarray) -> CoefficientSystem:
    L, T, free = _elimination(n)
    return CoefficientSystem(n, np.asarray(c, dtype=complex), L, T, tuple(free))


def newton_polish(system: CoefficientSystem, start: np.ndarray,
                  config: SolverConfig = SolverConfig()) -> np.ndarray:
    """Newton on the reduced system; returns the full free-coefficient vector.

    Raises ``JacobianSingular`` or ``NoConvergence``.
    """
    y0 = system.restrict(start)
    tol, scale = config.newton_tol, system.scale()
    if len(y0) == 0:
        x = system.expand(y0)
    else:
        y = newton(system.residual, system.jacobian, y0, tol, config.max_newton_iters,
                   scale=lambda _: scale)
        x = system.expand(y)
    res = np.max(np.abs(system.full_residual(x)))
    if res >= tol * scale:
        raise NoConvergence("full residual above tolerance", residual=float(res))
    return x


@dataclass
class CriticalPointReport:
    passed: bool
    distance: float
    multiplicities: list[int]
    wronskian_degree: int
    expected_degree: int
    residual: float

    def to_dict(self):
        return {"passed": self.passed, "distance": self.distance,
                "multiplicities": self.multiplicities,
                "wronskian_degree": self.wronskian_degree, "residual": self.residual}


def _hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    if len(a) == 0 or len(b) == 0:
        return np.inf
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def verify_critical_points(F: RationalMap, spec: CriticalPointSpec | Sequence[complex],
                           tol: float = 1e-8) -> CriticalPointReport:
    if not isinstance(spec, CriticalPointSpec):
        spec = CriticalPointSpec(tuple(spec))
    W = F.wronskian()
    rs = roots(W)
    pts = np.array(spec.points)
    dist = _hausdorff(rs.locations, pts)
    resid = float(np.max(np.abs(W.padded(2 * F.n + 1) - coeffs_from_roots(pts).padded(2 * F.n + 1))))
    passed = (dist < tol and W.degree == 2 * spec.n and F.n == spec.n
              and all(m == 1 for m in rs.multiplicities))
    return CriticalPointReport(bool(passed), dist, rs.multiplicities, W.degree, 2 * spec.n, resid)


def _eta_path(eta0: np.ndarray, eta1: np.ndarray):
    """Coefficients c(t) of prod (z - eta_j(t)) and their t-derivative."""
    d = eta1 - eta0
    m = len(eta0)

    def c(t):
        return coeffs_from_roots((1 - t) * eta0 + t * eta1).padded(m + 1)

    def dc(t):
        eta = (1 - t) * eta0 + t * eta1
        out = np.zeros(m + 1, dtype=complex)
        for j in range(m):
            out -= d[j] * coeffs_from_roots(np.delete(eta, j)).padded(m + 1)
        return out

    return c, dc


def _segment_min_gap(a0: np.ndarray, a1: np.ndarray) -> float:
    """Smallest pairwise distance along the straight segments a(t), t in [0, 1]."""
    gap = np.inf
    m = len(a0)
    for i in range(m):
        for j in range(i + 1, m):
            u, v = a0[i] - a0[j], (a1[i] - a1[j]) - (a0[i] - a0[j])
            if v == 0:
                g = abs(u)
            else:
                t = min(1.0, max(0.0, -(u * np.conj(v)).real / abs(v) ** 2))
                g = abs(u + t * v)
            gap = min(gap, g)
    return gap


def sample_start_map(n: int, rng: np.random.Generator, min_sep: float = 1e-2,
                     max_tries: int = 100) -> tuple[RationalMap, np.ndarray]:
    """Random normalized map whose 2n critical points are simple and separated."""
    for _ in range(max_tries):
        F = random_normalized_map(n, rng)
        try:
            rs = roots(F.wronskian())
        except NumericalError:
            continue
        if len(rs) == 2 * n and min_separation(rs.locations) > min_sep and coprime_check(F.P, F.Q):
            return F, rs.locations
    raise NumericalError("could not sample a start map with simple critical points")


def _point_legs(x0: np.ndarray, legs, n: int, config: SolverConfig) -> np.ndarray | None:
    """Track a solution while the points move along consecutive segments."""
    L, T, free = _elimination(n)
    rows = list(range(max(2 * n - 3, 0)))
    y = np.asarray(x0, dtype=complex)[free]
    for eta_a, eta_b in legs:
        c, dc = _eta_path(eta_a, eta_b)

        def H(y, t, c=c):
            return (_full_rho(L @ c(t) + T @ y, n) - c(t))[rows]

        def Hy(y, t, c=c):
            return _full_rho_jacobian(L @ c(t) + T @ y, n)[rows] @ T

        def Ht(y, t, c=c, dc=dc):
            J = _full_rho_jacobian(L @ c(t) + T @ y, n)
            d = dc(t)
            return (J @ (L @ d) - d)[rows]

        if len(free):
            y = track(H, Hy, Ht, y, config)
            if y is None:
                return None
    system = _system_for_targets(n, coeffs_from_roots(legs[-1][1]).padded(2 * n + 1))
    try:
        return newton_polish(system, system.expand(y), config)
    except NumericalError:
        return None


def _track_one(args) -> np.ndarray | None:
    eta, seed, config = args
    rng = np.random.default_rng(seed)
    eta = np.asarray(eta, dtype=complex)
    n = len(eta) // 2
    for _ in range(20):
        F0, eta0 = sample_start_map(n, rng)
        eta0 = eta0[rng.permutation(2 * n)]
        if _segment_min_gap(eta0, eta) > 1e-6:
            break
    else:
        return None
    return _point_legs(F0.free, [(eta0, eta)], n, config)


def _loop_one(args) -> np.ndarray | None:
    x, loop, config = args
    return _point_legs(x, list(zip(loop[:-1], loop[1:])), len(x) // 2, config)


def solve_critical_points(spec: CriticalPointSpec | Sequence[complex],
                          config: SolverConfig = SolverConfig()) -> list[RationalMap]:
    """All normalized maps found with critical points exactly ``spec.points``.

    Each start samples a random map, uses its own critical points as the
    start instance and tracks the solution while the points move linearly
    to the targets. Loops around random point configurations then permute
    the known solutions until a few rounds in a row add nothing new.
    Results are deduplicated and sorted canonically.
    """
    if not isinstance(spec, CriticalPointSpec):
        spec = CriticalPointSpec(tuple(spec))
    n = spec.n
    eta = np.array(spec.points)
    tasks = [(eta, s, config) for s in start_seeds(config)]
    ends = [x for x in run_pool(_track_one, tasks, config.workers) if x is not None]
    sols: list[np.ndarray] = []

    def absorb(candidates):
        added = 0
        for x in candidates:
            if x is None or any(np.max(np.abs(x - s)) < config.dedup_radius for s in sols):
                continue
            F = RationalMap.from_free(x[:n], x[n:])
            if verify_critical_points(F, spec).passed and coprime_check(F.P, F.Q):
                sols.append(x)
                added += 1
        return added

    absorb(ends)
    rng = monodromy_rng(config)
    idle = 0
    for _ in range(config.monodromy_max_rounds if sols else 0):
        if idle >= config.monodromy_patience:
            break
        loop = random_triangle(eta, rng)
        found = run_pool(_loop_one, [(x, loop, config) for x in sols], config.workers)
        idle = 0 if absorb(found) else idle + 1
    if not sols:
        raise NoSolutionFound("no homotopy start reached a verified solution",
                              starts=config.num_starts, endpoints=len(ends))
    maps = [RationalMap.from_free(x[:n], x[n:]) for x in sols]
    maps.sort(key=lambda F: canonical_key(F.free))
    return maps
