"""Normalized rational maps with prescribed critical values.

Unknowns are the free coefficients of P and Q together with the critical
points ``z_1..z_2n``; the 4n equations are ``P(z_j) - zeta_j Q(z_j) = 0``
and ``W(z_j) = 0`` with ``W = P'Q - PQ'``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .critpoints import _segment_min_gap, sample_start_map
from .errors import (
    DegenerateSpec,
    MultiplePole,
    NoSolutionFound,
    NumericalError,
    PathCollision,
    StalledAlternation,
    ValidationError,
)
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
    ComplexPolynomial,
    RationalMap,
    canonical_key,
    coeffs_from_roots,
    coprime_check,
    derivative,
    evaluate,
    min_separation,
    roots,
)

SEPARATION_TOL = 1e-8


@dataclass(frozen=True)
class CriticalValueSpec:
    values: tuple[complex, ...]

    def __post_init__(self):
        vals = tuple(complex(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 2 or len(vals) % 2:
            raise ValidationError("need an even number (>= 2) of critical values", count=len(vals))
        sep = min_separation(vals)
        if sep <= SEPARATION_TOL:
            raise DegenerateSpec("critical values are not pairwise distinct", separation=sep)

    @property
    def n(self) -> int:
        return len(self.values) // 2


def _as_spec(spec) -> CriticalValueSpec:
    return spec if isinstance(spec, CriticalValueSpec) else CriticalValueSpec(tuple(spec))


@dataclass(frozen=True)
class CritvalState:
    """Free coefficients and nodes; ``aux`` optionally holds 1/Q(z_j)."""

    p: np.ndarray
    q: np.ndarray
    z: np.ndarray
    aux: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.p)

    @classmethod
    def from_vector(cls, x: np.ndarray, n: int) -> CritvalState:
        x = np.asarray(x, dtype=complex)
        return cls(x[:n], x[n:2 * n], x[2 * n:4 * n])

    def vector(self) -> np.ndarray:
        return np.concatenate([self.p, self.q, self.z]).astype(complex)

    def map(self) -> RationalMap:
        return RationalMap.from_free(self.p, self.q)

    def with_aux(self) -> CritvalState:
        Qz = evaluate(self.map().Q, self.z)
        return CritvalState(self.p, self.q, self.z, 1.0 / Qz)

    def aux_residual(self) -> np.ndarray:
        """``1 - y_j Q(z_j)``; zero when the no-pole witnesses are consistent."""
        if self.aux is None:
            raise ValueError("state carries no auxiliary variables")
        return 1.0 - self.aux * evaluate(self.map().Q, self.z)


def _powers(z: np.ndarray, m: int) -> np.ndarray:
    """Rows z_j**k for k = 0..m-1."""
    return z[:, None] ** np.arange(m)[None, :]


def _eval_all(x: np.ndarray, n: int):
    p = np.concatenate([x[:n], [0.0, 1.0]])
    q = np.concatenate([x[n:2 * n], [1.0]])
    z = x[2 * n:]
    P, Q = ComplexPolynomial(p), ComplexPolynomial(q)
    dP, dQ = derivative(P), derivative(Q)
    ddP, ddQ = derivative(dP), derivative(dQ)
    return z, [evaluate(f, z) for f in (P, dP, ddP, Q, dQ, ddQ)]


def _residual_vec(x: np.ndarray, zeta: np.ndarray, n: int) -> np.ndarray:
    z, (Pz, dPz, _, Qz, dQz, _) = _eval_all(x, n)
    return np.concatenate([Pz - zeta * Qz, dPz * Qz - Pz * dQz])


def _jacobian(x: np.ndarray, zeta: np.ndarray, n: int) -> np.ndarray:
    z, (Pz, dPz, ddPz, Qz, dQz, ddQz) = _eval_all(x, n)
    m = 2 * n
    pw = _powers(z, n)
    k = np.arange(n)
    dpw = np.zeros_like(pw)
    if n > 1:
        dpw[:, 1:] = k[1:] * z[:, None] ** (k[1:] - 1)
    J = np.zeros((2 * m, 2 * m), dtype=complex)
    J[:m, :n] = pw
    J[:m, n:m] = -zeta[:, None] * pw
    J[:m, m:] = np.diag(dPz - zeta * dQz)
    J[m:, :n] = dpw * Qz[:, None] - pw * dQz[:, None]
    J[m:, n:m] = dPz[:, None] * pw - Pz[:, None] * dpw
    J[m:, m:] = np.diag(ddPz * Qz - Pz * ddQz)
    return J


def _residual_scale(x: np.ndarray, zeta: np.ndarray, n: int) -> float:
    p = np.abs(np.concatenate([x[:n], [0.0, 1.0]]))
    q = np.abs(np.concatenate([x[n:2 * n], [1.0]]))
    az = np.abs(x[2 * n:])
    s = evaluate(ComplexPolynomial(p), az).real + np.abs(zeta) * evaluate(ComplexPolynomial(q), az).real
    return max(1.0, float(np.max(s)))


def residuals(state: CritvalState, spec) -> np.ndarray:
    spec = _as_spec(spec)
    if state.n != spec.n or len(state.z) != 2 * spec.n:
        raise ValidationError("state dimension does not match the spec")
    return _residual_vec(state.vector(), np.array(spec.values), spec.n)


def residual_jacobian(state: CritvalState, spec) -> np.ndarray:
    spec = _as_spec(spec)
    return _jacobian(state.vector(), np.array(spec.values), spec.n)


# --- partial fractions and normalization ---------------------------------

@dataclass(frozen=True)
class PartialFractionForm:
    """``a z + b + sum r_j / (z - pole_j)``."""

    a: complex
    b: complex
    residues: np.ndarray = field(repr=False)
    poles: np.ndarray = field(repr=False)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.a * z + self.b
        for r, s in zip(self.residues, self.poles):
            out = out + r / (z - s)
        return out


def partial_fractions(P: ComplexPolynomial, Q: ComplexPolynomial,
                      cluster_radius: float = 1e-6) -> PartialFractionForm:
    n = Q.degree
    if P.degree != n + 1:
        raise ValidationError(f"expected type (n+1, n), got ({P.degree}, {n})")
    rs = roots(Q, cluster_radius) if n > 0 else None
    if rs is not None and any(m > 1 for m in rs.multiplicities):
        raise MultiplePole("denominator has a repeated root", multiplicities=rs.multiplicities)
    a = P.leading() / Q.leading()
    b = (P.coeff(n) - a * Q.coeff(n - 1)) / Q.leading()
    poles = rs.locations if rs is not None else np.zeros(0, dtype=complex)
    res = evaluate(P, poles) / evaluate(derivative(Q), poles) if n > 0 else np.zeros(0, dtype=complex)
    return PartialFractionForm(complex(a), complex(b), res, poles)


def affine_shift(P: ComplexPolynomial, Q: ComplexPolynomial) -> tuple[complex, complex]:
    """``(a, d)`` with ``F((z - d)/a) = z + O(1)`` and zero z**n coefficient."""
    pf = partial_fractions(P, Q)
    n = Q.degree
    d = (pf.b - pf.a * np.sum(pf.poles)) / (n + 1)
    return pf.a, complex(d)


def normalize_map(P: ComplexPolynomial | Sequence[complex],
                  Q: ComplexPolynomial | Sequence[complex]) -> RationalMap:
    """Normalized form of ``F = P/Q`` under ``z -> (z - d)/a``.

    Critical points move as ``eta -> a eta + d``; critical values are kept.
    Raises ``MultiplePole`` if Q has a repeated root.
    """
    P = P if isinstance(P, ComplexPolynomial) else ComplexPolynomial(P)
    Q = Q if isinstance(Q, ComplexPolynomial) else ComplexPolynomial(Q)
    n = Q.degree
    pf = partial_fractions(P, Q)
    d = (pf.b - pf.a * np.sum(pf.poles)) / (n + 1)
    new_poles = d + pf.a * pf.poles
    Qs = coeffs_from_roots(new_poles)
    Ps = ComplexPolynomial([pf.b - d, 1.0]) * Qs
    for j in range(n):
        Ps = Ps + (pf.a * pf.residues[j]) * coeffs_from_roots(np.delete(new_poles, j))
    p = Ps.padded(n + 2)
    p[n + 1], p[n] = 1.0, 0.0
    return RationalMap(ComplexPolynomial(p), Qs, n)


# --- weak Hermite interpolation and alternation --------------------------

def weak_hermite_matrix(nodes: Sequence[complex], values: Sequence[complex]) -> np.ndarray:
    """Rows ``A(z_j) - zeta_j B(z_j)`` then ``A'(z_j) - zeta_j B'(z_j)``.

    Columns are the coefficients of A (degree <= n+1) then B (degree <= n).
    """
    z = np.asarray(nodes, dtype=complex)
    zeta = np.asarray(values, dtype=complex)
    n = len(z) // 2
    pa, pb = _powers(z, n + 2), _powers(z, n + 1)
    ka, kb = np.arange(n + 2), np.arange(n + 1)
    da = np.zeros_like(pa)
    da[:, 1:] = ka[1:] * z[:, None] ** (ka[1:] - 1)
    db = np.zeros_like(pb)
    db[:, 1:] = kb[1:] * z[:, None] ** (kb[1:] - 1)
    top = np.hstack([pa, -zeta[:, None] * pb])
    bot = np.hstack([da, -zeta[:, None] * db])
    return np.vstack([top, bot])


def weak_hermite_solve(nodes: Sequence[complex], spec, rank_tol: float = 1e-10
                       ) -> list[tuple[ComplexPolynomial, ComplexPolynomial]]:
    """Basis of the solution space of the weak Hermite problem.

    Null space of the 4n x (2n+3) system by SVD; singular values below
    ``rank_tol`` times the largest count as zero. Rows are scaled to unit
    norm first, which leaves the null space unchanged.
    """
    spec = _as_spec(spec)
    nodes = np.asarray(nodes, dtype=complex)
    if len(nodes) != 2 * spec.n:
        raise ValidationError("need 2n nodes")
    if min_separation(nodes) <= SEPARATION_TOL:
        raise DegenerateSpec("nodes are not pairwise distinct")
    M = weak_hermite_matrix(nodes, spec.values)
    M = M / np.linalg.norm(M, axis=1, keepdims=True)
    n = spec.n
    _, s, Vh = np.linalg.svd(M)
    rank = int(np.sum(s > rank_tol * s[0]))
    basis = []
    for v in Vh[rank:].conj():
        basis.append((ComplexPolynomial(v[:n + 2]), ComplexPolynomial(v[n + 2:])))
    return basis


def match_values(computed: Sequence[complex], prescribed: Sequence[complex]):
    """Optimal assignment ``perm`` with ``computed[perm[j]] ~ prescribed[j]``.

    Returns ``(perm, max_distance, greedy_collisions)``; the last counts how
    often plain nearest-neighbour matching would reuse a computed value.
    """
    a = np.asarray(computed, dtype=complex)
    b = np.asarray(prescribed, dtype=complex)
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(len(b), dtype=int)
    perm[cols] = rows
    dist = float(cost[rows, cols].max()) if len(rows) else 0.0
    nearest = cost.argmin(axis=0)
    collisions = len(nearest) - len(set(nearest.tolist()))
    return perm, dist, collisions


def alternation_heuristic(spec, initial: RationalMap, config: SolverConfig = SolverConfig(),
                          max_iter: int = 50) -> RationalMap:
    """Alternate between critical points and the weak Hermite problem.

    Only a warm-start accelerator: raises ``StalledAlternation`` whenever the
    interpolation space is not one-dimensional, the pair degenerates, or the
    iteration cap is hit.
    """
    spec = _as_spec(spec)
    F = initial
    for _ in range(max_iter):
        try:
            rs = F.critical_points()
        except NumericalError as exc:
            raise StalledAlternation("critical points unavailable") from exc
        if len(rs) != 2 * spec.n or any(m != 1 for m in rs.multiplicities):
            raise StalledAlternation("current map lacks 2n simple critical points")
        perm, _, _ = match_values(F(rs.locations), spec.values)
        nodes = rs.locations[perm]
        basis = weak_hermite_solve(nodes, spec)
        if len(basis) != 1:
            raise StalledAlternation("interpolation space is not one-dimensional", dim=len(basis))
        A, B = basis[0]
        scale = max(np.max(np.abs(A.coeffs)), np.max(np.abs(B.coeffs)))
        if (A.degree != spec.n + 1 or B.degree != spec.n
                or abs(A.leading()) < 1e-10 * scale or abs(B.leading()) < 1e-10 * scale
                or not coprime_check(A, B)):
            raise StalledAlternation("degenerate interpolating pair")
        try:
            G = normalize_map(A, B)
        except NumericalError as exc:
            raise StalledAlternation("normalization failed") from exc
        moved = np.max(np.abs(G.free - F.free))
        F = G
        if moved < 1e-12 * (1 + np.max(np.abs(F.free))):
            if verify_critical_values(F, spec).passed:
                return F
            raise StalledAlternation("fixed point does not match the values")
    raise StalledAlternation("iteration cap reached", iterations=max_iter)


# --- verification ---------------------------------------------------------

@dataclass
class CriticalValueReport:
    passed: bool
    distance: float
    critical_points: np.ndarray
    multiplicities: list[int]
    greedy_collisions: int

    def to_dict(self):
        return {"passed": self.passed, "distance": self.distance,
                "multiplicities": self.multiplicities,
                "greedy_collisions": self.greedy_collisions}


def verify_critical_values(F: RationalMap, spec, tol: float = 1e-7) -> CriticalValueReport:
    spec = _as_spec(spec)
    rs = F.critical_points()
    simple = len(rs) == 2 * spec.n and all(m == 1 for m in rs.multiplicities)
    if not simple:
        return CriticalValueReport(False, np.inf, rs.locations, rs.multiplicities, 0)
    vals = F(rs.locations)
    perm, dist, coll = match_values(vals, spec.values)
    return CriticalValueReport(bool(dist < tol), dist, rs.locations[perm], rs.multiplicities, coll)


# --- homotopy solve --------------------------------------------------------

@dataclass(frozen=True)
class CritvalSolution:
    map: RationalMap
    nodes: np.ndarray
    residual: float


def _start_instance(n, rng, zeta, retries=20):
    for _ in range(retries):
        F0, z0 = sample_start_map(n, rng)
        zeta0 = F0(z0)
        if min_separation(zeta0) <= 1e-2:
            continue
        perm = rng.permutation(2 * n)
        z0, zeta0 = z0[perm], zeta0[perm]
        if _segment_min_gap(zeta0, zeta) > 1e-6:
            return F0, z0, zeta0
    return None


def _value_legs(x0, legs, n, config):
    """Track x0 along consecutive straight value segments."""
    x = x0
    for zeta_a, zeta_b in legs:
        dz = zeta_b - zeta_a

        def H(v, t, za=zeta_a, dz=dz):
            return _residual_vec(v, za + t * dz, n)

        def Hx(v, t, za=zeta_a, dz=dz):
            return _jacobian(v, za + t * dz, n)

        def Ht(v, t, dz=dz):
            _, (_, _, _, Qz, _, _) = _eval_all(v, n)
            return np.concatenate([-dz * Qz, np.zeros(2 * n, dtype=complex)])

        x = track(H, Hx, Ht, x, config)
        if x is None:
            return None
    try:
        return polish(x, legs[-1][1], n, config)
    except NumericalError:
        return None


def _track_one(args):
    zeta, seed, config = args
    rng = np.random.default_rng(seed)
    n = len(zeta) // 2
    inst = _start_instance(n, rng, zeta)
    if inst is None:
        return "collision"
    F0, z0, zeta0 = inst
    return _value_legs(np.concatenate([F0.free, z0]), [(zeta0, zeta)], n, config)


def _loop_one(args):
    x, loop, config = args
    legs = list(zip(loop[:-1], loop[1:]))
    return _value_legs(x, legs, len(x) // 4, config)


def polish(x: np.ndarray, zeta: np.ndarray, n: int, config: SolverConfig) -> np.ndarray:
    return newton(lambda v: _residual_vec(v, zeta, n), lambda v: _jacobian(v, zeta, n), x,
                  config.newton_tol, config.max_newton_iters,
                  scale=lambda v: _residual_scale(v, zeta, n))


def admissible(x: np.ndarray, zeta: np.ndarray, n: int) -> bool:
    """No-pole and node-distinctness filter for a polished endpoint."""
    F = RationalMap.from_free(x[:n], x[n:2 * n])
    z = x[2 * n:]
    Qz = np.abs(evaluate(F.Q, z))
    if np.any(Qz <= 1e-8 * (1 + np.max(np.abs(F.Q.coeffs)))):
        return False
    if min_separation(z) <= 1e-6:
        return False
    return bool(coprime_check(F.P, F.Q)) and verify_critical_values(F, CriticalValueSpec(tuple(zeta))).passed


def solve_critical_values(spec, config: SolverConfig = SolverConfig()) -> list[CritvalSolution]:
    """All normalized maps found whose critical values are ``spec.values``.

    Nodes are returned in the order of ``spec.values``. Raises
    ``NoSolutionFound`` if every start fails and ``PathCollision`` if no start
    could draw a collision-free value segment.
    """
    spec = _as_spec(spec)
    n = spec.n
    zeta = np.array(spec.values)
    tasks = [(zeta, s, config) for s in start_seeds(config)]
    outs = run_pool(_track_one, tasks, config.workers)
    if all(isinstance(o, str) for o in outs):
        raise PathCollision("every start met a value collision", starts=config.num_starts)
    ends = [o for o in outs if isinstance(o, np.ndarray)]
    sols: list[np.ndarray] = []

    def absorb(candidates):
        added = 0
        for x in candidates:
            if x is None or isinstance(x, str) or not admissible(x, zeta, n):
                continue
            if any(np.max(np.abs(x[:2 * n] - s[:2 * n])) < config.dedup_radius for s in sols):
                continue
            sols.append(x)
            added += 1
        return added

    absorb(ends)
    rng = monodromy_rng(config)
    idle = 0
    for _ in range(config.monodromy_max_rounds if sols else 0):
        if idle >= config.monodromy_patience:
            break
        loop = random_triangle(zeta, rng)
        found = run_pool(_loop_one, [(x, loop, config) for x in sols], config.workers)
        idle = 0 if absorb(found) else idle + 1
    if not sols:
        raise NoSolutionFound("no homotopy start reached an admissible solution",
                              starts=config.num_starts, endpoints=len(ends))
    out = []
    for x in sols:
        F = RationalMap.from_free(x[:n], x[n:2 * n])
        out.append(CritvalSolution(F, x[2 * n:].copy(),
                                   float(np.max(np.abs(_residual_vec(x, zeta, n))))))
    out.sort(key=lambda s: canonical_key(s.map.free))
    return out
