"""Open-up maps for systems of disjoint arcs.

A map of type (n+1, n) opens up arcs gamma_1..gamma_n when it sends the
exterior of a compact set K bijectively onto the complement of the arcs.
The endpoints are then critical values, so candidates come from the
critical value solver and are filtered by :func:`verify_open_up`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import shapely
from scipy.stats import qmc
from shapely.geometry import LinearRing, LineString, MultiLineString

from .critvalues import CriticalValueSpec, solve_critical_values
from .errors import BranchJump, NoOpeningSolution, NumericalError, ValidationError
from .homotopy import SolverConfig
from .poly import RationalMap, RootSet, derivative, evaluate, min_separation, roots


def _xy(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.column_stack([z.real, z.imag])


@dataclass(frozen=True)
class Arc:
    """Polyline approximation of a Jordan arc."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex).ravel()
        if len(s) < 2:
            raise ValidationError("an arc needs at least two samples")
        if np.any(np.diff(s) == 0):
            raise ValidationError("consecutive arc samples coincide")
        if not LineString(_xy(s)).is_simple:
            raise ValidationError("arc polyline intersects itself")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def endpoints(self) -> tuple[complex, complex]:
        return complex(self.samples[0]), complex(self.samples[-1])

    def line(self) -> LineString:
        return LineString(_xy(self.samples))

    def resample(self, count: int) -> np.ndarray:
        """``count`` points along the polyline, graded toward both ends.

        Arclength ``s = L (1 - cos(pi u)) / 2``: preimages near an endpoint move
        like a square root of ``s``, so this keeps them evenly spaced.
        """
        seg = np.abs(np.diff(self.samples))
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        u = np.linspace(0.0, 1.0, count)
        s = cum[-1] * (1 - np.cos(np.pi * u)) / 2
        s = np.union1d(s, cum)
        idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(seg) - 1)
        frac = (s - cum[idx]) / seg[idx]
        out = self.samples[idx] + frac * (self.samples[idx + 1] - self.samples[idx])
        out[0], out[-1] = self.samples[0], self.samples[-1]
        return out


@dataclass(frozen=True)
class ArcSet:
    arcs: tuple[Arc, ...]

    def __post_init__(self):
        arcs = tuple(a if isinstance(a, Arc) else Arc(a) for a in self.arcs)
        object.__setattr__(self, "arcs", arcs)
        if not arcs:
            raise ValidationError("need at least one arc")
        ends = [e for a in arcs for e in a.endpoints]
        if min_separation(ends) <= 0:
            raise ValidationError("arc endpoints are not pairwise distinct")
        lines = [a.line() for a in arcs]
        for i in range(len(lines)):
            for j in range(i + 1, len(lines)):
                if lines[i].distance(lines[j]) <= 0:
                    raise ValidationError("arcs intersect", arcs=[i, j])

    @property
    def n(self) -> int:
        return len(self.arcs)

    @property
    def endpoints(self) -> list[complex]:
        return [e for a in self.arcs for e in a.endpoints]

    def distance(self, w: np.ndarray) -> np.ndarray:
        """Distance from each point of ``w`` to the nearest arc polyline."""
        geom = MultiLineString([a.line() for a in self.arcs])
        pts = shapely.points(_xy(w))
        return shapely.distance(pts, geom)


def fiber(F: RationalMap, w: complex, cluster_radius: float = 1e-6) -> RootSet:
    """Roots of ``P - w Q``: the points mapped to ``w``."""
    return roots(F.P - w * F.Q, cluster_radius)


@dataclass
class EndpointFiberReport:
    passed: bool
    per_endpoint: list[dict]


def verify_endpoint_fibers(F: RationalMap, endpoints: Sequence[complex],
                           cluster_radius: float = 1e-5) -> EndpointFiberReport:
    """Each endpoint must have n distinct preimages, exactly one of them double."""
    n = F.n
    rows = []
    for w in endpoints:
        rs = fiber(F, complex(w), cluster_radius)
        mult = sorted(rs.multiplicities, reverse=True)
        ok = len(rs) == n and mult[:1] == [2] and all(m == 1 for m in mult[1:])
        rows.append({"endpoint": complex(w), "multiplicities": mult, "passed": bool(ok)})
    return EndpointFiberReport(all(r["passed"] for r in rows), rows)


def _critical_point_over(F: RationalMap, w: complex) -> complex:
    crit = F.critical_points().locations
    return complex(crit[np.argmin(np.abs(F(crit) - w))])


def _newton_fiber(F: RationalMap, w: complex, z: complex, iters: int = 30) -> complex | None:
    dP, dQ = derivative(F.P), derivative(F.Q)
    for _ in range(iters):
        g = evaluate(F.P, z) - w * evaluate(F.Q, z)
        dg = evaluate(dP, z) - w * evaluate(dQ, z)
        if dg == 0:
            return None
        step = g / dg
        z = z - step
        if abs(step) < 1e-14 * (1 + abs(z)):
            return z
    return z if abs(step) < 1e-10 * (1 + abs(z)) else None


def _track_branch(F: RationalMap, w: np.ndarray, z0: complex, z1: complex,
                  tube: float, max_refine: int) -> list[complex]:
    """Continue the preimage branch through ``z0 -> z1`` along samples ``w``.

    ``w[0]`` maps to ``z0`` and ``w[1]`` to ``z1``. Predictor is linear
    extrapolation, corrector Newton on ``P - w Q``; a step that moves more
    than ``tube`` or lands nearer another fiber point is bisected.
    """
    out = [z0, z1]
    for k in range(2, len(w)):
        out.extend(_advance(F, w[k - 1], w[k], out[-1], out[-1] - out[-2], tube, max_refine))
    return out


def _advance(F, w_prev, w_next, z_prev, inc, tube, depth) -> list[complex]:
    pred = z_prev + inc
    z = _newton_fiber(F, w_next, pred)
    if z is not None and abs(z - z_prev) < tube and abs(z - pred) < 0.5 * tube:
        pts = fiber(F, w_next).locations
        mine = np.argmin(np.abs(pts - z))
        rivals = np.delete(pts, mine)
        if len(rivals) == 0 or np.min(np.abs(rivals - pred)) > abs(z - pred):
            return [z]
    if depth == 0:
        raise BranchJump("preimage branch jumped between sheets",
                         w=complex(w_next), predicted=complex(pred))
    w_mid = 0.5 * (w_prev + w_next)
    first = _advance(F, w_prev, w_mid, z_prev, 0.5 * inc, tube, depth - 1)
    before = first[-2] if len(first) > 1 else z_prev
    second = _advance(F, w_mid, w_next, first[-1], first[-1] - before, tube, depth - 1)
    return first + second


def trace_boundary(F: RationalMap, arc: Arc, samples: int = 400, max_refine: int = 12,
                   tube: float | None = None) -> np.ndarray:
    """Closed curve of ``K`` lying over ``arc``.

    Starts at the double preimage of the first endpoint, follows both local
    branches forward to the double preimage of the last endpoint, and joins
    the second branch reversed. Returns the closed polyline (first point not
    repeated).
    """
    w = arc.resample(samples)
    a, b = arc.endpoints
    eta_a = _critical_point_over(F, a)
    eta_b = _critical_point_over(F, b)
    if tube is None:
        pts = fiber(F, a, 1e-5).locations
        far = pts[np.abs(pts - eta_a) > 1e-9]
        if len(far):
            tube = 0.2 * float(np.min(np.abs(pts[:, None] - pts[None, :])[~np.eye(len(pts), dtype=bool)]))
        else:
            tube = 0.2 * abs(eta_b - eta_a)
    first = fiber(F, w[1]).locations
    order = np.argsort(np.abs(first - eta_a))
    starts = first[order[:2]]
    branches = []
    for s in starts:
        zs = _track_branch(F, w[:-1], eta_a, complex(s), tube, max_refine)
        branches.append(zs)
    for zs in branches:
        if abs(zs[-1] - eta_b) > tube:
            raise BranchJump("branch did not reach the far endpoint's double point",
                             gap=float(abs(zs[-1] - eta_b)))
    b1, b2 = branches
    return np.array(b1 + [eta_b] + b2[:0:-1], dtype=complex)


def _inside_any(curves: Sequence[np.ndarray], z: np.ndarray) -> np.ndarray:
    inside = np.zeros(len(z), dtype=bool)
    x, y = np.real(z), np.imag(z)
    for c in curves:
        poly = shapely.polygons(_xy(np.append(c, c[0])))
        inside |= shapely.contains_xy(poly, x, y)
    return inside


@dataclass
class OpenUpReport:
    endpoint_fibers: bool
    curves_simple_disjoint: bool
    exterior_single_valued: bool
    infinity_fixed: bool
    tube_distance: float
    details: dict = field(default_factory=dict)

    @property
    def checks(self) -> dict:
        return {"endpoint_fibers": self.endpoint_fibers,
                "curves_simple_disjoint": self.curves_simple_disjoint,
                "exterior_single_valued": self.exterior_single_valued,
                "infinity_fixed": self.infinity_fixed}

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {**self.checks, "passed": self.passed, "tube_distance": self.tube_distance,
                **self.details}


def probe_points(arcs: ArcSet, count: int = 200, margin: float = 1e-3, seed: int = 0) -> np.ndarray:
    """Quasi-random points in an enlarged bounding box, away from the arcs."""
    ends = np.concatenate([a.samples for a in arcs.arcs])
    lo = np.array([ends.real.min(), ends.imag.min()])
    hi = np.array([ends.real.max(), ends.imag.max()])
    pad = 0.5 * max(float(np.max(hi - lo)), 1.0)
    lo, hi = lo - pad, hi + pad
    sampler = qmc.Halton(d=2, scramble=True, seed=seed)
    out = np.zeros(0, dtype=complex)
    while len(out) < count:
        u = qmc.scale(sampler.random(2 * count), lo, hi)
        w = u[:, 0] + 1j * u[:, 1]
        out = np.concatenate([out, w[arcs.distance(w) > margin]])
    return out[:count]


def verify_open_up(F: RationalMap, arcs: ArcSet | Sequence, curves: Sequence[np.ndarray],
                   probes: int = 200, margin: float = 1e-3, seed: int = 0) -> OpenUpReport:
    """Four checks: endpoint fibers, curve geometry, exterior single-valuedness
    at probe values, and ``F(inf) = inf``."""
    if not isinstance(arcs, ArcSet):
        arcs = ArcSet(tuple(arcs))
    details: dict = {}
    try:
        ef = verify_endpoint_fibers(F, arcs.endpoints)
        fibers_ok = ef.passed and F.n == arcs.n
        details["endpoint_multiplicities"] = [r["multiplicities"] for r in ef.per_endpoint]
    except NumericalError:
        fibers_ok = False

    rings = [LinearRing(_xy(c)) for c in curves]
    simple = all(r.is_simple for r in rings) and len(rings) == arcs.n
    for i in range(len(rings)):
        for j in range(i + 1, len(rings)):
            if rings[i].intersects(rings[j]):
                simple = False
    curves_ok = bool(simple)

    bad = []
    for w in probe_points(arcs, probes, margin, seed):
        pts = fiber(F, w).locations
        outside = int(np.sum(~_inside_any(curves, pts)))
        if outside != 1:
            bad.append({"w": complex(w), "outside": outside})
    details["probe_failures"] = len(bad)
    single_ok = not bad

    inf_ok = F.P.degree == F.n + 1 and F.Q.degree == F.n

    tube = 0.0
    for arc, c in zip(arcs.arcs, curves):
        d = shapely.distance(shapely.points(_xy(F(c))), arc.line())
        tube = max(tube, float(np.max(d)))
    return OpenUpReport(bool(fibers_ok), curves_ok, single_ok, bool(inf_ok), tube, details)


def exterior_injectivity(F: RationalMap, curves: Sequence[np.ndarray], samples: int = 500,
                         seed: int = 0, tol: float = 1e-9) -> list[tuple[complex, complex]]:
    """Pairs ``z1 != z2`` of exterior points with ``F(z1) = F(z2)``.

    Sample ``z1`` outside the traced curves and check whether any other
    preimage of ``F(z1)`` is exterior too. Empty list means no violation.
    """
    pts = np.concatenate(curves)
    center = pts.mean()
    radius = 2.0 * float(np.max(np.abs(pts - center)))
    rng = np.random.default_rng(seed)
    found: list[complex] = []
    while len(found) < samples:
        r = radius * np.sqrt(rng.uniform(size=samples))
        z = center + r * np.exp(2j * np.pi * rng.uniform(size=samples))
        found.extend(z[~_inside_any(curves, z)].tolist())
    violations = []
    for z1 in found[:samples]:
        for z2 in fiber(F, F(z1)).locations:
            if abs(z2 - z1) > tol and not _inside_any(curves, np.array([z2]))[0]:
                violations.append((complex(z1), complex(z2)))
    return violations


@dataclass
class OpenUpResult:
    map: RationalMap
    nodes: np.ndarray
    boundary_curves: list[np.ndarray]
    correspondence: list[int]
    report: OpenUpReport
    rejected: list[dict] = field(default_factory=list)
    other_passing: list[RationalMap] = field(default_factory=list)


def open_up(arcs: ArcSet | Sequence, config: SolverConfig = SolverConfig(),
            samples: int = 400) -> OpenUpResult:
    """Map opening up ``arcs``: the canonically first critical-value solution
    that passes :func:`verify_open_up`. Raises ``NoOpeningSolution``."""
    if not isinstance(arcs, ArcSet):
        arcs = ArcSet(tuple(arcs))
    spec = CriticalValueSpec(tuple(arcs.endpoints))
    candidates = solve_critical_values(spec, config)
    chosen, rejected, others = None, [], []
    for idx, sol in enumerate(candidates):
        try:
            curves = [trace_boundary(sol.map, a, samples) for a in arcs.arcs]
        except NumericalError as exc:
            rejected.append({"candidate": idx, "reason": type(exc).__name__})
            continue
        report = verify_open_up(sol.map, arcs, curves)
        if not report.passed:
            rejected.append({"candidate": idx, "reason": "verification",
                             "checks": report.checks})
            continue
        if chosen is None:
            chosen = OpenUpResult(sol.map, sol.nodes, curves, list(range(arcs.n)), report)
        else:
            others.append(sol.map)
    if chosen is None:
        raise NoOpeningSolution("no critical value solution opens up the arcs",
                                candidates=len(candidates), rejected=rejected)
    chosen.rejected = rejected
    chosen.other_passing = others
    return chosen
