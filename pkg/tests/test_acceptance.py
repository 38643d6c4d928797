"""Acceptance gate. Each test logs one PASS/FAIL line (see conftest)."""

import json
import time

import numpy as np
import pytest

from openup import (
    Arc,
    ComplexPolynomial,
    DegenerateSpec,
    RationalMap,
    SolverConfig,
    exterior_injectivity,
    open_up,
    rho_coefficients,
    solve_critical_points,
    solve_critical_values,
    verify_endpoint_fibers,
    verify_open_up,
    wronskian,
)
from openup.cli import main
from openup.critpoints import sample_start_map
from openup.critvalues import CritvalState, residual_jacobian, residuals

JOUKOWSKI = RationalMap(ComplexPolynomial([1, 0, 1]), ComplexPolynomial([0, 1]), 1)


def coeff_error(F, G):
    return float(np.max(np.abs(F.free - G.free)))


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def same_solution_sets(runs, tol=1e-8):
    """Equal sizes and, after canonical sorting, coefficientwise equal."""
    ref = runs[0]
    return all(len(r) == len(ref) and all(np.max(np.abs(a - b)) < tol for a, b in zip(r, ref))
               for r in runs[1:])


def test_01_joukowski_critical_points(record):
    maps, dt = timed(solve_critical_points, (1, -1))
    err = min(coeff_error(F, JOUKOWSKI) for F in maps)
    ok = err < 1e-10 and dt < 1.0
    record("1 joukowski critpts", ok, f"coef_err={err:.1e} time={dt:.2f}s")
    assert ok


def test_02_joukowski_critical_values(record):
    sols, dt = timed(solve_critical_values, (2, -2), SolverConfig(num_starts=16))
    best = min(sols, key=lambda s: coeff_error(s.map, JOUKOWSKI))
    err = coeff_error(best.map, JOUKOWSKI)
    node_err = float(np.max(np.abs(np.sort_complex(best.nodes) - np.array([-1, 1]))))
    ok = err < 1e-8 and node_err < 1e-8 and dt < 5.0
    record("2 joukowski critvals", ok,
           f"coef_err={err:.1e} node_err={node_err:.1e} time={dt:.2f}s")
    assert ok


def test_03_critical_point_round_trip(record):
    rng = np.random.default_rng(20240603)
    t0 = time.perf_counter()
    hits, errs = 0, []
    for i in range(100):
        n = 1 + i % 3
        F, eta = sample_start_map(n, rng, min_sep=1e-2)
        maps = solve_critical_points(eta, SolverConfig(rng_seed=i))
        e = min(coeff_error(F, G) for G in maps)
        errs.append(e)
        hits += e < 1e-8
    dt = time.perf_counter() - t0
    ok = hits >= 99 and dt < 300
    record("3 critpts round trip", ok, f"recovered={hits}/100 time={dt:.0f}s")
    assert ok


def test_04_critical_value_round_trip(record):
    rng = np.random.default_rng(20240604)
    t0 = time.perf_counter()
    hits = total = 0
    while total < 50:
        n = 1 + total % 2
        F, crit = sample_start_map(n, rng, min_sep=1e-2)
        vals = F(crit)
        d = np.abs(vals[:, None] - vals[None, :]) + np.eye(len(vals))
        if d.min() < 1e-2:
            continue
        sols = solve_critical_values(vals, SolverConfig(num_starts=16, rng_seed=total))
        hits += min(coeff_error(F, s.map) for s in sols) < 1e-7
        total += 1
    dt = time.perf_counter() - t0
    ok = hits >= 48 and dt < 600
    record("4 critvals round trip", ok, f"recovered={hits}/50 time={dt:.0f}s")
    assert ok


def test_05_finiteness(record):
    F, eta = sample_start_map(2, np.random.default_rng(5))
    G, crit = sample_start_map(2, np.random.default_rng(6))
    zeta = G(crit)
    pts = [[F.free for F in solve_critical_points(eta, SolverConfig(num_starts=64, rng_seed=s))]
           for s in (0, 1, 2)]
    vals = [[s.map.free for s in solve_critical_values(zeta, SolverConfig(num_starts=64,
                                                                          rng_seed=seed))]
            for seed in (0, 1, 2)]
    ok_p, ok_v = same_solution_sets(pts), same_solution_sets(vals)
    ok = ok_p and ok_v
    record("5 finiteness", ok,
           f"critpts counts={[len(r) for r in pts]} critvals counts={[len(r) for r in vals]}")
    assert ok


def test_06_open_up_segment(record):
    arc = np.linspace(-2, 2, 11).astype(complex)
    res = open_up([arc])
    curve = res.boundary_curves[0]
    radial = float(np.max(np.abs(np.abs(curve) - 1)))
    rep = verify_open_up(res.map, [arc], res.boundary_curves)
    bad = exterior_injectivity(res.map, res.boundary_curves, samples=500)
    ok = radial < 1e-6 and rep.passed and not bad
    record("6 open-up [-2,2]", ok,
           f"radial_dev={radial:.1e} checks={all(rep.checks.values())} "
           f"injectivity_violations={len(bad)}")
    assert ok


def test_07_open_up_two_segments(record):
    arcs = [np.linspace(1, 2, 6).astype(complex), np.linspace(-2, -1, 6).astype(complex)]
    res, dt = timed(open_up, arcs)
    ef = verify_endpoint_fibers(res.map, [1, 2, -2, -1])
    mults = [r["multiplicities"] for r in ef.per_endpoint]
    ok = res.report.passed and ef.passed and dt < 120
    record("7 open-up two segments", ok,
           f"checks={res.report.checks} fibers={mults} time={dt:.1f}s")
    assert ok


def test_08_identities(record):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 8))
        P = ComplexPolynomial(rng.normal(size=n + 2) + 1j * rng.normal(size=n + 2))
        Q = ComplexPolynomial(rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1))
        rho = rho_coefficients(P, Q, n)
        W = wronskian(P, Q).padded(2 * n + 1)
        worst = max(worst, float(np.max(np.abs(rho - W)) / np.max(np.abs(W))))
    jac_worst = 0.0
    for k in range(20):
        n = 1 + k % 3
        v = rng.normal(size=(4, 2 * n)) + 1j * rng.normal(size=(4, 2 * n))
        state, vals = CritvalState(v[0, :n], v[1, :n], v[2]), v[3]
        x, h = state.vector(), 1e-6
        J = residual_jacobian(state, vals)
        fd = np.column_stack([
            (residuals(CritvalState.from_vector(x + h * e, n), vals)
             - residuals(CritvalState.from_vector(x - h * e, n), vals)) / (2 * h)
            for e in np.eye(4 * n)])
        jac_worst = max(jac_worst, float(np.linalg.norm(J - fd) / np.linalg.norm(J)))
    ok = worst < 1e-13 and jac_worst < 1e-5
    record("8 identities", ok, f"rho_rel={worst:.1e} jacobian_rel={jac_worst:.1e}")
    assert ok


def test_09_negative_controls(record):
    try:
        solve_critical_points((1, 1))
        dup = False
    except DegenerateSpec:
        dup = True
    arc = [np.linspace(-2, 2, 11).astype(complex)]
    circle = np.exp(2j * np.pi * np.arange(400) / 400)
    minus = RationalMap(ComplexPolynomial([-1, 0, 1]), ComplexPolynomial([0, 1]), 1)
    check1 = not verify_open_up(minus, arc, [circle]).endpoint_fibers
    check3 = not verify_open_up(JOUKOWSKI, arc, [2 * circle]).exterior_single_valued
    ok = dup and check1 and check3
    record("9 negative controls", ok,
           f"duplicate_rejected={dup} check1_fails={check1} check3_fails={check3}")
    assert ok


@pytest.mark.parametrize("cmd,doc", [
    ("critpts", {"n": 1, "eta": [[1, 0], [-1, 0]]}),
    ("critvals", {"n": 1, "zeta": [[2, 0], [-2, 0]]}),
    ("openup", {"arcs": [[[-2, 0], [0, 0], [2, 0]]]}),
])
def test_10_determinism(record, tmp_path, capsys, cmd, doc):
    inp = tmp_path / "in.json"
    inp.write_text(json.dumps(doc))
    blobs = []
    for w in (1, 4):
        out = tmp_path / f"out{w}.json"
        assert main([cmd, "--input", str(inp), "--output", str(out), "--seed", "0",
                     "--workers", str(w)]) == 0
        blobs.append(out.read_bytes())
    capsys.readouterr()
    ok = blobs[0] == blobs[1]
    record(f"10 determinism {cmd}", ok, f"bytes={len(blobs[0])} identical={ok}")
    assert ok
