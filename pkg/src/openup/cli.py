"""Command-line front end: ``openup {critpts,critvals,openup,verify}``.

Exit codes: 0 success, 1 invalid input, 2 no (verified) solution,
3 internal numerical failure. Errors are printed to stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import formats
from .critpoints import CriticalPointSpec, solve_critical_points, verify_critical_points
from .critvalues import (
    CriticalValueSpec,
    CritvalState,
    residuals,
    solve_critical_values,
    verify_critical_values,
)
from .errors import NoOpeningSolution, NoSolutionFound, OpenUpError, ValidationError
from .homotopy import SolverConfig
from .openmap import ArcSet, open_up, trace_boundary, verify_open_up
from .poly import coprime_check, evaluate

EMIT_CHOICES = {"json", "csv", "svg"}


@dataclass
class RunConfig:
    command: str
    input_path: str
    output_path: str | None = None
    seed: int = 0
    num_starts: int = 16
    workers: int = 1
    tol_newton: float | None = None
    tol_dedup: float | None = None
    emit: set = field(default_factory=lambda: {"json"})

    def solver_config(self) -> SolverConfig:
        kw = {}
        if self.tol_newton is not None:
            kw["newton_tol"] = self.tol_newton
        if self.tol_dedup is not None:
            kw["dedup_radius"] = self.tol_dedup
        try:
            return SolverConfig(rng_seed=self.seed, num_starts=self.num_starts,
                                workers=self.workers, **kw)
        except ValueError as exc:
            raise ValidationError(str(exc)) from None


def _load(path: str) -> dict:
    try:
        text = Path(path).read_text() if path != "-" else sys.stdin.read()
    except OSError as exc:
        raise ValidationError(f"cannot read input: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from None


def _critpts_doc(eta, maps) -> dict:
    sols = []
    for F in maps:
        rep = verify_critical_points(F, eta)
        sols.append({**formats.map_to_json(F), "residual": rep.residual, "verified": rep.passed})
    return {"command": "critpts", "n": len(eta) // 2, "eta": formats.to_pairs(eta), "solutions": sols}


def _critvals_doc(zeta, sols) -> dict:
    out = []
    for s in sols:
        rep = verify_critical_values(s.map, zeta)
        out.append({**formats.map_to_json(s.map), "nodes": formats.to_pairs(s.nodes),
                    "residual": s.residual, "verified": rep.passed})
    return {"command": "critvals", "n": len(zeta) // 2, "zeta": formats.to_pairs(zeta), "solutions": out}


def _openup_doc(arcs, result) -> dict:
    return {
        "command": "openup",
        "arcs": [formats.to_pairs(a) for a in arcs],
        "map": formats.map_to_json(result.map),
        "nodes": formats.to_pairs(result.nodes),
        "boundary_curves": [formats.to_pairs(c) for c in result.boundary_curves],
        "correspondence": result.correspondence,
        "report": result.report.to_dict(),
        "other_passing": [formats.map_to_json(F) for F in result.other_passing],
        "rejected": result.rejected,
    }


def verify_document(doc: dict) -> dict:
    """Re-run every verification on an emitted result or a hand-written pair."""
    doc = formats._check_schema(doc)
    command = doc.get("command")
    results = []
    if command == "critpts" or (command is None and "eta" in doc):
        target = "critpts"
        eta = formats.parse_critpts(doc)
        entries = doc["solutions"] if command else [doc]
        for e in entries:
            F = formats.map_from_json(e)
            rep = verify_critical_points(F, eta)
            cop = coprime_check(F.P, F.Q)
            results.append({**rep.to_dict(), "coprime": cop.coprime,
                            "passed": rep.passed and cop.coprime})
    elif command == "critvals" or (command is None and "zeta" in doc):
        target = "critvals"
        zeta = formats.parse_critvals(doc)
        entries = doc["solutions"] if command else [doc]
        for e in entries:
            F = formats.map_from_json(e)
            rep = verify_critical_values(F, zeta)
            row = {**rep.to_dict(), "coprime": coprime_check(F.P, F.Q).coprime}
            if "nodes" in e:
                nodes = np.array(formats.from_pairs(e["nodes"]))
                st = CritvalState(F.free[:F.n], F.free[F.n:], nodes)
                row["node_residual"] = float(np.max(np.abs(residuals(st, zeta))))
                row["min_abs_Q_at_nodes"] = float(np.min(np.abs(evaluate(F.Q, nodes))))
            row["passed"] = bool(rep.passed and row["coprime"])
            results.append(row)
    elif command == "openup" or (command is None and "arcs" in doc):
        target = "openup"
        arcs = ArcSet(tuple(formats.parse_arcs(doc)))
        F = formats.map_from_json(doc["map"] if "map" in doc else doc)
        if "boundary_curves" in doc:
            curves = [np.array(formats.from_pairs(c)) for c in doc["boundary_curves"]]
        else:
            curves = [trace_boundary(F, a) for a in arcs.arcs]
        rep = verify_open_up(F, arcs, curves)
        crit = verify_critical_values(F, arcs.endpoints)
        results.append({**rep.to_dict(), "critical_values": crit.passed,
                         "passed": rep.passed and crit.passed})
    else:
        raise ValidationError("cannot tell what to verify: need 'command' or one of eta/zeta/arcs")
    return {"command": "verify", "target": target, "results": results,
            "passed": bool(results) and all(r["passed"] for r in results)}


def _summaries(doc: dict) -> list[str]:
    cmd = doc["command"]
    if cmd in ("critpts", "critvals"):
        return [f"solution {i}: residual={s['residual']:.3e} verified={s['verified']}"
                for i, s in enumerate(doc["solutions"])]
    if cmd == "openup":
        r = doc["report"]
        flags = " ".join(f"{k}={r[k]}" for k in ("endpoint_fibers", "curves_simple_disjoint",
                                                  "exterior_single_valued", "infinity_fixed"))
        return [f"open-up map: {flags} tube={r['tube_distance']:.3e}"]
    return [f"result {i}: passed={r['passed']}" for i, r in enumerate(doc["results"])]


def run(cfg: RunConfig) -> int:
    if not cfg.emit <= EMIT_CHOICES:
        raise ValidationError(f"unknown --emit entries: {sorted(cfg.emit - EMIT_CHOICES)}")
    if cfg.emit - {"json"} and (cfg.command != "openup" or not cfg.output_path):
        raise ValidationError("csv/svg emission needs the openup command and --output")
    doc_in = _load(cfg.input_path)
    solver = cfg.solver_config()
    curves, arcs_pts = None, None
    if cfg.command == "critpts":
        eta = formats.parse_critpts(doc_in)
        spec = CriticalPointSpec(tuple(eta))
        doc = _critpts_doc(eta, solve_critical_points(spec, solver))
        ok = True
    elif cfg.command == "critvals":
        zeta = formats.parse_critvals(doc_in)
        spec = CriticalValueSpec(tuple(zeta))
        doc = _critvals_doc(zeta, solve_critical_values(spec, solver))
        ok = True
    elif cfg.command == "openup":
        arcs_pts = formats.parse_arcs(doc_in)
        arcs = ArcSet(tuple(arcs_pts))
        result = open_up(arcs, solver)
        curves = result.boundary_curves
        doc = _openup_doc(arcs_pts, result)
        ok = True
    elif cfg.command == "verify":
        doc = verify_document(doc_in)
        ok = doc["passed"]
    else:
        raise ValidationError(f"unknown command {cfg.command!r}")

    text = formats.dumps(doc)
    summary_stream = sys.stdout
    if cfg.output_path and "json" in cfg.emit:
        Path(cfg.output_path).write_text(text)
    elif "json" in cfg.emit:
        sys.stdout.write(text)
        summary_stream = sys.stderr
    for line in _summaries(doc):
        print(line, file=summary_stream)
    if curves is not None and cfg.output_path:
        stem = Path(cfg.output_path).with_suffix("")
        if "csv" in cfg.emit:
            stem.with_suffix(".csv").write_text(formats.curves_csv(curves))
        if "svg" in cfg.emit:
            stem.with_suffix(".svg").write_text(
                formats.curves_svg(arcs_pts, curves, formats.from_pairs(doc["nodes"])))
    return 0 if ok else 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="openup", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in [("critpts", "maps with prescribed critical points"),
                        ("critvals", "maps with prescribed critical values"),
                        ("openup", "open-up map for a set of arcs"),
                        ("verify", "re-verify an emitted result")]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--input", required=True, help="input JSON file ('-' for stdin)")
        p.add_argument("--output", help="output JSON path (default: stdout)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--starts", type=int, default=16)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--emit", default="json", help="comma list from json,csv,svg")
        p.add_argument("--tol-newton", type=float)
        p.add_argument("--tol-dedup", type=float)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(args.command, args.input, args.output, args.seed, args.starts, args.workers,
                    args.tol_newton, args.tol_dedup,
                    {e.strip() for e in args.emit.split(",") if e.strip()})
    try:
        return run(cfg)
    except ValidationError as exc:
        code = 1
        err = exc
    except (NoSolutionFound, NoOpeningSolution) as exc:
        code = 2
        err = exc
    except OpenUpError as exc:
        code = 3
        err = exc
    except Exception as exc:  # noqa: BLE001
        code = 3
        err = OpenUpError(str(exc))
        err.diagnostic = {"type": type(exc).__name__}
    payload = {"error": type(err).__name__, "message": str(err),
               "diagnostic": formats.jsonable(err.diagnostic)}
    print(json.dumps(payload), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
