"""JSON documents, CSV and SVG export.

Complex numbers are always ``[re, im]`` pairs and polynomials are lists of
pairs, lowest power first. Every emitted document carries ``"schema": 1``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Sequence

import numpy as np

from .errors import ValidationError
from .poly import ComplexPolynomial, RationalMap

SCHEMA = 1


def _clean(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        return x
    return 0.0 if abs(x) < 1e-14 else x


def to_pair(z: complex) -> list[float]:
    z = complex(z)
    return [_clean(z.real), _clean(z.imag)]


def to_pairs(zs) -> list[list[float]]:
    return [to_pair(z) for z in np.asarray(zs, dtype=complex).ravel()]


def from_pair(v: Any) -> complex:
    if (not isinstance(v, (list, tuple)) or len(v) != 2
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
        raise ValidationError(f"expected a [re, im] pair, got {v!r}")
    return complex(v[0], v[1])


def from_pairs(vs: Any) -> list[complex]:
    if not isinstance(vs, list):
        raise ValidationError("expected a list of [re, im] pairs")
    return [from_pair(v) for v in vs]


def poly_to_json(p: ComplexPolynomial) -> list[list[float]]:
    return to_pairs(p.coeffs)


def poly_from_json(v: Any) -> ComplexPolynomial:
    return ComplexPolynomial(from_pairs(v))


def map_to_json(F: RationalMap) -> dict:
    return {"P": poly_to_json(F.P), "Q": poly_to_json(F.Q)}


def map_from_json(doc: dict) -> RationalMap:
    try:
        P, Q = poly_from_json(doc["P"]), poly_from_json(doc["Q"])
    except KeyError as exc:
        raise ValidationError(f"map is missing field {exc}") from None
    try:
        return RationalMap(P, Q, Q.degree)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def jsonable(obj: Any) -> Any:
    """Recursively convert numpy and complex values; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return to_pair(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(jsonable({"schema": SCHEMA, **doc}), separators=(", ", ": ")) + "\n"


def _require(doc: dict, key: str):
    if key not in doc:
        raise ValidationError(f"document is missing field '{key}'")
    return doc[key]


def _check_n(doc: dict, points: list) -> None:
    if "n" in doc:
        n = doc["n"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1 or len(points) != 2 * n:
            raise ValidationError(f"field 'n' = {n!r} does not match {len(points)} points")


def _check_schema(doc: Any) -> dict:
    if not isinstance(doc, dict):
        raise ValidationError("top-level JSON value must be an object")
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise ValidationError(f"unsupported schema version {doc.get('schema')!r}")
    return doc


def parse_critpts(doc: Any) -> list[complex]:
    doc = _check_schema(doc)
    eta = from_pairs(_require(doc, "eta"))
    _check_n(doc, eta)
    return eta


def parse_critvals(doc: Any) -> list[complex]:
    doc = _check_schema(doc)
    zeta = from_pairs(_require(doc, "zeta"))
    _check_n(doc, zeta)
    return zeta


def parse_arcs(doc: Any) -> list[list[complex]]:
    doc = _check_schema(doc)
    arcs = _require(doc, "arcs")
    if not isinstance(arcs, list) or not arcs:
        raise ValidationError("'arcs' must be a nonempty list of polylines")
    return [from_pairs(a) for a in arcs]


def curves_csv(curves: Sequence[np.ndarray]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["curve", "index", "re", "im"])
    for ci, c in enumerate(curves):
        for k, z in enumerate(c):
            w.writerow([ci, k, repr(float(z.real)), repr(float(z.imag))])
    return buf.getvalue()


def curves_svg(arcs: Sequence[Sequence[complex]], curves: Sequence[np.ndarray],
               points: Sequence[complex] = (), size: int = 600) -> str:
    """Static figure; the viewBox is in data units with y flipped."""
    allpts = [complex(z) for a in arcs for z in a] + [complex(z) for c in curves for z in c]
    allpts += [complex(z) for z in points]
    if not allpts:
        allpts = [0j]
    xs = [z.real for z in allpts]
    ys = [-z.imag for z in allpts]
    span = max(max(xs) - min(xs), max(ys) - min(ys), 1e-9)
    pad = 0.08 * span
    x0, y0 = min(xs) - pad, min(ys) - pad
    w, h = max(xs) - min(xs) + 2 * pad, max(ys) - min(ys) + 2 * pad
    r = 0.008 * span

    def pts(zs, close=False):
        zs = [complex(z) for z in zs]
        if close and zs:
            zs = zs + [zs[0]]
        return " ".join(f"{z.real:.9g},{-z.imag:.9g}" for z in zs)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{round(size * h / w)}" '
        f'viewBox="{x0:.9g} {y0:.9g} {w:.9g} {h:.9g}">',
        "<style>.arc{fill:none;stroke:#c0392b;stroke-width:2}"
        ".boundary{fill:none;stroke:#2c3e50;stroke-width:1.5}"
        ".critical{fill:#27ae60}"
        " polyline,polygon{vector-effect:non-scaling-stroke}</style>",
    ]
    for c in curves:
        lines.append(f'<polygon class="boundary" points="{pts(c)}"/>')
    for a in arcs:
        lines.append(f'<polyline class="arc" points="{pts(a)}"/>')
    for z in points:
        z = complex(z)
        lines.append(f'<circle class="critical" cx="{z.real:.9g}" cy="{-z.imag:.9g}" r="{r:.9g}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
