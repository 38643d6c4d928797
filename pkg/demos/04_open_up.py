"""
Opening up arcs.

Given disjoint arcs, find a rational map that sends the outside of a union of
closed curves one to one onto the outside of the arcs, trace those curves and
check the result. Writes an SVG figure next to this script.
"""

from pathlib import Path

import numpy as np

from openup import exterior_injectivity, formats, open_up

# One segment [-2, 2]: the Joukowski map, and the unit circle as boundary.
seg = np.linspace(-2, 2, 11).astype(complex)
res = open_up([seg])
curve = res.boundary_curves[0]
print(f"map: ({res.map.P}) / ({res.map.Q})")
print("max | |z| - 1 | on the traced curve:", np.max(np.abs(np.abs(curve) - 1)))
print("checks:", res.report.checks)
print("exterior pairs with equal image:", len(exterior_injectivity(res.map, res.boundary_curves)))

# Two segments on the real line.
arcs = [np.linspace(1, 2, 6).astype(complex), np.linspace(-2, -1, 6).astype(complex)]
res = open_up(arcs)
print(f"two segments: ({res.map.P}) / ({res.map.Q})")
print("checks:", res.report.checks, " tube distance:", res.report.tube_distance)
print("other maps passing every check:", len(res.other_passing))
print("candidates rejected:", [r["reason"] for r in res.rejected])

out = Path(__file__).with_name("two_segments.svg")
out.write_text(formats.curves_svg(arcs, res.boundary_curves, res.nodes))
print("wrote", out)
