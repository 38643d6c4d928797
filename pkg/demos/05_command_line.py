"""
The same pipeline through the command line: solve, emit JSON/CSV/SVG and
re-verify the emitted document.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path


def openup(*args):
    proc = subprocess.run([sys.executable, "-m", "openup", *args], capture_output=True, text=True)
    print("$ openup", " ".join(args), " -> exit", proc.returncode)
    for line in (proc.stdout + proc.stderr).strip().splitlines()[:4]:
        print("   ", line[:120])
    return proc


work = Path(tempfile.mkdtemp())
(work / "eta.json").write_text(json.dumps({"n": 1, "eta": [[1, 0], [-1, 0]]}))
(work / "zeta.json").write_text(json.dumps({"n": 1, "zeta": [[2, 0], [2, 0]]}))
(work / "arcs.json").write_text(json.dumps({"arcs": [[[-2, 0], [0, 0], [2, 0]]]}))

openup("critpts", "--input", str(work / "eta.json"))
openup("critvals", "--input", str(work / "zeta.json"))  # duplicate values: exit 1
openup("openup", "--input", str(work / "arcs.json"), "--output", str(work / "seg.json"),
       "--emit", "json,csv,svg")
openup("verify", "--input", str(work / "seg.json"))
print("files:", sorted(p.name for p in work.iterdir()))
