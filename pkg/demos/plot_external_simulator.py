"""
Validating an external simulator from the command line
======================================================

Any program that reads ``inputs.csv`` (columns ``x1..xd``) and writes
``outputs.csv`` (column ``y``) can be plugged in. Here a small Python script
stands in for an expensive simulator, and the whole pipeline runs through
the ``stochdiag`` command.
"""

import subprocess
import sys
from pathlib import Path

work = Path("external_demo")
work.mkdir(exist_ok=True)
(work / "sim.py").write_text(
    "import csv, random\n"
    "rows = list(csv.DictReader(open('inputs.csv')))\n"
    "rnd = random.Random(len(rows))\n"
    "with open('outputs.csv', 'w') as fh:\n"
    "    fh.write('y\\n')\n"
    "    for r in rows:\n"
    "        x = float(r['x1'])\n"
    "        fh.write(repr(3 * x + rnd.gauss(0, 0.2 + x)) + '\\n')\n"
)
(work / "config.yaml").write_text(
    "seed: 4\n"
    "design: {n_train: 15, r_train: 10, r_val: 5, lhs_restarts: 200}\n"
    f"simulator: {{name: 'exec:{sys.executable} sim.py', workdir: {str(work)!r}}}\n"
)


def stochdiag(*args):
    cmd = [sys.executable, "-m", "stochdiag.cli", "--config", str(work / "config.yaml"), "--out-dir", str(work / "out")]
    subprocess.run(cmd + list(args), check=True)


out = work / "out"
stochdiag("design")
stochdiag("simulate", "--design", str(out / "train_design.csv"), "--output", "train_runs.csv")
stochdiag("simulate", "--design", str(out / "validation_design.csv"), "--output", "validation_runs.csv")
stochdiag("fit", "--runs", str(out / "train_runs.csv"))
stochdiag("validate", "--model", str(out / "model.json"), "--runs", str(out / "validation_runs.csv"), "--plots")
