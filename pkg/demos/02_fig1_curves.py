"""Curve data for the error-exponent figure, written as CSV through the CLI.

Produces curves_main.csv (hull and plain E0 objectives) and curves_class.csv
(the two per-class objectives of the best-pair construction) in ./fig1_out.
If matplotlib is around, it also draws them.

Run:  python3 demos/02_fig1_curves.py
"""
import csv
import json
import os
import tempfile

import numpy as np

from jsccexp import cli

out = os.path.abspath("fig1_out")
cfg = {
    "schema_version": 1,
    "source": [0.972, 0.028],
    "channel": {"preset": "example-6x4", "xi1": 0.065, "xi2": 0.01},
    "t": 2,
    "base": "bits",
}
with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
    json.dump(cfg, fh)
code, doc = cli.run(["sweep-rho", "--config", fh.name, "--out", out])
os.unlink(fh.name)
assert code == 0, code

res = doc["results"]
print(f"E_J^G  = {res['gallager']:.6f} bits")
print(f"E_J^Cs = {res['csiszar']:.6f} bits")
for i, pk in enumerate(res["class_peaks"], start=1):
    print(f"class {i} curve peaks at rho={pk['rho']:.4f} with {pk['value']:.6f}")


def load(name):
    with open(os.path.join(out, name), newline="") as f:
        rows = list(csv.reader(f))
    return rows[0], np.array(rows[1:], dtype=float)


hm, main = load("curves_main.csv")
hc, cls = load("curves_class.csv")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(main[:, 0], main[:, 1], label="hull E0 - t Es")
    ax.plot(main[:, 0], main[:, 2], "--", label="E0 - t Es")
    ax.plot(cls[:, 0], cls[:, 1], ":", label="class 1")
    ax.plot(cls[:, 0], cls[:, 2], ":", label="class 2")
    ax.axhline(res["csiszar"], color="k", lw=0.5)
    ax.set_ylim(0, 0.1)
    ax.set_xlabel("rho")
    ax.set_ylabel("bits / channel use")
    ax.legend()
    fig.savefig(os.path.join(out, "fig1.png"), dpi=120, bbox_inches="tight")
    print("wrote", os.path.join(out, "fig1.png"))
