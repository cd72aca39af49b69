#!/usr/bin/env python3
"""Plot an evolution record written by `sgjunction evolve`.

Usage: plot_evolution.py OUTDIR

Draws the deviation norm on a log scale with the fitted growth line from
evolution_fit.json, plus the relative energy drift.
"""

import json
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np


def main(argv):
    if len(argv) != 2:
        print(__doc__)
        return 1
    outdir = Path(argv[1])
    data = np.loadtxt(outdir / "evolution.csv", delimiter=",", skiprows=2)
    t, dev, energy = data[:, 0], data[:, 1], data[:, 2]
    fit = json.loads((outdir / "evolution_fit.json").read_text())

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax1.semilogy(t, dev, label="deviation norm")
    if fit.get("s") is not None:
        lo, hi = fit["window"]
        mask = (t >= lo) & (t <= hi)
        anchor = dev[mask][0]
        ax1.semilogy(
            t[mask], anchor * np.exp(fit["s"] * (t[mask] - t[mask][0])), "--",
            label=f"fit s={fit['s']:.4f}",
        )
    ax1.set_xlabel("t")
    ax1.legend(fontsize=8)
    ax2.plot(t, (energy - energy[0]) / max(abs(energy[0]), 1e-300))
    ax2.set_xlabel("t")
    ax2.set_ylabel("relative energy drift")
    fig.tight_layout()
    out = "evolution.png"
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
