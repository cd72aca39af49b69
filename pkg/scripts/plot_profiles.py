#!/usr/bin/env python3
"""Plot the per-edge profile CSVs written by `sgjunction profile`.

Usage: plot_profiles.py OUTDIR [OUTDIR ...]

Each OUTDIR should contain profile_edge{0,1,2}.csv; one panel is drawn
per directory, which reproduces the three-regime profile figures (run
the profile command at Z = -5/2, -6/pi, -1/6 for the kink family, or
Z = -0.9, -2/pi, -0.25 for the kink/anti-kink family).
"""

import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np


def main(argv):
    dirs = [Path(a) for a in argv[1:]]
    if not dirs:
        print(__doc__)
        return 1
    fig, axes = plt.subplots(1, len(dirs), figsize=(4 * len(dirs), 3.2), squeeze=False)
    for ax, outdir in zip(axes[0], dirs):
        for j, style in zip(range(3), ("-", "--", ":")):
            data = np.loadtxt(outdir / f"profile_edge{j}.csv", delimiter=",", skiprows=2)
            ax.plot(data[:, 0], data[:, 1], style, label=f"edge {j}")
        ax.set_xlabel("x")
        ax.set_ylabel("phi")
        ax.set_title(outdir.name)
        ax.legend(fontsize=8)
    fig.tight_layout()
    out = "profiles.png"
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
