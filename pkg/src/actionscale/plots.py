"""Writes standalone matplotlib scripts that redraw the figures from the CSV outputs.

Nothing is plotted here. Each generated script locates its CSVs relative to
its own path, forces the headless ``Agg`` backend and saves a PNG beside itself.
"""
from __future__ import annotations

from pathlib import Path

_PRELUDE = '''\
"""Regenerates {name}.png from the CSV files in this directory."""
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

HERE = Path(__file__).resolve().parent


def load(name):
    with open(HERE / name) as fh:
        cols = [h.split(" [")[0] for h in fh.readline().strip().split(",")]
    data = np.loadtxt(HERE / name, delimiter=",", skiprows=1, ndmin=2)
    return {{c: data[:, i] for i, c in enumerate(cols)}}


'''

_FIG1 = '''\
d = load("fig1.csv")
t, a, dz0 = d["T"], d["patch_action"], d["dz0"]
pos = t > 0
fig, ax = plt.subplots(figsize=(6, 4.5))
ax.loglog(t[pos], a[pos], "-", color="k", label="a = hbar^2/(sigma_q sigma_p)")
ax.loglog(t[pos], dz0[pos], "--", color="k", label="Delta Z_0")
ax.set_xlabel("T")
ax.set_ylabel("action")
ax.legend(loc="lower left")
left = ax.inset_axes([0.58, 0.62, 0.38, 0.32])
left.plot(t, d["sigma_q"], color="tab:blue")
left.set_title("sigma_q", fontsize=8)
left.tick_params(labelsize=7)
right = ax.inset_axes([0.58, 0.2, 0.38, 0.32])
right.plot(t, d["sigma_p"], color="tab:red")
right.set_title("sigma_p", fontsize=8)
right.tick_params(labelsize=7)
fig.tight_layout()
fig.savefig(HERE / "fig1.png", dpi=150)
'''

_FIG2 = '''\
inset = load("fig2_inset.csv")
hbar = float(inset["hbar"][0])
fig, ax = plt.subplots(figsize=(6, 4.5))
for t in inset["T"]:
    c = load(f"fig2_T{t:g}.csv")
    ax.plot(c["ds"] / hbar, c["overlap_sq"], label=f"T = {t:g}")
ax.set_xlabel("Delta S / hbar")
ax.set_ylabel("|C|^2")
ax.legend(loc="upper right")
sub = ax.inset_axes([0.45, 0.3, 0.3, 0.3])
sub.plot(inset["T"], inset["ds0"], "o-", color="k", ms=3)
sub.axhline(hbar, color="gray", lw=1)
sub.set_xlabel("T", fontsize=7)
sub.set_ylabel("Delta S_0", fontsize=7)
sub.tick_params(labelsize=7)
fig.tight_layout()
fig.savefig(HERE / "fig2.png", dpi=150)
'''

_FIG3 = '''\
bv = load("fig3.csv")
fig, ax = plt.subplots(figsize=(6, 4.5))
ax.plot(bv["ds_bar"], bv["c_bar_sq"], color="k", label="microcanonical average")
for path in sorted(HERE.glob("fig3_numerical_T*.csv")):
    c = load(path.name)
    ax.plot(c["ds"], c["overlap_sq"], "--", label=path.stem.replace("fig3_numerical_", ""))
ax.set_xlabel("averaged Delta S")
ax.set_ylabel("|C|^2")
ax.legend(loc="upper right")
fig.tight_layout()
fig.savefig(HERE / "fig3.png", dpi=150)
'''

FIGURES = {
    "fig1": (_FIG1, ["fig1.csv"]),
    "fig2": (_FIG2, ["fig2_inset.csv"]),
    "fig3": (_FIG3, ["fig3.csv"]),
}


class MissingCSVError(FileNotFoundError):
    pass


def emit_plots(csv_dir, figures=tuple(FIGURES)) -> list[Path]:
    """Write ``plot_<fig>.py`` for each requested figure; output is byte-stable."""
    csv_dir = Path(csv_dir)
    written = []
    for name in figures:
        body, needed = FIGURES[name]
        missing = [n for n in needed if not (csv_dir / n).exists()]
        if missing:
            raise MissingCSVError(f"cannot emit {name} plot script: missing {', '.join(missing)} "
                                  f"in {csv_dir}")
        path = csv_dir / f"plot_{name}.py"
        path.write_text(_PRELUDE.format(name=name) + body)
        written.append(path)
    return written
