"""Fixed matplotlib style shared by all figures.

Agg backend and a pinned rc dict so that rendering the same CSVs twice
produces byte-identical PNGs; nothing here depends on the host display
or on user-level matplotlibrc files.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

RC = {
    "figure.figsize": (6.0, 4.2),
    "figure.dpi": 130,
    "savefig.dpi": 130,
    "font.family": "DejaVu Sans",
    "font.size": 9.5,
    "axes.linewidth": 0.8,
    "axes.titlesize": 10,
    "lines.linewidth": 1.1,
    "legend.frameon": False,
    "legend.fontsize": 8.5,
    "svg.hashsalt": "qsdfigures",
}


def apply() -> None:
    plt.rcdefaults()
    plt.rcParams.update(RC)
