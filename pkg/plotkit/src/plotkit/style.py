"""Deterministic matplotlib setup shared by all figure scripts."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

RC = {
    "figure.dpi": 150,
    "savefig.dpi": 150,
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "plotkit",
}


def new_figure(width: float = 6.4, height: float = 4.8):
    plt.rcParams.update(RC)
    return plt.figure(figsize=(width, height))


def save(fig, out: str):
    # fixed metadata so repeated renders are byte-stable
    kwargs = {}
    if out.endswith(".png"):
        kwargs["metadata"] = {"Software": "plotkit"}
    fig.savefig(out, **kwargs)
    plt.close(fig)
