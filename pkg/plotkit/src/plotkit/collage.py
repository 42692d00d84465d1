"""Render an effective-potential collage panel: surface map plus axis profile.

Inputs: grid CSV from ``foilflow potential`` (columns x, y, U_e) and its
``<in>.critical.json`` sidecar.  The right-hand panel shows U_e(x, 0) with
the critical points marked at the coordinates reported by the CLI.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import io, style

REQUIRED = ("x", "y", "U_e")

KIND_STYLE = {
    "maximum": dict(marker="^", color="tab:red", label="maximum"),
    "saddle": dict(marker="x", color="tab:blue", label="saddle"),
    "inflection": dict(marker="s", color="tab:purple", label="inflection"),
}


def render(in_path: str, out_path: str, critical_path: str | None = None):
    table = io.read_table(in_path, required=REQUIRED)
    if critical_path is None:
        critical_path = in_path + ".critical.json"
    sidecar = io.read_json(critical_path,
                           required=("k", "regime", "critical_points"))

    xs = np.array(table.column("x"))
    ys = np.array(table.column("y"))
    us = np.array(table.column("U_e"))
    x_vals = np.unique(xs)
    y_vals = np.unique(ys)
    grid = us.reshape(len(x_vals), len(y_vals)).T

    fig = style.new_figure(9.0, 4.2)
    ax_map = fig.add_subplot(121)
    ax_prof = fig.add_subplot(122)

    finite = grid[np.isfinite(grid)]
    if finite.size:
        lo, hi = np.percentile(finite, [2, 98])
        levels = np.linspace(lo, hi, 31)
        ax_map.contourf(x_vals, y_vals, np.clip(grid, lo, hi), levels=levels,
                        cmap="viridis")
        ax_map.contour(x_vals, y_vals, grid, levels=levels[::5],
                       colors="black", linewidths=0.3)
    ax_map.set_aspect("equal")
    ax_map.set_xlabel("x")
    ax_map.set_ylabel("y")
    ax_map.set_title(f"$U_e$, k = {sidecar['k']:g} ({sidecar['regime']})")

    # axis profile: the grid row nearest y = 0
    y0 = y_vals[np.argmin(np.abs(y_vals))]
    mask = ys == y0
    order = np.argsort(xs[mask])
    ax_prof.plot(xs[mask][order], us[mask][order], lw=1.2, color="black")
    seen = set()
    for point in sidecar["critical_points"]:
        st = dict(KIND_STYLE.get(point["kind"],
                                 dict(marker="o", color="gray",
                                      label=point["kind"])))
        if point["kind"] in seen:
            st.pop("label", None)
        seen.add(point["kind"])
        ax_prof.plot(point["x"], point["value"], ms=7, ls="none", **st)
        ax_prof.annotate(f"x = {point['x']:.5g}",
                         (point["x"], point["value"]),
                         textcoords="offset points", xytext=(4, 6),
                         fontsize=7)
    ax_prof.set_xlabel("x")
    ax_prof.set_ylabel(r"$U_e(x, 0)$")
    ax_prof.set_title("axis profile")
    if seen:
        ax_prof.legend(loc="best", fontsize=8)
    fig.tight_layout()
    style.save(fig, out_path)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--in", dest="in_path", required=True)
    parser.add_argument("--out", dest="out_path", required=True)
    parser.add_argument("--critical", dest="critical_path", default=None,
                        help="critical-point JSON (default: <in>.critical.json)")
    args = parser.parse_args(argv)
    try:
        render(args.in_path, args.out_path, args.critical_path)
    except io.InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
