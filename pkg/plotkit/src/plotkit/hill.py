"""Render Hill's regions: boundary polylines of the accessible set {U_e <= h}.

Input: CSV from ``foilflow hill`` with columns boundary_id, x, y.  The foil
disk (radius R from the metadata) is drawn filled; region tags from the
metadata label the panel.
"""

from __future__ import annotations

import argparse
import sys
from collections import defaultdict

import numpy as np
from matplotlib.patches import Circle

from . import io, style

REQUIRED = ("boundary_id", "x", "y")


def render(in_path: str, out_path: str):
    table = io.read_table(in_path, required=REQUIRED)
    boundaries = defaultdict(list)
    for row in table.rows:
        boundaries[int(row[0])].append((float(row[1]), float(row[2])))

    fig = style.new_figure(5.2, 5.2)
    ax = fig.add_subplot(111)
    for bid in sorted(boundaries):
        pts = np.array(boundaries[bid])
        ax.plot(pts[:, 0], pts[:, 1], lw=1.2, color="tab:blue")
    if "R" in table.meta:
        ax.add_patch(Circle((0, 0), float(table.meta["R"]), color="0.4",
                            zorder=3))
    if "window" in table.meta:
        x0, x1, y0, y1 = (float(v) for v in table.meta["window"].split(";"))
        ax.set_xlim(x0, x1)
        ax.set_ylim(y0, y1)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    tags = table.meta.get("region_tags", "")
    n = table.meta.get("n_regions", "?")
    h = table.meta.get("h", "?")
    k = table.meta.get("k", "?")
    ax.set_title(f"Hill regions: h = {h}, k = {k} "
                 f"({n} region(s): {tags or 'none'})")
    style.save(fig, out_path)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--in", dest="in_path", required=True)
    parser.add_argument("--out", dest="out_path", required=True)
    args = parser.parse_args(argv)
    try:
        render(args.in_path, args.out_path)
    except io.InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
