"""Render a scattering-map portrait in the (alpha, b) plane.

Input: CSV from ``foilflow scatter`` with columns orbit_id, iter, alpha, b,
phi, p, branch, outcome.  Returned iterates are drawn as points colored per
orbit; contact/timeout terminations as distinct markers.  An empty portrait
renders blank axes and exits 0.
"""

from __future__ import annotations

import argparse
import math
import sys
from collections import defaultdict

from . import io, style

REQUIRED = ("orbit_id", "iter", "alpha", "b", "phi", "p", "branch", "outcome")


def render(in_path: str, out_path: str):
    table = io.read_table(in_path, required=REQUIRED)
    idx = {name: table.header.index(name) for name in REQUIRED}
    orbits = defaultdict(list)
    terminal = []
    for row in table.rows:
        oid = int(row[idx["orbit_id"]])
        alpha = float(row[idx["alpha"]]) % (2 * math.pi)
        b = float(row[idx["b"]])
        outcome = row[idx["outcome"]]
        if outcome == "returned":
            orbits[oid].append((alpha, b))
        else:
            terminal.append((alpha, b, outcome))

    fig = style.new_figure(6.4, 5.0)
    ax = fig.add_subplot(111)
    cmap = style.plt.get_cmap("tab20")
    for i, oid in enumerate(sorted(orbits)):
        pts = orbits[oid]
        ax.plot([p[0] for p in pts], [p[1] for p in pts], ".", ms=2.5,
                color=cmap(i % 20))
    for alpha, b, outcome in terminal:
        marker = "x" if outcome == "contact" else "+"
        ax.plot(alpha, b, marker, ms=5, color="black")
    ax.set_xlim(0, 2 * math.pi)
    ax.set_xlabel(r"$\alpha$")
    ax.set_ylabel("b")
    meta = table.meta
    ax.set_title(
        "Scattering portrait: "
        f"k = {meta.get('k', '?')}, h = {meta.get('h', '?')}, "
        f"r_max = {meta.get('r_max', '?')}, {meta.get('branch', '?')} branch"
    )
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
