"""Render the bifurcation diagram in the (f, h) plane.

Input: CSV from ``foilflow bifurcation`` with columns f, sigma_id, h.
The sigma_a/sigma_b/sigma_c branches are drawn as curves, leaf-count probe
points as markers annotated with their count, and the critical line f = f_cr
(from the file metadata) as a vertical rule.
"""

from __future__ import annotations

import argparse
import sys
from collections import defaultdict

from . import io, style

REQUIRED = ("f", "sigma_id", "h")

BRANCH_STYLE = {
    "a": dict(color="tab:blue", label=r"$\sigma_a$"),
    "b": dict(color="tab:red", label=r"$\sigma_b$"),
    "c": dict(color="tab:green", label=r"$\sigma_c$"),
}


def render(in_path: str, out_path: str):
    table = io.read_table(in_path, required=REQUIRED)
    branches = defaultdict(list)
    leaves = []
    for row in table.rows:
        f, sid, h = float(row[0]), row[1], float(row[2])
        if sid.startswith("leaf"):
            leaves.append((f, h, int(sid[4:])))
        else:
            branches[sid].append((f, h))

    fig = style.new_figure()
    ax = fig.add_subplot(111)
    for sid, pts in sorted(branches.items()):
        pts.sort()
        st = BRANCH_STYLE.get(sid, dict(color="gray", label=sid))
        ax.plot([p[0] for p in pts], [p[1] for p in pts], lw=1.5, **st)
    for f, h, count in leaves:
        ax.plot(f, h, "o", ms=3, color="black")
        ax.annotate(str(count), (f, h), textcoords="offset points",
                    xytext=(3, 3), fontsize=7)
    if "f_critical" in table.meta:
        f_cr = float(table.meta["f_critical"])
        ax.axvline(f_cr, color="black", ls="--", lw=0.8)
        ax.annotate(r"$f_{cr}$", (f_cr, ax.get_ylim()[1]),
                    textcoords="offset points", xytext=(3, -12))
    ax.set_xlabel("f")
    ax.set_ylabel("h")
    ax.set_title("Bifurcation diagram")
    if branches:
        ax.legend(loc="best", fontsize=8)
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
