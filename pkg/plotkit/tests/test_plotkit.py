"""plotkit figure scripts: rendering, validation, determinism."""

import json
import math

import pytest

from plotkit import bifurcation, collage, hill, io, scatter


def write(path, text):
    path.write_text(text)
    return str(path)


BIF_CSV = (
    "# foilflow 1.0.0\n"
    "# f_critical = 0.81188357727149036\n"
    "f,sigma_id,h\n"
    "0.5,a,0\n0.7,a,0\n"
    "0.9,b,0.001\n1.1,b,0.003\n"
    "0.9,c,0\n1.1,c,0\n"
    "0.6,leaf1,-0.002\n1.0,leaf2,0.002\n"
)

HILL_CSV = (
    "# foilflow 1.0.0\n"
    "# R = 1\n# h = 0.00030\n# k = 0.86872\n"
    "# n_regions = 2\n# region_tags = A;B\n"
    "# window = -12;12;-12;12\n"
    "boundary_id,x,y\n"
    "0,2,0\n0,2.1,0.5\n0,2,1\n"
    "1,-5,0\n1,-5.1,0.5\n1,-5,1\n"
)

SCATTER_HEADER = (
    "# foilflow 1.0.0\n"
    "# r_max = 100\n# h = 0.001\n# k = 1\n# branch = largest\n"
    "# holes = \n"
    "orbit_id,iter,alpha,b,phi,p,branch,outcome\n"
)

SCATTER_CSV = SCATTER_HEADER + (
    "0,0,1.0,14.0,-2.0,0.1,largest,returned\n"
    "0,1,1.2,14.0,-1.8,0.1,largest,returned\n"
    "1,0,2.0,11.0,-1.0,0.05,smallest,contact\n"
    "2,0,3.0,12.0,-0.5,0.07,largest,timeout\n"
)


def potential_fixture(tmp_path):
    lines = ["# foilflow 1.0.0", "# k = 0.86872", "x,y,U_e"]
    xs = [-6 + 12 * i / 8 for i in range(9)]
    for x in xs:
        for y in xs:
            if x * x + y * y <= 1.0:
                u = "nan"
            else:
                u = f"{-1.0 / (x * x + y * y):.17g}"
            lines.append(f"{x},{y},{u}")
    csv_path = write(tmp_path / "pot.csv", "\n".join(lines) + "\n")
    sidecar = {
        "k": 0.86872,
        "regime": "max_negative_saddle_positive",
        "k_cr": 0.8118835773,
        "k_inf": 0.8115254459,
        "critical_points": [
            {"x": 3.62443, "kind": "saddle", "value": -0.05,
             "hessian": [0.01, 0.02]},
            {"x": -3.11904, "kind": "maximum", "value": -0.02,
             "hessian": [-0.01, -0.02]},
        ],
    }
    (tmp_path / "pot.csv.critical.json").write_text(json.dumps(sidecar))
    return csv_path


class TestReaders:
    def test_metadata_and_columns(self, tmp_path):
        table = io.read_table(write(tmp_path / "b.csv", BIF_CSV),
                              required=("f", "sigma_id", "h"))
        assert table.meta["f_critical"].startswith("0.81188")
        assert len(table.rows) == 8
        assert table.column("f")[0] == 0.5

    def test_missing_column_aborts(self, tmp_path):
        with pytest.raises(io.InputError, match="missing required columns"):
            io.read_table(write(tmp_path / "b.csv", BIF_CSV),
                          required=("f", "nope"))

    def test_ragged_row_aborts(self, tmp_path):
        bad = "a,b\n1,2\n3\n"
        with pytest.raises(io.InputError, match="row width"):
            io.read_table(write(tmp_path / "bad.csv", bad))

    def test_missing_file_aborts(self, tmp_path):
        with pytest.raises(io.InputError):
            io.read_table(str(tmp_path / "absent.csv"))


class TestBifurcation:
    def test_renders(self, tmp_path):
        src = write(tmp_path / "b.csv", BIF_CSV)
        out = tmp_path / "b.png"
        assert bifurcation.main(["--in", src, "--out", str(out)]) == 0
        assert out.stat().st_size > 0

    def test_missing_column_exit_code(self, tmp_path):
        src = write(tmp_path / "b.csv", "x,y\n1,2\n")
        assert bifurcation.main(["--in", src, "--out",
                                 str(tmp_path / "b.png")]) == 2

    def test_deterministic(self, tmp_path):
        src = write(tmp_path / "b.csv", BIF_CSV)
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        bifurcation.main(["--in", src, "--out", str(a)])
        bifurcation.main(["--in", src, "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestCollage:
    def test_renders_with_markers(self, tmp_path):
        src = potential_fixture(tmp_path)
        out = tmp_path / "c.png"
        assert collage.main(["--in", src, "--out", str(out)]) == 0
        assert out.stat().st_size > 0

    def test_missing_sidecar_exit_code(self, tmp_path):
        src = potential_fixture(tmp_path)
        (tmp_path / "pot.csv.critical.json").unlink()
        assert collage.main(["--in", src, "--out",
                             str(tmp_path / "c.png")]) == 2

    def test_explicit_sidecar_path(self, tmp_path):
        src = potential_fixture(tmp_path)
        alt = tmp_path / "crit.json"
        alt.write_text((tmp_path / "pot.csv.critical.json").read_text())
        assert collage.main(["--in", src, "--out", str(tmp_path / "c.png"),
                             "--critical", str(alt)]) == 0


class TestHill:
    def test_renders(self, tmp_path):
        src = write(tmp_path / "h.csv", HILL_CSV)
        out = tmp_path / "h.png"
        assert hill.main(["--in", src, "--out", str(out)]) == 0
        assert out.stat().st_size > 0

    def test_schema_mismatch_exit_code(self, tmp_path):
        src = write(tmp_path / "h.csv", "a,b,c\n1,2,3\n")
        assert hill.main(["--in", src, "--out",
                          str(tmp_path / "h.png")]) == 2


class TestScatter:
    def test_renders(self, tmp_path):
        src = write(tmp_path / "s.csv", SCATTER_CSV)
        out = tmp_path / "s.png"
        assert scatter.main(["--in", src, "--out", str(out)]) == 0
        assert out.stat().st_size > 0

    def test_empty_portrait_blank_axes(self, tmp_path):
        src = write(tmp_path / "s.csv", SCATTER_HEADER)
        out = tmp_path / "s.png"
        assert scatter.main(["--in", src, "--out", str(out)]) == 0
        assert out.stat().st_size > 0

    def test_deterministic(self, tmp_path):
        src = write(tmp_path / "s.csv", SCATTER_CSV)
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        scatter.main(["--in", src, "--out", str(a)])
        scatter.main(["--in", src, "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()
