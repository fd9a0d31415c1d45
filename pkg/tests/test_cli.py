import csv
import io
import math
import subprocess
import sys

import pytest

from tivem.benchmarks import analytical_beam_displacement
from tivem.cli import RUN_COLUMNS, main
from tivem.constitutive import EngineeringParams, FibreDirection, engineering_to_ti
from tivem.mesh import read_mesh


def run_cli(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def test_run_smoke():
    code, out = run_cli(
        "run", "--problem", "cook", "--element", "quad", "--density", "10", "--nu", "0.3",
        "--p", "5", "--fibre", "constant:0.7853981634", "--strategy", "centroid",
    )
    assert code == 0
    assert out.splitlines()[0] == RUN_COLUMNS
    (r,) = rows(out)
    assert math.isfinite(float(r["probe_v"])) and float(r["probe_v"]) > 0
    assert r["problem"] == "cook" and r["density"] == "10"


def test_invalid_p_names_field(capsys):
    code, out = run_cli("run", "--p", "0.5")
    assert code == 2 and out == ""
    assert "p must" in capsys.readouterr().err


@pytest.mark.parametrize(
    "flag, value, field",
    [("--nu", "0.7", "nu"), ("--fibre", "helix", "fibre"), ("--element", "q9", "element"),
     ("--problem", "plate", "problem"), ("--strategy", "median", "strategy"), ("--E_T", "-3", "E_T")],
)
def test_invalid_config(capsys, flag, value, field):
    code, _ = run_cli("run", flag, value)
    assert code == 2
    assert field in capsys.readouterr().err


def test_beam_q2_matches_analytical():
    code, out = run_cli(
        "run", "--problem", "beam-a", "--element", "q2", "--density", "50", "--nu", "0.3",
        "--p", "5", "--fibre", f"constant:{math.pi / 4!r}",
    )
    assert code == 0
    v = float(rows(out)[0]["probe_v"])
    c = engineering_to_ti(EngineeringParams(1500.0, 0.3, 5.0))
    _, ref = analytical_beam_displacement(10.0, 0.0, c, FibreDirection.from_angle(math.pi / 4))
    assert abs(v - ref) < 0.02 * abs(ref)


def test_emit_config_and_determinism():
    args = ["run", "--problem", "beam-a", "--element", "voronoi", "--density", "8", "--emit-config", "--no-timing"]
    _, a = run_cli(*args)
    _, b = run_cli(*args)
    assert a == b
    first = a.splitlines()[0]
    assert first.startswith("# config: ") and '"E_T": 1500.0' in first
    assert rows(a)[0]["wall_ms"] == "0"


def test_p_sweep_row_count(tmp_path):
    vals = tmp_path / "p.txt"
    vals.write_text("1\n10\n100\n1000\n10000\n100000\n")
    code, out = run_cli("sweep", "--problem", "cook", "--density", "4", "--axis", "p", "--values-file", str(vals))
    assert code == 0
    header = out.splitlines()[0]
    assert header == "p," + RUN_COLUMNS + ",status"
    rs = rows(out)
    assert len(rs) == 30
    assert {r["element"] for r in rs} == {"quad", "hex", "voronoi", "q1", "q2"}
    assert all(r["status"] == "0" for r in rs)


def test_angle_sweep_rewrites_fibre_column():
    code, out = run_cli("sweep", "--problem", "beam-a", "--density", "4", "--element", "quad", "--axis", "angle", "--values", "0,1.5")
    assert code == 0
    assert [r["fibre"] for r in rows(out)] == ["constant:0", "constant:1.5"]


def test_sweep_failures_are_rows():
    code, out = run_cli("sweep", "--element", "hex", "--density", "2", "--axis", "density", "--values", "1,2")
    rs = rows(out)
    assert code == 0 and [r["status"] for r in rs] == ["1", "0"]
    assert rs[0]["probe_v"] == "nan"


def test_missing_values_file():
    code, _ = run_cli("sweep", "--axis", "p", "--values-file", "/nonexistent/values")
    assert code == 4


def test_mesh_verb(tmp_path):
    path = tmp_path / "v.mesh"
    code, _ = run_cli("mesh", "--kind", "voronoi", "--density", "7", "--seed", "42", "--output", str(path))
    assert code == 0
    assert "C 49" in path.read_text().splitlines()
    path = tmp_path / "cook.mesh"
    assert run_cli("mesh", "--kind", "quad", "--density", "50", "--domain", "cook", "--output", str(path))[0] == 0
    m = read_mesh(path)
    assert m.n_cells == 2500 and m.vertices[:, 0].max() == 48.0 and m.vertices[:, 1].max() == 60.0


def test_mesh_write_failure():
    assert run_cli("mesh", "--kind", "quad", "--output", "/nonexistent/dir/m.txt")[0] == 4


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tivem", "run", "--density", "3", "--no-timing"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.splitlines()[0] == RUN_COLUMNS
