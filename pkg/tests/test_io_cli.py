import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import unduloid
from cousinlab import cli
from cousinlab import io
from cousinlab import shapes
from cousinlab import surface as S
from cousinlab.config import RunConfig, Tolerances, worker_count
from cousinlab.errors import InvalidInputError


# -------------------------------------------------------------------- OBJ


def test_obj_two_by_two(tmp_path):
    x = np.array([0.0, 1.0])
    g = S.from_function(lambda X, Y: np.stack([X, Y, 0 * X], -1), x, x)
    path = tmp_path / "quad.obj"
    io.export_mesh(g, path)
    v, f = io.read_obj(path)
    assert v.shape == (4, 3) and f.shape == (2, 3)
    # row-major vertices, faces wound along f_x x f_y = +k
    assert np.array_equal(v[1], [0, 1, 0]) and np.array_equal(v[2], [1, 0, 0])
    assert np.all(io.face_normals(v, f)[:, 2] > 0)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False, allow_subnormal=False), min_size=27, max_size=27))
def test_obj_round_trips_17_digits(vals):
    import tempfile
    from pathlib import Path

    x = np.arange(3.0)
    g = S.from_function(lambda X, Y: np.stack([X, Y, 0 * X], -1), x, x)
    g = g.replace(values=np.concatenate([np.zeros((3, 3, 1)), np.array(vals).reshape(3, 3, 3)], -1))
    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "m.obj"
        io.export_mesh(g, path)
        v, _ = io.read_obj(path)
    assert np.array_equal(v, np.array(vals).reshape(9, 3))


def test_obj_winding_follows_normal(tmp_path):
    g = unduloid(np.pi / 2).f
    path = tmp_path / "u.obj"
    io.export_mesh(g, path)
    v, f = io.read_obj(path)
    assert len(f) == 2 * (g.nx - 1) * (g.ny - 1)
    fn = io.face_normals(v, f)
    nu = S.normal(g.replace(tangents=None)).reshape(-1, 4)[:, 1:]
    centroid_normal = nu[f].mean(axis=1)
    assert np.mean(np.einsum("ij,ij->i", fn, centroid_normal) > 0) == 1.0


def test_export_requires_r3(tmp_path):
    with pytest.raises(InvalidInputError):
        io.export_mesh(shapes.clifford_torus(), tmp_path / "x.obj")


def test_grid_round_trip_is_bit_exact(tmp_path):
    g = shapes.clifford_torus(h=0.05)
    g = g.replace(boundary_flags={"y0": "mirror"})
    io.save_grid(g, tmp_path / "g.json")
    back = io.load_grid(tmp_path / "g.json")
    assert np.array_equal(back.values, g.values)
    assert (back.hx, back.hy, back.ambient, back.boundary_flags) == (g.hx, g.hy, "S3", {"y0": "mirror"})


def test_bad_grid_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{}")
    with pytest.raises(InvalidInputError):
        io.load_grid(p)
    with pytest.raises(InvalidInputError):
        io.load_grid(tmp_path / "missing.json")


def test_dumps_is_canonical():
    a = io.dumps({"b": np.float64(1.5), "a": np.arange(2)})
    assert a == io.dumps({"a": [0, 1], "b": 1.5})
    assert a.index('"a"') < a.index('"b"')


# ---------------------------------------------------------------- config


def test_config_validation(monkeypatch):
    with pytest.raises(InvalidInputError):
        Tolerances(tau_cmc=0.0)
    with pytest.raises(InvalidInputError):
        RunConfig("gen-unduloid", resolution=(8, 200))
    monkeypatch.setenv("COUSINLAB_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("COUSINLAB_THREADS", "zero")
    with pytest.raises(InvalidInputError):
        worker_count()


# ------------------------------------------------------------------- CLI


def test_necksizes_cli(capsys):
    assert cli.main(["necksizes", "--values", "1,1.2,1.4"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["passed"] and set(out["measurements"]["triples"]) == {"left", "right"}
    assert cli.main(["necksizes", "--values", "0.5,0.5,2"]) == 1
    capsys.readouterr()
    assert cli.main(["necksizes", "--values", "1,1,4"]) == 1
    assert json.loads(capsys.readouterr().out)["measurements"]["admissible"] is False
    assert cli.main(["necksizes", "--triple", "0.3,2,4"]) == 0


def test_forces_and_devmap_cli(capsys):
    assert cli.main(["forces", "--necksizes", "1,1,1"]) == 0
    capsys.readouterr()
    assert cli.main(["devmap", "--triple", "0.5,2,4", "--depth", "1", "--query-degree", "0.1,-1.2"]) == 0
    m = json.loads(capsys.readouterr().out)["measurements"]
    assert m["cells"] == 4 and m["degree"] >= 3


def test_error_exit_code_and_prefix(capsys):
    assert cli.main(["forces", "--necksizes", "0.5,0.5,2"]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error: moduli:")
    with pytest.raises(SystemExit) as ei:
        cli.main(["gen-unduloid"])
    assert ei.value.code == 2


def test_tolerance_override_changes_verdict(capsys):
    assert cli.main(["gen-helicoid", "--necksize", "1.0", "--h", "0.01"]) == 0
    capsys.readouterr()
    assert cli.main(["gen-helicoid", "--necksize", "1.0", "--h", "0.01", "--tau-min", "1e-12"]) == 1


def test_cousin_and_classify_cli(tmp_path, capsys):
    grid = tmp_path / "sphere.json"
    io.save_grid(shapes.sphere_chart(h=0.01), grid)
    out = tmp_path / "cousin.json"
    assert cli.main(["cousin", "--in", str(grid), "--out", str(out)]) == 0
    capsys.readouterr()
    back = tmp_path / "back.json"
    assert cli.main(["cousin", "--in", str(out), "--out", str(back)]) == 0
    capsys.readouterr()
    und = tmp_path / "und.json"
    io.save_grid(unduloid(np.pi / 2).ftilde, und)
    assert cli.main(["classify", "--in", str(und)]) == 0
    rec = json.loads(capsys.readouterr().out)["measurements"]
    assert abs(rec["distance"] - np.pi / 2) < 1e-6


def test_reports_are_deterministic(tmp_path):
    args = ["devmap", "--triple", "0.5,2,4", "--depth", "2"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cli.main(args + ["--report", str(a)])
    cli.main(args + ["--report", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_gen_unduloid_subprocess(tmp_path):
    obj = tmp_path / "u.obj"
    rep = tmp_path / "r.json"
    r = subprocess.run([sys.executable, "-m", "cousinlab", "gen-unduloid", "--necksize", "1.5707963267948966",
                        "--resolution", "200x100", "--out", str(obj), "--report", str(rep)],
                       capture_output=True, text=True)
    data = json.loads(rep.read_text())
    failed = [k for k, c in data["checks"].items() if not c["passed"]]
    assert r.returncode == (0 if not failed else 1)
    v, f = io.read_obj(obj)
    assert v.shape == (201 * 101, 3)
