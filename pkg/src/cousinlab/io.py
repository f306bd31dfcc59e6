"""Grid files, OBJ meshes and deterministic JSON.

Grid files are JSON with the sample array stored as base64 little-endian
float64, so they round-trip bit-exactly.
"""

import base64
import json
from pathlib import Path

import numpy as np

from . import surface as S
from .errors import InvalidInputError

GRID_FORMAT = "cousinlab-grid"
GRID_VERSION = 1


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps(obj):
    """Canonical JSON: sorted keys, fixed indentation, shortest-repr floats."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_jsonable, allow_nan=True) + "\n"


def write_json(obj, path):
    Path(path).write_text(dumps(obj))


def grid_to_dict(g):
    vals = np.ascontiguousarray(g.values, dtype="<f8")
    return {
        "format": GRID_FORMAT,
        "version": GRID_VERSION,
        "ambient": g.ambient,
        "shape": list(vals.shape),
        "hx": g.hx,
        "hy": g.hy,
        "x0": g.x0,
        "y0": g.y0,
        "boundary_flags": dict(g.boundary_flags),
        "values_b64": base64.b64encode(vals.tobytes()).decode("ascii"),
    }


def grid_from_dict(d):
    if d.get("format") != GRID_FORMAT:
        raise InvalidInputError("not a cousinlab grid file", module="io")
    vals = np.frombuffer(base64.b64decode(d["values_b64"]), dtype="<f8").reshape(d["shape"])
    return S.ImmersionGrid(vals.astype(float), d["hx"], d["hy"], d["ambient"], d["x0"], d["y0"],
                           dict(d.get("boundary_flags", {})))


def save_grid(g, path):
    write_json(grid_to_dict(g), path)


def load_grid(path):
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read grid file {path}: {exc}", module="io") from exc
    return grid_from_dict(d)


# -------------------------------------------------------------------- OBJ


def mesh_faces(nx, ny):
    """Two triangles per quad, 0-based, wound x-then-y so the face normal follows f_x x f_y."""
    i, j = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), indexing="ij")
    a = (i * ny + j).ravel()
    b = a + ny
    c = b + 1
    d = a + 1
    return np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, d], 1)])


def export_mesh(g, path, name="surface"):
    """Write an R3 grid as OBJ: vertices row-major, 17 significant digits."""
    if g.ambient != "R3":
        raise InvalidInputError("only R3 grids can be exported as meshes", module="io")
    pts = g.points().reshape(-1, 3)
    faces = mesh_faces(g.nx, g.ny) + 1
    lines = [f"# cousinlab mesh {g.nx}x{g.ny}", f"o {name}"]
    lines += ["v %.17g %.17g %.17g" % tuple(p) for p in pts]
    lines += ["f %d %d %d" % tuple(f) for f in faces]
    Path(path).write_text("\n".join(lines) + "\n")


def read_obj(path):
    """(vertices (N, 3), faces (M, 3) 0-based); only v/f records are read."""
    verts, faces = [], []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(t) for t in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(t.split("/")[0]) - 1 for t in parts[1:4]])
    return np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=int).reshape(-1, 3)


def face_normals(verts, faces):
    a, b, c = (verts[faces[:, k]] for k in range(3))
    return np.cross(b - a, c - a)
