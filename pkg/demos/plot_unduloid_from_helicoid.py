"""
An unduloid grown from a spherical helicoid
============================================

A minimal helicoid in S^3 and a Delaunay unduloid in R^3 are cousins:
integrating d f = -f~^{-1} d f~ o J along the helicoid produces half of an
unduloid with mean curvature one.  This script builds one, measures it
and checks it against an independent ODE for the meridian.
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

from cousinlab import cousin as C
from cousinlab import delaunay as D
from cousinlab import io
from cousinlab import quat as Q
from cousinlab import surface as S

n = float(sys.argv[1]) if len(sys.argv) > 1 else np.pi / 3
print(f"necksize n = {n:.6f}")

# the helicoid is sampled in its conformal chart and integrated to R^3
pair = D.generate_unduloid(n, resolution=(400, 200))
f, ft = pair.f, pair.ftilde
print(f"grid {f.nx} x {f.ny}, isometry error {C.isometry_error(f, ft, ring=C.GATE_RING):.2e}")

H = S.interior(S.mean_curvature(f), C.GATE_RING)
print(f"mean curvature: {H.min():.8f} .. {H.max():.8f}")

# neck at the first parallel, bulge a quarter of the way along
b = (f.nx - 1) // 4
print(f"neck circumference  {D.circumference_at(f, 0):.8f}  (n = {n:.8f})")
print(f"bulge circumference {D.circumference_at(f, b):.8f}  (2 pi - n = {2 * np.pi - n:.8f})")
print(f"neck to bulge       {D.meridian_length(f, 0, b):.8f}  (pi / 2 = {np.pi / 2:.8f})")

# the boundary rulings of the helicoid are k-Hopf circles; their images sit n apart
p_plus, p_minus = D.boundary_hopf_points(pair)
print(f"Hopf images of the rulings: {Q.vec(p_plus).round(6)} and {Q.vec(p_minus).round(6)}")
print(f"their distance          {Q.sphere_distance(p_plus, p_minus):.12f}")

# an independent meridian from the axisymmetric ODE
prof = D.unduloid_profile_oracle(n)
print(f"ODE force {prof.force.mean():.10f}, expected n (1 - n / 2 pi) = {n * (1 - n / (2 * np.pi)):.10f}")
print(f"Hausdorff distance to the ODE meridian {D.profile_hausdorff(f, prof):.2e}")

with tempfile.TemporaryDirectory() as d:
    path = Path(d) / "half_unduloid.obj"
    io.export_mesh(f, path)
    v, faces = io.read_obj(path)
    print(f"OBJ export: {len(v)} vertices, {len(faces)} faces")
