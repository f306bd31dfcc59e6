"""
From three necksizes to a spherical triple
==========================================

Three-ended surfaces are labelled by triples of points on S^2 whose
pairwise distances are the necksizes.  We check admissibility, build the
triple in both chiralities, balance the end forces and glue up the
sheeted spherical metric that the triple bounds.
"""

import numpy as np

from cousinlab import devmap as V
from cousinlab import moduli as M

n = (1.0, 1.3, 1.6)

verdict = M.check_necksize_inequalities(n)
print(f"necksizes {n}: admissible {verdict.admissible}, margins {verdict.margins}")

for chirality in M.CHIRALITIES:
    t = M.triple_from_necksizes(n, chirality)
    c = M.canonicalize_triple(t)
    print(f"{chirality:>5}: distances {np.round(M.triple_distances(t), 12)}, "
          f"latitude {c.latitude:+.6f}, longitudes {c.lon2:.6f} {c.lon3:.6f}")

# a triple whose necksizes add up to 2 pi lies on a great circle
flat = M.triple_from_necksizes([np.pi / 2, 2 * np.pi / 3, 5 * np.pi / 6])
print(f"sum 2 pi: latitude {M.canonicalize_triple(flat).latitude}")

# two cylinders plus anything is out of reach
print(f"(pi, pi, 0.1) admissible: {M.check_necksize_inequalities([np.pi, np.pi, 0.1]).admissible}")

# weighted end axes close up into a triangle
fs = M.axis_angles_from_necksizes(n)
print(f"end weights {np.round(fs.weights, 6)}, angles {({k: round(v, 6) for k, v in fs.angles.items()})}")
print(f"force residual {fs.residual:.1e}")

# the developing map of the three-point metric
t = M.triple_from_necksizes(n)
for depth in (0, 1, 3):
    m = V.three_point_metric(t, depth)
    rng = np.random.default_rng(depth)
    pts = rng.standard_normal((2000, 3))
    degs = np.bincount([V.developing_degree(m, q) for q in pts])
    print(f"depth {depth}: {len(m.cells)} cells, area {m.area:.4f}, degree histogram {degs.tolist()}")
print(f"triangle area {V.triangle_area(t):.6f}")
