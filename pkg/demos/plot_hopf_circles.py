"""
Hopf circles seen from another fibration
========================================

Each unit imaginary quaternion u gives a fibration of S^3 over S^2 by
great circles.  Here we project the circles of one fibration through
another and watch them land on round circles, covered twice.
"""

import numpy as np

from cousinlab import quat as Q

rng = np.random.default_rng(1)

# two fibration directions at a known angle
u = Q.K
v = Q.sphere_point(np.array([0.0, 0.0, np.sin(0.7), np.cos(0.7)]))
theta = Q.angle(u, v)
print(f"angle between u and v: {theta:.6f}")

# a v-circle through a random point, pushed down by the u-projection
p = Q.random_unit(rng)
pts = Q.project_foreign_circle(u, v, p, samples=20000)
center = Q.foreign_circle_center(v, p)
radii = Q.angle(pts, center)
print(f"image radius: min {radii.min():.12f}  max {radii.max():.12f}")

# the image closes up after half a turn of the circle
half = len(pts) // 2
print(f"gap between t and t + pi: {np.max(Q.qnorm(pts[:half] - pts[half:])):.2e}")

# and it is traced at constant speed 2 sin(theta)
step = 2 * np.pi / len(pts)
speed = Q.qnorm(np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0)) / (2 * step)
print(f"speed: {speed.mean():.6f} (2 sin theta = {2 * np.sin(theta):.6f})")

# circles of the u-fibration itself collapse to points
t = np.linspace(0, 2 * np.pi, 50)
fiber = Q.hopf_project(u, Q.hopf_flow(u, p, t))
print(f"u-circle spread under its own projection: {np.max(Q.qnorm(fiber - fiber[0])):.2e}")
