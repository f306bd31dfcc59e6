"""Analytic test surfaces sampled as immersion grids.

Charts are oriented so that f_x x f_y points along the mean curvature
normal (inward for spheres and cylinders).
"""

import numpy as np

from . import quat as Q
from .surface import from_function


def _axis(lo, hi, n):
    return np.linspace(lo, hi, int(n))


def plane(n=21, extent=1.0, h=None):
    """f(x, y) = (x, y, 0)."""
    xs = _axis(-extent, extent, n) if h is None else np.arange(-extent, extent + h / 2, h)
    return from_function(lambda X, Y: np.stack([X, Y, 0 * X], -1), xs, xs)


def sphere_chart(h=0.005, extent=0.5, radius=1.0):
    """Conformal (inverse stereographic) chart of the sphere of given radius.

    f(x, y) = r (2x, -2y, 1 - x^2 - y^2) / (1 + x^2 + y^2), centered on the
    north pole; the y flip makes f_x x f_y point inward.
    """
    xs = np.arange(-extent, extent + h / 2, h)

    def f(X, Y):
        d = 1 + X**2 + Y**2
        return radius * np.stack([2 * X / d, -2 * Y / d, (1 - X**2 - Y**2) / d], -1)

    return from_function(f, xs, xs)


def sphere_chart_s3(h=0.005, extent=0.5):
    """The same chart viewed as a great 2-sphere in S^3 (the totally geodesic S^2 in Im H)."""
    g = sphere_chart(h, extent)
    return g.replace(ambient="S3")


def cylinder(radius=0.5, h=0.01, length=1.0, turns=0.5):
    """Cylinder about the i axis, conformal: f = (x, r sin(y/r)... ) oriented inward.

    ``turns`` is the fraction of the full circle covered in y.
    """
    ys = np.arange(0.0, 2 * np.pi * radius * turns + h / 2, h)
    xs = np.arange(0.0, length + h / 2, h)

    def f(X, Y):
        t = Y / radius
        return np.stack([X, -radius * np.cos(t), -radius * np.sin(t)], -1)

    return from_function(f, xs, ys)


def clifford_torus(r1=0.6, h=0.01, extent=(np.pi / 2, np.pi / 2)):
    """Product torus (r1 e^{ix/r1}, r2 e^{iy/r2}) in S^3 with r1^2 + r2^2 = 1.

    Conformal and flat; minimal only for r1 = r2 = 1/sqrt(2).
    """
    r2 = np.sqrt(1 - r1**2)
    xs = np.arange(0.0, extent[0] + h / 2, h)
    ys = np.arange(0.0, extent[1] + h / 2, h)

    def f(X, Y):
        return np.stack([r1 * np.cos(X / r1), r1 * np.sin(X / r1), r2 * np.cos(Y / r2), r2 * np.sin(Y / r2)], -1)

    return from_function(f, xs, ys, ambient="S3")


def latitude_band_s3(latitude=0.4, h=0.01, extent=0.5):
    """A patch of the great 2-sphere Im H cap S^3 in latitude-longitude-like conformal
    (Mercator) coordinates; its y = const edges are latitude circles."""
    xs = np.arange(0.0, extent + h / 2, h)
    ys = np.arange(0.0, extent + h / 2, h)
    m0 = np.arctanh(np.sin(latitude))

    def f(X, Y):
        lat = np.arcsin(np.tanh(Y + m0))
        return Q.imag(np.stack([np.cos(lat) * np.cos(X), np.cos(lat) * np.sin(X), np.sin(lat)], -1))

    return from_function(f, xs, ys, ambient="S3")
