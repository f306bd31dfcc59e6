"""Sheeted spherical metrics: slit spheres, chains, rays and three-point metrics.

A :class:`SheetedMetric` is a list of cells glued along boundary arcs.  Each
cell is a region of S^2 given by an exact membership predicate in local
coordinates, together with a rotation that places it on the sphere (its
development).  The developing degree at a point q is the number of cells
whose developed region contains q.

Free boundary arcs carry a side: ``"+"`` when the cell lies to the left of
the arc (traversed from p to q), ``"-"`` when it lies to the right.  A join
glues a ``"+"`` arc of one metric to a ``"-"`` arc of the other, so the
second continues the first across the arc.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import quat as Q
from .errors import BoundaryQueryError, GluingError, InvalidInputError, OrientationError

EPS_BOUNDARY = 1e-12
EPS_MATCH = 1e-10
FOUR_PI = 4 * np.pi
_X, _Y, _Z = np.eye(3)


def _unit3(p, name="point"):
    p = np.asarray(p, dtype=float)
    if p.shape == (4,):
        p = p[1:]
    n = np.linalg.norm(p)
    if p.shape != (3,) or not np.isfinite(n) or n == 0:
        raise InvalidInputError(f"{name} must be a nonzero 3-vector")
    return p / n


def _rot(a, x):
    """Rotate 3-vectors x by unit quaternion a."""
    return Q.vec(Q.rotate(a, Q.imag(x)))


@dataclass(frozen=True, eq=False)
class GreatArc:
    """Arc of a great circle from p to q, running counterclockwise about ``normal``.

    ``normal`` may be omitted unless p and q are antipodal.
    """

    p: np.ndarray
    q: np.ndarray
    normal: np.ndarray = None

    def __post_init__(self):
        p, q = _unit3(self.p, "p"), _unit3(self.q, "q")
        if self.normal is None:
            c = np.cross(p, q)
            if np.linalg.norm(c) < 1e-12:
                raise InvalidInputError("arc between coincident or antipodal points needs an explicit normal")
            c = c / np.linalg.norm(c)
        else:
            c = _unit3(self.normal, "normal")
            if abs(c @ p) > 1e-9 or abs(c @ q) > 1e-9:
                raise InvalidInputError("arc endpoints must lie on the great circle of the normal")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "normal", c)
        if self.length <= EPS_BOUNDARY:
            raise InvalidInputError("arc has zero length")

    @property
    def length(self):
        return float(np.mod(np.arctan2(np.cross(self.p, self.q) @ self.normal, self.p @ self.q), 2 * np.pi))

    @property
    def minimizing(self):
        return self.length <= np.pi + 1e-12

    def contains(self, x, tol=EPS_BOUNDARY):
        """True if x lies on the closed arc (within tol)."""
        x = _unit3(x)
        if abs(x @ self.normal) > tol:
            return False
        t = np.mod(np.arctan2(np.cross(self.p, x) @ self.normal, self.p @ x), 2 * np.pi)
        return bool(t <= self.length + tol or t >= 2 * np.pi - tol)

    def rotated(self, a):
        return GreatArc(_rot(a, self.p), _rot(a, self.q), _rot(a, self.normal))

    def matches(self, other, tol=EPS_MATCH):
        return (np.linalg.norm(self.p - other.p) < tol and np.linalg.norm(self.q - other.q) < tol
                and np.linalg.norm(self.normal - other.normal) < tol)

    def to_dict(self):
        return {"p": self.p.tolist(), "q": self.q.tolist(), "normal": self.normal.tolist(), "length": self.length}


def _frame_rotation(src, dst):
    """Unit quaternion rotating arc src onto arc dst (p -> p, normal -> normal)."""
    def frame(arc):
        return np.column_stack([arc.p, np.cross(arc.normal, arc.p), arc.normal])

    return Q.quaternion_from_matrix(frame(dst) @ frame(src).T)


# -------------------------------------------------------------------- cells


@dataclass(frozen=True, eq=False)
class Cell:
    """A region of S^2 in local coordinates, placed by ``rotation``.

    kinds: ``slit-sphere`` (S^2 minus ``arc``), ``hemisphere`` (x . pole > 0),
    ``triangle`` (the convex spherical triangle on ``vertices``, or its
    complement when ``complement``).
    """

    kind: str
    rotation: np.ndarray = field(default_factory=lambda: Q.ONE.copy())
    arc: GreatArc = None
    pole: np.ndarray = None
    vertices: np.ndarray = None
    complement: bool = False
    area: float = 0.0

    def local(self, q):
        return _rot(Q.qconj(self.rotation), _unit3(q))

    def boundary_arcs(self):
        if self.kind == "slit-sphere":
            return [self.arc]
        if self.kind == "hemisphere":
            return []
        v = self.vertices
        return [GreatArc(v[k], v[(k + 1) % 3]) for k in range(3)]

    def contains(self, q):
        """Membership of a developed point; raises on the measure-zero boundary."""
        x = self.local(q)
        if self.kind == "hemisphere":
            s = x @ self.pole
            if abs(s) <= EPS_BOUNDARY:
                raise BoundaryQueryError(f"query point lies on the boundary of a {self.kind} cell")
            return bool(s > 0)
        for arc in self.boundary_arcs():
            if arc.contains(x):
                raise BoundaryQueryError(f"query point lies on a boundary arc of a {self.kind} cell")
        if self.kind == "slit-sphere":
            return True
        v = self.vertices
        inside = all(x @ np.cross(v[k], v[(k + 1) % 3]) > 0 for k in range(3))
        return inside != self.complement

    def placed(self, a):
        return replace(self, rotation=Q.normalize(Q.qmul(a, self.rotation)))

    def to_dict(self):
        d = {"kind": self.kind, "rotation": self.rotation.tolist(), "area": self.area}
        if self.arc is not None:
            d["arc"] = self.arc.to_dict()
        if self.pole is not None:
            d["pole"] = self.pole.tolist()
        if self.vertices is not None:
            d["vertices"] = self.vertices.tolist()
            d["complement"] = self.complement
        return d


@dataclass(frozen=True)
class FreeArc:
    """A boundary arc of the metric: owning cell, side, developed arc."""

    cell: int
    side: str
    arc: GreatArc


@dataclass(frozen=True, eq=False)
class SheetedMetric:
    cells: tuple
    gluings: tuple = ()
    free_arcs: tuple = ()
    truncation_arcs: tuple = ()
    completion_points: tuple = ()

    @property
    def area(self):
        return float(sum(c.area for c in self.cells))

    def completion_boundary_length(self):
        return float(sum(f.arc.length for f in self.free_arcs))

    def rotated(self, a):
        def mv(fa):
            return FreeArc(fa.cell, fa.side, fa.arc.rotated(a))

        return SheetedMetric(tuple(c.placed(a) for c in self.cells), self.gluings,
                             tuple(mv(f) for f in self.free_arcs), tuple(mv(f) for f in self.truncation_arcs),
                             tuple(_rot(a, p) for p in self.completion_points))

    def to_dict(self):
        def fa(f):
            return {"cell": f.cell, "side": f.side, "arc": f.arc.to_dict()}

        return {
            "cells": [c.to_dict() for c in self.cells],
            "gluings": [list(g) for g in self.gluings],
            "free_arcs": [fa(f) for f in self.free_arcs],
            "truncation_arcs": [fa(f) for f in self.truncation_arcs],
            "completion_points": [np.asarray(p).tolist() for p in self.completion_points],
            "area": self.area,
        }


# -------------------------------------------------------------- slit spheres


def standard_slit(n):
    """Slit of length n through k, from k cos(n/2) - j sin(n/2) to k cos(n/2) + j sin(n/2)."""
    c, s = np.cos(n / 2), np.sin(n / 2)
    return GreatArc(np.array([0.0, -s, c]), np.array([0.0, s, c]), -_X)


def make_slit_sphere(e):
    """S^2 cut along a minimizing arc e (or of length e, for a number)."""
    if np.isscalar(e):
        e = standard_slit(float(e))
    if not e.minimizing:
        raise InvalidInputError(f"slit arc must be minimizing (length {e.length:.6g} > pi)")
    local = standard_slit(e.length)
    a = _frame_rotation(local, e)
    cell = Cell("slit-sphere", rotation=a, arc=local, area=FOUR_PI)
    return SheetedMetric((cell,), (), (FreeArc(0, "-", e), FreeArc(0, "+", e)), (), (e.p, e.q))


def join(a, b, arc_a=None, arc_b=None, align=True):
    """Glue free arc ``arc_a`` of a (side "+") to free arc ``arc_b`` of b (side "-").

    Defaults pick the last "+" arc of a and the first "-" arc of b.  With
    ``align`` b is rotated so its arc develops onto a's; otherwise the two
    developments must already agree.
    """
    if arc_a is None:
        arc_a = max(k for k, f in enumerate(a.free_arcs) if f.side == "+")
    if arc_b is None:
        arc_b = min(k for k, f in enumerate(b.free_arcs) if f.side == "-")
    fa, fb = a.free_arcs[arc_a], b.free_arcs[arc_b]
    if abs(fa.arc.length - fb.arc.length) > EPS_MATCH:
        raise GluingError(f"length mismatch: {fa.arc.length:.12g} vs {fb.arc.length:.12g}")
    if fa.side == fb.side:
        raise OrientationError(f"orientation mismatch: both arcs are on side {fa.side!r}", module="devmap")
    if align:
        b = b.rotated(_frame_rotation(fb.arc, fa.arc))
        fb = b.free_arcs[arc_b]
    elif not fa.arc.matches(fb.arc):
        rev = GreatArc(fb.arc.q, fb.arc.p, -fb.arc.normal)
        if fa.arc.matches(rev):
            raise OrientationError("orientation mismatch: arcs are traversed in opposite directions", module="devmap")
        raise GluingError("developments do not extend one another across the arc")
    off = len(a.cells)

    def shift(f):
        return FreeArc(f.cell + off, f.side, f.arc)

    free = tuple(f for k, f in enumerate(a.free_arcs) if k != arc_a) + \
        tuple(shift(f) for k, f in enumerate(b.free_arcs) if k != arc_b)
    glue = a.gluings + tuple((g[0] + off, g[1], g[2] + off, g[3]) for g in b.gluings) + \
        ((fa.cell, fa.side, fb.cell + off, fb.side),)
    pts = list(a.completion_points)
    for p in b.completion_points:
        if not any(np.linalg.norm(p - r) < EPS_MATCH for r in pts):
            pts.append(p)
    return SheetedMetric(a.cells + b.cells, glue, free, a.truncation_arcs + tuple(shift(f) for f in b.truncation_arcs),
                         tuple(pts))


def chain(e, k):
    """k slit spheres along e, each glued to the next across the slit."""
    if k < 1:
        raise InvalidInputError("a chain needs at least one slit sphere")
    m = make_slit_sphere(e)
    for _ in range(k - 1):
        m = join(m, make_slit_sphere(e))
    return m


def truncated_ray(n, k, e=None):
    """First k slit spheres of a ray along e (default: the standard slit of length n).

    The free "-" arc of the first sphere is the ray's completion boundary;
    the "+" arc of the last one is the truncation, reported separately.
    """
    if not (0 < n <= np.pi + 1e-12):
        raise InvalidInputError(f"slit length must lie in (0, pi], got {n}")
    e = standard_slit(n) if e is None else e
    m = chain(e, k)
    plus = [f for f in m.free_arcs if f.side == "+"]
    minus = [f for f in m.free_arcs if f.side == "-"]
    return replace(m, free_arcs=tuple(minus), truncation_arcs=m.truncation_arcs + tuple(plus))


def line_of_slit_spheres(n, depth, e=None):
    """Two rays joined: 2 depth slit spheres, both ends truncated.

    The completion boundary is then only the slit endpoints {p, q};
    :func:`truncation_fraction` measures how much the truncation still
    contributes, and shrinks like 1/depth.
    """
    e = standard_slit(n) if e is None else e
    m = chain(e, 2 * depth)
    return replace(m, free_arcs=(), truncation_arcs=m.truncation_arcs + m.free_arcs)


def truncation_fraction(m):
    """Share of the cells that carry a truncation arc."""
    cells = {f.cell for f in m.truncation_arcs}
    return len(cells) / len(m.cells)


# ----------------------------------------------------------- three points


def _triple_points(t):
    pts = t.points if hasattr(t, "points") else np.asarray(t, dtype=float)
    if pts.shape != (3, 3):
        raise InvalidInputError("triple must be three 3-vectors")
    return np.array([_unit3(p) for p in pts])


def _classify(p):
    """('antipodal' | 'contained' | 'great-circle' | 'triangle', det, D)."""
    det = float(np.linalg.det(p))
    D = 1.0 + sum(float(p[k] @ p[(k + 1) % 3]) for k in range(3))
    if any(Q.angle(p[k], p[(k + 1) % 3]) >= np.pi - 1e-12 for k in range(3)):
        return "antipodal", det, D
    if abs(det) <= 1e-14:
        return ("contained" if D >= 0 else "great-circle"), det, D
    return "triangle", det, D


def triangle_area(t):
    """Area of the region to the left of the loop p1 -> p2 -> p3 -> p1.

    2 pi when two points are antipodal, 4 pi when one minimizing arc
    contains the third point.
    """
    p = _triple_points(t)
    kind, det, D = _classify(p)
    if kind == "antipodal":
        return 2 * np.pi
    if kind == "contained":
        return FOUR_PI
    if kind == "great-circle":
        return 2 * np.pi
    return float(np.mod(2 * np.arctan2(det, D), FOUR_PI))


def _great_circle_normal(p):
    """Normal of the great circle through p, oriented so p1 -> p2 -> p3 runs once around it."""
    k = int(np.argmax([np.linalg.norm(np.cross(p[a], p[b])) for a, b in ((0, 1), (1, 2), (2, 0))]))
    a, b = ((0, 1), (1, 2), (2, 0))[k]
    c = np.cross(p[a], p[b])
    c /= np.linalg.norm(c)
    for s in (c, -c):
        gaps = [np.mod(np.arctan2(np.cross(p[m], p[(m + 1) % 3]) @ s, p[m] @ p[(m + 1) % 3]), 2 * np.pi)
                for m in range(3)]
        if abs(sum(gaps) - 2 * np.pi) < 1e-9:
            return s
    return c


def _delta_cell(p):
    kind, det, _ = _classify(p)
    if kind in ("antipodal", "great-circle"):
        c = _great_circle_normal(p)
        edges = [GreatArc(p[k], p[(k + 1) % 3], c) for k in range(3)]
        return Cell("hemisphere", pole=c, area=2 * np.pi), edges
    edges = [GreatArc(p[k], p[(k + 1) % 3]) for k in range(3)]
    if kind == "contained":
        k = int(np.argmax([e.length for e in edges]))
        return Cell("slit-sphere", arc=edges[k], area=FOUR_PI), edges
    area = triangle_area(p)
    if det > 0:
        return Cell("triangle", vertices=p.copy(), area=area), edges
    return Cell("triangle", vertices=p[[0, 2, 1]].copy(), complement=True, area=area), edges


def three_point_metric(t, depth):
    """Triangle cell to the left of the triple's loop, with a truncated ray of
    ``depth`` slit spheres glued across each edge."""
    if depth < 0:
        raise InvalidInputError("depth must be non-negative")
    p = _triple_points(t)
    cell, edges = _delta_cell(p)
    m = SheetedMetric((cell,), (), tuple(FreeArc(0, "+", e) for e in edges), (), tuple(p))
    if depth == 0:
        return m
    for k, e in enumerate(edges):
        if not e.minimizing:
            raise InvalidInputError(f"edge {k + 1} is not minimizing; no slit-sphere ray fits")
        ray = truncated_ray(e.length, depth, e)
        idx = next(i for i, f in enumerate(m.free_arcs) if f.side == "+" and f.cell == 0 and f.arc.matches(e))
        m = join(m, ray, idx, 0, align=False)
    return m


def developing_degree(m, q):
    """Number of cells whose developed region contains q."""
    q = _unit3(q, "q")
    for p in m.completion_points:
        if np.linalg.norm(q - p) <= EPS_BOUNDARY:
            raise BoundaryQueryError("query point is a completion point")
    return sum(1 for c in m.cells if c.contains(q))


def lonlat_to_point(lon, lat):
    return np.array([np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)])
