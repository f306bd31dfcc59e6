"""Immersion grids and finite-difference differential geometry.

Grids sample a map from a rectangle of parameter space into R^3 = Im H
(``ambient="R3"``) or into S^3 (``ambient="S3"``).  Values are stored as
quaternions of shape ``(nx, ny, 4)``; the first array axis is the x
direction.  Orientation follows the usual convention: ``f_x x f_y`` is a
positive multiple of the (inward) mean curvature normal and J rotates
counterclockwise.

Derivatives use centered stencils in the interior and one-sided stencils of
matching width at the boundary.  ``order=4`` is the default; ``order=2``
gives the classic three-point scheme.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial

import numpy as np

from . import quat as Q
from .errors import DegenerateNodeError, GridTooSmallError, InvalidInputError, NotConformalError

DEFAULT_ORDER = 4
EPS_RANK = 1e-10
TAU_CONF = 1e-3

AMBIENTS = ("R3", "S3")
EDGES = ("x0", "x1", "y0", "y1")

# interior half-width and boundary closure width, per (order, derivative)
_STENCILS = {
    (2, 1): (1, 3),
    (2, 2): (1, 4),
    (4, 1): (2, 6),
    (4, 2): (2, 7),
}


@dataclass(frozen=True, eq=False)
class ImmersionGrid:
    """A rectangular sample of an immersion into R^3 or S^3.

    ``tangents`` optionally carries exact (f_x, f_y) fields from an analytic
    generator; when present :func:`derivatives` returns them instead of
    differencing.  ``boundary_flags`` maps edge names (``x0, x1, y0, y1``) to
    free-form markers such as ``"mirror"``.
    """

    values: np.ndarray
    hx: float
    hy: float
    ambient: str = "R3"
    x0: float = 0.0
    y0: float = 0.0
    boundary_flags: dict = field(default_factory=dict)
    tangents: tuple = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 3 or v.shape[-1] != 4:
            raise InvalidInputError(f"grid values must have shape (nx, ny, 4), got {v.shape}")
        if self.ambient not in AMBIENTS:
            raise InvalidInputError(f"ambient must be one of {AMBIENTS}, got {self.ambient!r}")
        if not (self.hx > 0 and self.hy > 0):
            raise InvalidInputError("grid spacings must be positive")
        if self.ambient == "R3":
            if np.any(np.abs(v[..., 0]) > Q.EPS_UNIT):
                raise InvalidInputError("R3 grid values must be imaginary quaternions")
            v[..., 0] = 0.0
        else:
            v = Q.check_unit(v, "S3 grid values")
        for key in self.boundary_flags:
            if key not in EDGES:
                raise InvalidInputError(f"unknown boundary edge {key!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.tangents is not None:
            tx, ty = (np.array(t, dtype=float) for t in self.tangents)
            if tx.shape != v.shape or ty.shape != v.shape:
                raise InvalidInputError("tangent fields must match the grid shape")
            tx.setflags(write=False)
            ty.setflags(write=False)
            object.__setattr__(self, "tangents", (tx, ty))

    @property
    def nx(self):
        return self.values.shape[0]

    @property
    def ny(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape[:2]

    @property
    def x(self):
        return self.x0 + self.hx * np.arange(self.nx)

    @property
    def y(self):
        return self.y0 + self.hy * np.arange(self.ny)

    @property
    def h(self):
        return max(self.hx, self.hy)

    def points(self):
        """R^3 grids as (nx, ny, 3) arrays; S^3 grids as (nx, ny, 4)."""
        return self.values[..., 1:] if self.ambient == "R3" else self.values

    def replace(self, **changes):
        kw = dict(values=self.values, hx=self.hx, hy=self.hy, ambient=self.ambient, x0=self.x0,
                  y0=self.y0, boundary_flags=dict(self.boundary_flags), tangents=self.tangents)
        kw.update(changes)
        return ImmersionGrid(**kw)

    def same_layout(self, other):
        return self.shape == other.shape and np.isclose(self.hx, other.hx) and np.isclose(self.hy, other.hy)


def from_function(func, x, y, ambient="R3", tangents=None, **kw):
    """Sample ``func(X, Y) -> (..., 4)`` on the tensor grid of 1D arrays x, y.

    ``x`` and ``y`` must be uniformly spaced.  ``tangents``, if given, is a
    pair of callables with the same signature returning exact f_x, f_y.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    X, Y = np.meshgrid(x, y, indexing="ij")
    vals = np.asarray(func(X, Y), dtype=float)
    if vals.shape[-1] == 3:
        vals = Q.imag(vals)
    tan = None
    if tangents is not None:
        tan = tuple(_as_quat(t(X, Y)) for t in tangents)
    return ImmersionGrid(vals, float(x[1] - x[0]), float(y[1] - y[0]), ambient, float(x[0]), float(y[0]),
                         tangents=tan, **kw)


def _as_quat(a):
    a = np.asarray(a, dtype=float)
    return Q.imag(a) if a.shape[-1] == 3 else a


# --------------------------------------------------------------- stencils


@lru_cache(maxsize=None)
def fd_weights(offsets, deriv):
    """Finite-difference weights for the given node offsets (unit spacing)."""
    offs = np.asarray(offsets, dtype=float)
    A = np.vander(offs, len(offs), increasing=True).T
    b = np.zeros(len(offs))
    b[deriv] = factorial(deriv)
    w = np.linalg.solve(A, b)
    w.setflags(write=False)
    return w


def _check_order(order):
    if order not in (2, 4):
        raise InvalidInputError(f"finite-difference order must be 2 or 4, got {order}")


def min_nodes(order=DEFAULT_ORDER, deriv=2):
    _check_order(order)
    return _STENCILS[(order, deriv)][1]


def diff(a, h, axis, deriv=1, order=DEFAULT_ORDER):
    """Derivative of ``a`` along ``axis`` with spacing ``h``."""
    _check_order(order)
    half, width = _STENCILS[(order, deriv)]
    a = np.moveaxis(np.asarray(a, dtype=float), axis, 0)
    n = a.shape[0]
    if n < max(width, 2 * half + 1):
        raise GridTooSmallError(f"need at least {width} nodes along axis {axis} for order {order}, got {n}")
    out = np.empty_like(a)
    w = fd_weights(tuple(range(-half, half + 1)), deriv)
    out[half:n - half] = sum(w[k] * a[k:n - 2 * half + k] for k in range(2 * half + 1))
    for i in range(half):
        w = fd_weights(tuple(range(-i, width - i)), deriv)
        out[i] = np.tensordot(w, a[:width], axes=1)
        w = fd_weights(tuple(range(i - width + 1, i + 1)), deriv)
        out[n - 1 - i] = np.tensordot(w, a[n - width:], axes=1)
    return np.moveaxis(out, 0, axis) / h**deriv


def derivatives(g, order=DEFAULT_ORDER):
    """(f_x, f_y) as quaternion fields; exact tangents are used when attached."""
    if g.tangents is not None:
        return g.tangents
    if g.nx < 3 or g.ny < 3:
        raise GridTooSmallError(f"grid must be at least 3x3, got {g.nx}x{g.ny}")
    return diff(g.values, g.hx, 0, 1, order), diff(g.values, g.hy, 1, 1, order)


def second_derivatives(g, order=DEFAULT_ORDER):
    """(f_xx, f_xy, f_yy).  The mixed term differences the x-derivative in y."""
    fx, fy = derivatives(g, order)
    if g.tangents is not None:
        fxx, fyy = diff(fx, g.hx, 0, 1, order), diff(fy, g.hy, 1, 1, order)
    else:
        fxx, fyy = diff(g.values, g.hx, 0, 2, order), diff(g.values, g.hy, 1, 2, order)
    return fxx, diff(fx, g.hy, 1, 1, order), fyy


def grad(u, g, order=DEFAULT_ORDER):
    return diff(u, g.hx, 0, 1, order), diff(u, g.hy, 1, 1, order)


# ------------------------------------------------------------ first order


@dataclass(frozen=True)
class MetricField:
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray

    @property
    def det(self):
        return self.E * self.G - self.F**2

    def matrix(self):
        return np.stack([np.stack([self.E, self.F], -1), np.stack([self.F, self.G], -1)], -2)


def metric(g, order=DEFAULT_ORDER):
    fx, fy = derivatives(g, order)
    return MetricField(Q.qdot(fx, fx), Q.qdot(fx, fy), Q.qdot(fy, fy))


def _check_metric(m):
    bad = (m.E <= 0) | (m.G <= 0) | (m.det <= EPS_RANK * np.maximum(m.E * m.G, 1e-300))
    if np.any(bad):
        node = np.argwhere(bad)[0]
        raise DegenerateNodeError("degenerate metric", node)


def left_trivialize(g, fx, fy):
    """Move S^3 tangent vectors to T_1 S^3 = Im H by left translation."""
    if g.ambient == "R3":
        return fx, fy
    inv = Q.qconj(g.values)
    a, b = Q.qmul(inv, fx), Q.qmul(inv, fy)
    a[..., 0] = 0.0
    b[..., 0] = 0.0
    return a, b


def normal(g, order=DEFAULT_ORDER):
    """Unit normal field.  In S^3 this is f~ times the R^3 normal of the
    left-trivialized tangent plane, so that (f~, f~_x, f~_y, nu~) is
    positively oriented."""
    fx, fy = derivatives(g, order)
    a, b = left_trivialize(g, fx, fy)
    c = np.cross(a[..., 1:], b[..., 1:])
    cn = np.linalg.norm(c, axis=-1)
    scale = np.linalg.norm(a[..., 1:], axis=-1) * np.linalg.norm(b[..., 1:], axis=-1)
    # relative to the grid's typical scale so a collapsed tangent is caught
    bad = cn <= EPS_RANK * max(float(np.median(scale)), 1e-300)
    if np.any(bad):
        raise DegenerateNodeError("immersion degenerates (f_x, f_y dependent)", np.argwhere(bad)[0])
    nu = Q.imag(c / cn[..., None])
    if g.ambient == "S3":
        nu = Q.qmul(g.values, nu)
    return nu


def conformality_residual(g, order=DEFAULT_ORDER):
    """(|f_x|^2 - |f_y|^2, |f_x f_y + f_y f_x|), left-trivialized in S^3."""
    fx, fy = derivatives(g, order)
    a, b = left_trivialize(g, fx, fy)
    r1 = Q.qdot(a, a) - Q.qdot(b, b)
    r2 = Q.qnorm(Q.qmul(a, b) + Q.qmul(b, a))
    return r1, r2


def conformality_defect(g, order=DEFAULT_ORDER):
    """Pointwise max(|r1|, r2) relative to the conformal factor."""
    fx, fy = derivatives(g, order)
    r1, r2 = conformality_residual(g, order)
    lam2 = 0.5 * (Q.qdot(fx, fx) + Q.qdot(fy, fy))
    return np.maximum(np.abs(r1), r2) / lam2


def is_conformal(g, tol=TAU_CONF, order=DEFAULT_ORDER):
    return bool(np.max(conformality_defect(g, order)) <= tol)


def _require_conformal(g, tol, order):
    d = conformality_defect(g, order)
    if np.max(d) > tol:
        node = np.unravel_index(np.argmax(d), d.shape)
        raise NotConformalError(f"grid is not conformal: relative defect {d.max():.3e} > {tol:g} at node {node}")


def cmc_residual(g, order=DEFAULT_ORDER, tol_conf=TAU_CONF):
    """|Laplace(f) - 2 f_x f_y|; vanishes exactly when H = 1 in a conformal chart."""
    if g.ambient != "R3":
        raise InvalidInputError("cmc_residual needs an R3 grid")
    _require_conformal(g, tol_conf, order)
    fx, fy = derivatives(g, order)
    fxx, _, fyy = second_derivatives(g, order)
    return Q.qnorm(fxx + fyy - 2 * Q.qmul(fx, fy))


def minimal_residual_s3(g, order=DEFAULT_ORDER, tol_conf=TAU_CONF):
    """|Laplace(f~) + f~ |df~|^2|; vanishes exactly for minimal conformal f~."""
    if g.ambient != "S3":
        raise InvalidInputError("minimal_residual_s3 needs an S3 grid")
    _require_conformal(g, tol_conf, order)
    fx, fy = derivatives(g, order)
    fxx, _, fyy = second_derivatives(g, order)
    energy = Q.qdot(fx, fx) + Q.qdot(fy, fy)
    return Q.qnorm(fxx + fyy + g.values * energy[..., None])


# ----------------------------------------------------------- second order


@dataclass(frozen=True)
class ShapeField:
    """Shape operator as 2x2 matrices in the coordinate frame (d_x, d_y)."""

    S: np.ndarray
    metric: MetricField

    @property
    def H(self):
        return 0.5 * np.trace(self.S, axis1=-2, axis2=-1)

    @property
    def A2(self):
        # |A|^2 = tr(S^2) for a metric-self-adjoint S
        return np.einsum("...ij,...ji->...", self.S, self.S)

    def self_adjointness(self):
        m, S = self.metric, self.S
        return np.abs(m.E * S[..., 0, 1] + m.F * S[..., 1, 1] - m.F * S[..., 0, 0] - m.G * S[..., 1, 0])

    def principal_curvatures(self):
        ev = np.linalg.eigvals(self.S)
        return np.sort(ev.real, axis=-1)


def second_fundamental_form(g, order=DEFAULT_ORDER, nu=None):
    nu = normal(g, order) if nu is None else nu
    fxx, fxy, fyy = second_derivatives(g, order)
    L, M, N = Q.qdot(fxx, nu), Q.qdot(fxy, nu), Q.qdot(fyy, nu)
    return np.stack([np.stack([L, M], -1), np.stack([M, N], -1)], -2)


def shape_operator(g, order=DEFAULT_ORDER):
    """S with d(nu) = -df o S, computed as g^{-1} II."""
    m = metric(g, order)
    _check_metric(m)
    II = second_fundamental_form(g, order)
    S = np.linalg.solve(m.matrix(), II)
    return ShapeField(S, m)


def mean_curvature(g, order=DEFAULT_ORDER):
    return shape_operator(g, order).H


def J_matrix(m):
    """Matrix of the 90 degree rotation J in the coordinate frame."""
    _check_metric(m)
    s = 1.0 / np.sqrt(m.det)
    return s[..., None, None] * np.stack(
        [np.stack([-m.F, -m.G], -1), np.stack([m.E, m.F], -1)], -2)


def apply_J(g, X, order=DEFAULT_ORDER, m=None):
    """Rotate the tangent field X (coefficients on (d_x, d_y), shape (nx, ny, 2))."""
    m = metric(g, order) if m is None else m
    return np.einsum("...ij,...j->...i", J_matrix(m), np.asarray(X, dtype=float))


def push_forward(g, X, order=DEFAULT_ORDER):
    """df(X) as ambient quaternions."""
    fx, fy = derivatives(g, order)
    X = np.asarray(X, dtype=float)
    return fx * X[..., 0:1] + fy * X[..., 1:2]


def laplace_beltrami(g, u, order=DEFAULT_ORDER):
    m = metric(g, order)
    _check_metric(m)
    u = np.asarray(u, dtype=float)
    ux, uy = grad(u, g, order)
    sq = np.sqrt(m.det)
    px = (m.G * ux - m.F * uy) / sq
    py = (-m.F * ux + m.E * uy) / sq
    return (diff(px, g.hx, 0, 1, order) + diff(py, g.hy, 1, 1, order)) / sq


def jacobi_residual(g, u, order=DEFAULT_ORDER):
    """Laplace-Beltrami(u) + |A|^2 u."""
    if g.ambient != "R3":
        raise InvalidInputError("jacobi_residual needs an R3 grid")
    return laplace_beltrami(g, u, order) + shape_operator(g, order).A2 * np.asarray(u, dtype=float)


def interior(a, k=1):
    """Strip k nodes from every edge of a nodal field."""
    return np.asarray(a)[k:-k, k:-k]
