"""Conjugate cousins: integrate d f~ = f~ df o J in either direction.

The forward system takes a CMC-1 immersion f into R^3 = Im H to a minimal
immersion f~ into S^3; the converse uses df = -f~^{-1} d f~ o J.  Both are
integrated edge by edge along a spanning tree of the grid (first along the
base row, then along every column).  In S^3 each edge step is an exact group
exponential, so |f~| = 1 holds to roundoff.

``order=4`` (default) samples the connection form at Gauss points with a
cubic interpolant and takes a fourth-order Magnus step; ``order=2`` is the
midpoint exponential / trapezoid scheme.
"""

from dataclasses import dataclass, field

import numpy as np

from . import quat as Q
from . import surface as S
from .errors import (IntegrationUnstableError, InvalidInputError, NotIntegrableError, OrientationError,
                     PathError)

TAU_CMC = 1e-3
TAU_MIN = 1e-3
TAU_ISOM = 1e-3
TAU_PERIOD = 1e-4
MAX_DRIFT = 1e-6
LOOP_FACTOR = 10.0

_G = np.sqrt(3) / 6


def tau_loop(g):
    """Tolerance on the loop-residual density, 10 h^2."""
    return LOOP_FACTOR * g.h**2


@dataclass(frozen=True, eq=False)
class CousinPair:
    f: S.ImmersionGrid
    ftilde: S.ImmersionGrid
    base_point: tuple = (0, 0)
    drift_log: float = 0.0
    loop_residual_max: float = 0.0
    order: int = S.DEFAULT_ORDER
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.f.ambient != "R3" or self.ftilde.ambient != "S3":
            raise InvalidInputError("CousinPair needs an R3 grid and an S3 grid")
        if not self.f.same_layout(self.ftilde):
            raise InvalidInputError("cousin grids must share (nx, ny, hx, hy)")

    def isometry_error(self):
        return isometry_error(self.f, self.ftilde, self.order)

    def report(self):
        return {
            "loop_residual_max": float(self.loop_residual_max),
            "isometry_error": float(self.isometry_error()),
            "drift_log": float(self.drift_log),
            "base_point": [int(i) for i in self.base_point],
        }


def isometry_error(f, ftilde, order=S.DEFAULT_ORDER, ring=0):
    """Max of |E - E~| + |F - F~| + |G - G~|, ignoring ``ring`` boundary layers."""
    m, mt = S.metric(f, order), S.metric(ftilde, order)
    err = np.abs(m.E - mt.E) + np.abs(m.F - mt.F) + np.abs(m.G - mt.G)
    return float(np.max(S.interior(err, ring) if ring else err))


# gates skip this many boundary layers: one-sided closures plus the spanning
# tree make the outermost values noisier than the scheme order (O(h) at order 2)
GATE_RING = 2


# ------------------------------------------------------ connection forms


def _rotated_tangents(g, order):
    """(df(J d_x), df(J d_y)) as quaternion fields."""
    fx, fy = S.derivatives(g, order)
    m = S.metric(g, order)
    S._check_metric(m)
    sq = np.sqrt(m.det)[..., None]
    jx = (-m.F[..., None] * fx + m.E[..., None] * fy) / sq
    jy = (-m.G[..., None] * fx + m.F[..., None] * fy) / sq
    return jx, jy


def connection_form(g, order=S.DEFAULT_ORDER):
    """Nodal values of the 1-form that is integrated to obtain the cousin.

    For R3 input this is alpha = df o J (so d f~ = f~ alpha); for S3 input it
    is beta = -f~^{-1} d f~ o J (so df = beta).  Returns the components on
    d_x and d_y, both imaginary.
    """
    jx, jy = _rotated_tangents(g, order)
    if g.ambient == "S3":
        inv = Q.qconj(g.values)
        jx, jy = -Q.qmul(inv, jx), -Q.qmul(inv, jy)
    jx = jx.copy()
    jy = jy.copy()
    jx[..., 0] = 0.0
    jy[..., 0] = 0.0
    return jx, jy


def _gauss_samples(a, axis, order):
    """Values of a nodal field at the two Gauss points of every edge along axis.

    Uses the cubic through four neighbouring nodes (shifted at the ends);
    order 2 just returns the edge midpoint twice.
    """
    a = np.moveaxis(a, axis, 0)
    n = a.shape[0]
    if order == 2 or n < 4:
        mid = 0.5 * (a[:-1] + a[1:])
        return np.moveaxis(mid, 0, axis), np.moveaxis(mid, 0, axis)
    out = []
    for t in (0.5 - _G, 0.5 + _G):
        wi, w0, w1 = (_lagrange_weights(nodes, t) for nodes in ((-1, 0, 1, 2), (0, 1, 2, 3), (-2, -1, 0, 1)))
        res = np.empty((n - 1,) + a.shape[1:])
        res[1:n - 2] = sum(wi[k] * a[k:n - 3 + k] for k in range(4))
        res[0] = np.tensordot(w0, a[:4], axes=1)
        res[n - 2] = np.tensordot(w1, a[n - 4:], axes=1)
        out.append(np.moveaxis(res, 0, axis))
    return tuple(out)


def _lagrange_weights(nodes, t):
    return np.array([np.prod([(t - nodes[m]) / (nodes[k] - nodes[m]) for m in range(len(nodes)) if m != k])
                     for k in range(len(nodes))])


def _additive_steps(a, h, axis, order):
    a1, a2 = _gauss_samples(a, axis, order)
    return 0.5 * h * (a1 + a2)


def _group_steps(a, h, axis, order):
    a1, a2 = _gauss_samples(a, axis, order)
    omega = 0.5 * h * (a1 + a2)
    if order == 4:
        omega = omega + (np.sqrt(3) / 12) * h * h * Q.commutator(a1, a2)
    omega[..., 0] = 0.0
    return Q.qexp(omega)


def edge_steps(g, order=S.DEFAULT_ORDER):
    """Per-edge transport for the cousin of g: unit quaternions (R3 input) or
    translation vectors (S3 input).  Shapes (nx-1, ny, 4) and (nx, ny-1, 4)."""
    ax, ay = connection_form(g, order)
    if g.ambient == "R3":
        return _group_steps(ax, g.hx, 0, order), _group_steps(ay, g.hy, 1, order)
    return _additive_steps(ax, g.hx, 0, order), _additive_steps(ay, g.hy, 1, order)


def loop_residual(g, order=S.DEFAULT_ORDER):
    """Per-plaquette defect of the discrete transport around each grid cell.

    For R3 input this is |E_x E_y E_x'^{-1} E_y'^{-1} - 1|, the discrete
    Maurer-Cartan curvature of alpha = df o J, which is 2 |f_x f_y| hx hy to
    leading order on a plane and O(h^2) hx hy on a CMC-1 surface.  For S3
    input it is the closure defect of beta.  Shape (nx-1, ny-1).
    """
    ex, ey = edge_steps(g, order)
    if g.ambient == "R3":
        p = Q.qmul(Q.qmul(ex[:, :-1], ey[1:, :]), Q.qmul(Q.qconj(ex[:, 1:]), Q.qconj(ey[:-1, :])))
        return Q.qnorm(p - Q.ONE)
    return Q.qnorm(ex[:, :-1] + ey[1:, :] - ex[:, 1:] - ey[:-1, :])


def loop_density(g, order=S.DEFAULT_ORDER):
    return loop_residual(g, order) / (g.hx * g.hy)


def _check_integrable(g, order, what, tol=None):
    res = loop_residual(g, order)
    dens = res / (g.hx * g.hy)
    # the outer ring mixes one-sided and centered stencils; at order 2 that
    # alone gives O(h) densities, so the gate looks one plaquette inside
    k = GATE_RING - 1 if min(dens.shape) > 2 * GATE_RING else 0
    inner = S.interior(dens, k) if k else dens
    tol = tau_loop(g) if tol is None else tol
    worst = float(inner.max())
    if worst > tol:
        idx = np.unravel_index(np.argmax(inner), inner.shape)
        idx = (idx[0] + k, idx[1] + k)
        raise NotIntegrableError(f"not integrable: input not {what}", idx, worst)
    return float(res.max())


# ------------------------------------------------------------ integration


def _sweep(steps_x, steps_y, base, base_point, shape, group, path_order="row"):
    nx, ny = shape
    i0, j0 = base_point
    out = np.empty((nx, ny, 4))
    drift = [0.0]

    def advance(val, step, forward):
        if group:
            new = Q.qmul(val, step if forward else Q.qconj(step))
            n = np.linalg.norm(new, axis=-1)
            d = float(np.max(np.abs(n - 1.0)))
            drift[0] = max(drift[0], d)
            return Q.renormalize_if_drifted(new)
        return val + step if forward else val - step

    def line(start, steps, k0, n):
        vals = np.empty((n,) + start.shape)
        vals[k0] = start
        for k in range(k0, n - 1):
            vals[k + 1] = advance(vals[k], steps[k], True)
        for k in range(k0, 0, -1):
            vals[k - 1] = advance(vals[k], steps[k - 1], False)
        return vals

    if path_order == "row":
        row = line(np.asarray(base, float), steps_x[:, j0], i0, nx)
        cols = line(row, np.moveaxis(steps_y, 1, 0), j0, ny)
        out[:] = np.moveaxis(cols, 0, 1)
    elif path_order == "column":
        col = line(np.asarray(base, float), steps_y[i0, :], j0, ny)
        rows = line(col, steps_x, i0, nx)
        out[:] = rows
    else:
        raise InvalidInputError(f"path_order must be 'row' or 'column', got {path_order!r}")
    return out, drift[0]


def _median_H(g, order):
    return float(np.median(S.shape_operator(g, order).H))


def integrate_to_s3(f, base_point=(0, 0), base_value=Q.ONE, order=S.DEFAULT_ORDER, path_order="row",
                    check=True, loop_tol=None):
    """Minimal cousin f~ in S^3 of a CMC-1 grid f, with f~(base_point) = base_value."""
    if f.ambient != "R3":
        raise InvalidInputError("integrate_to_s3 needs an R3 grid")
    base_value = Q.check_unit(base_value, "base_value")
    if check:
        H = _median_H(f, order)
        if H < -0.5:
            raise OrientationError(f"input has H = {H:.3f} (< 0): chart orientation is reversed")
        loop_max = _check_integrable(f, order, "CMC", loop_tol)
    else:
        loop_max = float(loop_residual(f, order).max())
    ex, ey = edge_steps(f, order)
    vals, drift = _sweep(ex, ey, base_value, base_point, f.shape, True, path_order)
    if drift > MAX_DRIFT:
        raise IntegrationUnstableError(f"unit-norm drift {drift:.3e} exceeds {MAX_DRIFT:g}")
    ft = S.ImmersionGrid(vals, f.hx, f.hy, "S3", f.x0, f.y0, dict(f.boundary_flags))
    pair = CousinPair(f, ft, tuple(base_point), drift, loop_max, order)
    if check:
        err = isometry_error(pair.f, pair.ftilde, order, GATE_RING)
        if err > TAU_ISOM:
            raise NotIntegrableError(f"cousin is not isometric to input (error {err:.3e} > {TAU_ISOM:g})")
    return pair


def integrate_to_r3(ftilde, base_point=(0, 0), base_value=(0.0, 0.0, 0.0), order=S.DEFAULT_ORDER,
                    path_order="row", check=True, loop_tol=None):
    """CMC-1 cousin f in R^3 of a minimal grid f~, with f(base_point) = base_value."""
    if ftilde.ambient != "S3":
        raise InvalidInputError("integrate_to_r3 needs an S3 grid")
    base = Q.imag(np.asarray(base_value, float)) if np.size(base_value) == 3 else np.asarray(base_value, float)
    if check:
        loop_max = _check_integrable(ftilde, order, "minimal", loop_tol)
    else:
        loop_max = float(loop_residual(ftilde, order).max())
    ex, ey = edge_steps(ftilde, order)
    vals, _ = _sweep(ex, ey, base, base_point, ftilde.shape, False, path_order)
    vals[..., 0] = 0.0
    f = S.ImmersionGrid(vals, ftilde.hx, ftilde.hy, "R3", ftilde.x0, ftilde.y0, dict(ftilde.boundary_flags))
    pair = CousinPair(f, ftilde, tuple(base_point), 0.0, loop_max, order)
    if check:
        H = _median_H(f, order)
        if H < -0.5:
            raise OrientationError(f"integrated surface has H = {H:.3f}: input orientation is reversed")
        err = isometry_error(pair.f, pair.ftilde, order, GATE_RING)
        if err > TAU_ISOM:
            raise NotIntegrableError(f"cousin is not isometric to input (error {err:.3e} > {TAU_ISOM:g})")
    return pair


def left_translate(pair, a):
    """The pair with f~ replaced by a f~ (same f)."""
    a = Q.check_unit(a, "a")
    ft = pair.ftilde.replace(values=Q.qmul(a, pair.ftilde.values), tangents=None)
    return CousinPair(pair.f, ft, pair.base_point, pair.drift_log, pair.loop_residual_max, pair.order)


# ------------------------------------------------------ structure checks


def verify_normal_relation(pair):
    """Pointwise |nu~ - f~ nu|."""
    nu = S.normal(pair.f, pair.order)
    nut = S.normal(pair.ftilde, pair.order)
    return Q.qnorm(nut - Q.qmul(pair.ftilde.values, nu))


def _orthonormal_norm(T, m):
    """Spectral norm of (1,1)-tensors T given in the coordinate frame of metric m."""
    L = np.linalg.cholesky(m.matrix())
    # coordinates -> orthonormal: T_on = L^T T L^{-T}
    Lt = np.swapaxes(L, -1, -2)
    T_on = Lt @ T @ np.linalg.inv(Lt)
    return np.linalg.norm(T_on, ord=2, axis=(-2, -1))


def verify_shape_relation(pair):
    """Pointwise operator norm of J S~ - S + Id."""
    sh = S.shape_operator(pair.f, pair.order)
    sht = S.shape_operator(pair.ftilde, pair.order)
    Jm = S.J_matrix(sh.metric)
    R = Jm @ sht.S - sh.S + np.eye(2)
    return _orthonormal_norm(R, sh.metric)


def hopf_boundary_defect(ftilde, edge, u, order=S.DEFAULT_ORDER):
    """Max deviation of the unit tangent of f~ along a grid edge from +-f~ u."""
    fx, fy = S.derivatives(ftilde, order)
    sl = {"x0": (0, slice(None)), "x1": (-1, slice(None)), "y0": (slice(None), 0), "y1": (slice(None), -1)}[edge]
    t = (fy if edge in ("x0", "x1") else fx)[sl]
    t = t / np.linalg.norm(t, axis=-1, keepdims=True)
    fu = Q.qmul(ftilde.values[sl], Q.check_sphere_point(u))
    return float(np.max(np.minimum(Q.qnorm(t - fu), Q.qnorm(t + fu))))


# ---------------------------------------------------------------- periods


def _edge_of(node, shape):
    i, j = node
    nx, ny = shape
    edges = set()
    if i == 0:
        edges.add("x0")
    if i == nx - 1:
        edges.add("x1")
    if j == 0:
        edges.add("y0")
    if j == ny - 1:
        edges.add("y1")
    return edges


def _validate_path(path, g):
    path = [tuple(int(c) for c in p) for p in path]
    if len(path) < 2:
        raise PathError("path needs at least two nodes")
    for p in path:
        if not (0 <= p[0] < g.nx and 0 <= p[1] < g.ny):
            raise PathError(f"path node {p} outside the grid")
    for a, b in zip(path, path[1:]):
        if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
            raise PathError(f"path nodes {a} and {b} are not grid-adjacent")
    comps = set(g.boundary_flags) or set(S.EDGES)
    start = _edge_of(path[0], g.shape) & comps
    end = _edge_of(path[-1], g.shape) & comps
    if not any(a != b for a in start for b in end):
        raise PathError("path must run from one boundary component to another")
    return path


def _edge_integrals(q, g, order):
    """Integrals of a nodal scalar field over every x-edge and y-edge."""
    return (_additive_steps(q[..., None], g.hx, 0, order)[..., 0],
            _additive_steps(q[..., None], g.hy, 1, order)[..., 0])


def _sum_along(path, ix, iy):
    total = 0.0
    for (a0, a1), (b0, b1) in zip(path, path[1:]):
        if b0 == a0 + 1:
            total += ix[a0, a1]
        elif b0 == a0 - 1:
            total -= ix[b0, a1]
        elif b1 == a1 + 1:
            total += iy[a0, a1]
        else:
            total -= iy[a0, b1]
    return total


def period_forms(pair, path, direction=Q.K):
    """Both integral forms of the period along a boundary-to-boundary path.

    Returns (P_f, P_ftilde): the height difference of f along ``direction``,
    and minus the integral of <eta~, f~ u> computed on the cousin alone.
    """
    u = Q.check_sphere_point(direction, "direction")
    path = _validate_path(path, pair.f)
    f = pair.f.values
    p_f = float(Q.qdot(f[path[-1]] - f[path[0]], u))
    ft = pair.ftilde
    jx, jy = _rotated_tangents(ft, pair.order)
    fu = Q.qmul(ft.values, u)
    ix, _ = _edge_integrals(Q.qdot(jx, fu), ft, pair.order)
    _, iy = _edge_integrals(Q.qdot(jy, fu), ft, pair.order)
    p_ft = -float(_sum_along(path, ix, iy))
    return p_f, p_ft


def period(pair, path, direction=Q.K, tol=TAU_PERIOD):
    """Signed height difference along ``direction``; both forms must agree within tol."""
    p_f, p_ft = period_forms(pair, path, direction)
    if abs(p_f - p_ft) > tol:
        raise NotIntegrableError(f"period forms disagree: {p_f:.6e} vs {p_ft:.6e}")
    return p_f


def staircase_path(start, end, first="x"):
    """Grid path from start to end moving along ``first`` then the other axis."""
    (i0, j0), (i1, j1) = start, end
    path = [(i0, j0)]
    i, j = i0, j0
    moves = [("x", i1), ("y", j1)] if first == "x" else [("y", j1), ("x", i1)]
    for ax, target in moves:
        while (i if ax == "x" else j) != target:
            if ax == "x":
                i += 1 if target > i else -1
            else:
                j += 1 if target > j else -1
            path.append((i, j))
    return path
