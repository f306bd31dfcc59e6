"""Spherical helicoids, Delaunay unduloids and their measurements.

The spherical helicoid with parameter n is

    h(x, y) = p(y) (cos x + u(y) sin x),
    p(y) = cos ny - i sin ny,   u(y) = j cos 2 pi y + k sin 2 pi y.

Its natural (x, y) chart is orthogonal with metric dx^2 + G(x) dy^2,
G = n^2 cos^2 x + (2 pi - n)^2 sin^2 x.  A conformal chart (sigma, y) is
obtained from d sigma = dx / sqrt(G), which is an incomplete elliptic
integral; its inverse is a Jacobi amplitude.

For 0 < n <= pi the cousin of h on |y| <= 1/4 is half an unduloid of
necksize n with H = 1.  The profile ODE oracle integrates the meridian of
that unduloid independently, so the two can be compared.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import ellipj, ellipk, ellipkinc
from scipy.spatial import cKDTree

from . import cousin as C
from . import quat as Q
from . import surface as S
from .errors import CousinLabError, InvalidInputError

TWO_PI = 2 * np.pi
DEFAULT_RESOLUTION = (400, 200)
ORACLE_TOL = 1e-10
CLUSTER_RADIUS = 1e-4


class IntegrationQualityError(CousinLabError):
    module = "delaunay"


def check_helicoid_n(n):
    if not np.isfinite(n) or np.isclose(n, 0.0, atol=1e-12) or np.isclose(n, TWO_PI, atol=1e-12):
        raise InvalidInputError(f"helicoid is not immersed for n = {n} (n must avoid 0 and 2 pi)")


def check_unduloid_necksize(n):
    if not (0 < n <= np.pi + 1e-12):
        raise InvalidInputError(f"unduloid necksize must lie in (0, pi], got {n}")
    return min(float(n), np.pi)


@dataclass(frozen=True)
class HelicoidParams:
    """Parameter n and a sampling rectangle; ``resolution`` counts intervals."""

    n: float
    x_range: tuple = (0.0, TWO_PI)
    y_range: tuple = (-0.25, 0.25)
    resolution: tuple = DEFAULT_RESOLUTION

    def __post_init__(self):
        check_helicoid_n(self.n)
        if self.resolution[0] < 2 or self.resolution[1] < 2:
            raise InvalidInputError("resolution must be at least 2x2 intervals")

    def axes(self):
        x = np.linspace(*self.x_range, self.resolution[0] + 1)
        y = np.linspace(*self.y_range, self.resolution[1] + 1)
        return x, y


# ----------------------------------------------------------- helicoid


def helicoid_p(y, n):
    y = np.asarray(y, dtype=float)
    return Q.quat(np.cos(n * y), -np.sin(n * y), 0 * y, 0 * y)


def helicoid_u(y):
    y = np.asarray(y, dtype=float)
    return Q.quat(0 * y, 0 * y, np.cos(TWO_PI * y), np.sin(TWO_PI * y))


def helicoid(x, y, n):
    """h(x, y) written out in components (works for complex arguments too)."""
    b = TWO_PI - n
    return np.stack([np.cos(x) * np.cos(n * y), -np.cos(x) * np.sin(n * y),
                     np.sin(x) * np.cos(b * y), np.sin(x) * np.sin(b * y)], axis=-1)


def helicoid_tangents(x, y, n):
    """Exact (h_x, h_y)."""
    b = TWO_PI - n
    hx = np.stack([-np.sin(x) * np.cos(n * y), np.sin(x) * np.sin(n * y),
                   np.cos(x) * np.cos(b * y), np.cos(x) * np.sin(b * y)], axis=-1)
    hy = np.stack([-n * np.cos(x) * np.sin(n * y), -n * np.cos(x) * np.cos(n * y),
                   -b * np.sin(x) * np.sin(b * y), b * np.sin(x) * np.cos(b * y)], axis=-1)
    return hx, hy


def helicoid_G(x, n):
    return n**2 * np.cos(x) ** 2 + (TWO_PI - n) ** 2 * np.sin(x) ** 2


CHARTS = ("natural", "conformal")


def _helicoid_grid(n, u, y, chart, exact_tangents, flags):
    """Sample h on the tensor grid (u, y), where u is x or sigma depending on chart."""
    to_x = (lambda U: U) if chart == "natural" else (lambda U: x_of_sigma(U, n))
    tan = None
    if exact_tangents:
        def tu(U, Y):
            X = to_x(U)
            hx = helicoid_tangents(X, Y, n)[0]
            return hx if chart == "natural" else hx * np.sqrt(helicoid_G(X, n))[..., None]

        tan = (tu, lambda U, Y: helicoid_tangents(to_x(U), Y, n)[1])
    return S.from_function(lambda U, Y: helicoid(to_x(U), Y, n), u, y, "S3", tangents=tan, boundary_flags=flags)


def spherical_helicoid(params, exact_tangents=False, chart="natural"):
    """Grid of h over ``params``' rectangle.

    ``chart="natural"`` samples uniformly in x (orthogonal, metric
    dx^2 + G dy^2); ``"conformal"`` samples uniformly in sigma over the same
    x range, giving a conformal grid with spacing (h_sigma, h_y).
    """
    if chart not in CHARTS:
        raise InvalidInputError(f"chart must be one of {CHARTS}")
    x, y = params.axes()
    if chart == "conformal":
        s0, s1 = (float(sigma_of_x(v, params.n)) for v in params.x_range)
        x = np.linspace(s0, s1, params.resolution[0] + 1)
    flags = {}
    if np.isclose(params.y_range[0], -0.25) and np.isclose(params.y_range[1], 0.25):
        flags = {"y0": "mirror", "y1": "mirror"}
    return _helicoid_grid(params.n, x, y, chart, exact_tangents, flags)


def _elliptic_form(n):
    """(scale, m, shifted): G = scale^2 (1 - m sin^2 t) with t = x - pi/2 when shifted."""
    b = TWO_PI - n
    if abs(n) <= abs(b):
        return abs(b), 1.0 - (n / b) ** 2, True
    return abs(n), 1.0 - (b / n) ** 2, False


def sigma_of_x(x, n):
    """Conformal coordinate sigma(x) = int_0^x dt / sqrt(G(t))."""
    c, m, shifted = _elliptic_form(n)
    x = np.asarray(x, dtype=float)
    if shifted:
        return (ellipkinc(x - np.pi / 2, m) + ellipk(m)) / c
    return ellipkinc(x, m) / c


def x_of_sigma(sigma, n):
    """Inverse of :func:`sigma_of_x` via the Jacobi amplitude."""
    c, m, shifted = _elliptic_form(n)
    sigma = np.asarray(sigma, dtype=float)
    if shifted:
        return np.pi / 2 + ellipj(c * sigma - ellipk(m), m)[3]
    return ellipj(c * sigma, m)[3]


def conformal_helicoid(n, h=0.005, x_span=np.pi, y_range=(-0.25, 0.25), exact_tangents=False):
    """Grid of h in the conformal chart (sigma, y) with equal spacing h.

    Covers x in [0, x_span] and the y range, both rounded down to whole
    steps of h.
    """
    check_helicoid_n(n)
    sig = h * np.arange(int(np.floor(float(sigma_of_x(x_span, n)) / h + 1e-9)) + 1)
    ny = max(int(np.floor((y_range[1] - y_range[0]) / h + 1e-9)), 2)
    y = y_range[0] + h * np.arange(ny + 1)
    return _helicoid_grid(n, sig, y, "conformal", exact_tangents, {})


# ---------------------------------------------------------- ODE oracle


@dataclass(frozen=True, eq=False)
class UnduloidProfile:
    """Meridian of the H = 1 unduloid, sampled by arclength over one period.

    ``phi`` is the inclination of the meridian from the radial direction
    (dr/ds = cos phi, dz/ds = sin phi); ``force`` is 2 pi (r sin phi - r^2).
    """

    n: float
    s: np.ndarray
    r: np.ndarray
    z: np.ndarray
    phi: np.ndarray
    neck_radius: float
    bulge_radius: float
    bulge_arclength: float
    bulge_height: float
    period_arclength: float
    period_height: float
    dense: object = field(default=None, repr=False)

    @property
    def force(self):
        return TWO_PI * (self.r * np.sin(self.phi) - self.r**2)

    def sample(self, s):
        """(r, z, phi) at arclengths s within one period."""
        s = np.asarray(s, dtype=float)
        if self.dense is None:
            return np.full_like(s, self.neck_radius), s.copy(), np.full_like(s, np.pi / 2)
        r, z, phi = self.dense(s.ravel())
        return r.reshape(s.shape), z.reshape(s.shape), phi.reshape(s.shape)

    def to_csv(self, path):
        data = np.column_stack([self.s, self.r, self.z, self.phi, self.force])
        np.savetxt(path, data, delimiter=",", header="s,r,z,phi,force", comments="", fmt="%.17g")


def _profile_rhs(s, y):
    r, z, phi = y
    return [np.cos(phi), np.sin(phi), 2.0 - np.sin(phi) / r]


def unduloid_profile_oracle(n, samples=2001, tol=ORACLE_TOL):
    """Integrate the axisymmetric H = 1 meridian starting at a neck of radius n / 2 pi."""
    n = check_unduloid_necksize(n)
    r0 = n / TWO_PI
    if np.isclose(n, np.pi, rtol=0, atol=1e-12):
        s = np.linspace(0.0, np.pi, samples)
        return UnduloidProfile(n, s, np.full_like(s, 0.5), s.copy(), np.full_like(s, np.pi / 2), 0.5, 0.5,
                               np.pi / 2, np.pi / 2, np.pi, np.pi)

    def bulge(s, y):
        return np.cos(y[2])

    bulge.direction = -1

    def neck(s, y):
        return np.cos(y[2])

    neck.direction = 1
    # start a hair past the neck so the first event is the bulge, not s = 0
    sol = solve_ivp(_profile_rhs, (0.0, 4 * np.pi), [r0, 0.0, np.pi / 2], method="RK45", rtol=tol,
                    atol=tol * 1e-2, dense_output=True, events=(bulge, neck))
    s_b = [t for t in sol.t_events[0] if t > 1e-9]
    s_n = [t for t in sol.t_events[1] if t > 1e-9]
    if not s_b or not s_n:
        raise IntegrationQualityError(f"profile ODE did not close a period for n = {n}")
    s_b, s_n = s_b[0], s_n[0]
    s = np.linspace(0.0, s_n, samples)
    r, z, phi = sol.sol(s)
    rb, zb, _ = sol.sol(s_b)
    _, zn, _ = sol.sol(s_n)
    return UnduloidProfile(n, s, r, z, phi, r0, float(rb), float(s_b), float(zb), float(s_n), float(zn),
                           dense=sol.sol)


def oracle_unduloid_grid(n, resolution=DEFAULT_RESOLUTION, s_span=TWO_PI, profile=None):
    """Half-unduloid built from the ODE oracle in the chart (s, y) -> meridian
    arclength s from a neck, rotation angle 2 pi y with y in [-1/4, 1/4].

    This is the chart the helicoid's natural (x, y) chart maps to, so the
    two can be compared node by node.  Exact tangents come from the ODE
    right-hand side.
    """
    n = check_unduloid_necksize(n)
    prof = unduloid_profile_oracle(n) if profile is None else profile
    s = np.linspace(0.0, s_span, resolution[0] + 1)
    y = np.linspace(-0.25, 0.25, resolution[1] + 1)

    def rzphi(Sg):
        k, rem = np.divmod(Sg, prof.period_arclength)
        r, z, phi = prof.sample(rem)
        return r, z + k * prof.period_height, phi

    def f(Sg, Y):
        r, z, _ = rzphi(Sg)
        return np.stack([z, r * np.sin(TWO_PI * Y), -r * np.cos(TWO_PI * Y)], -1)

    def fs(Sg, Y):
        _, _, phi = rzphi(Sg)
        dr, dz = np.cos(phi), np.sin(phi)
        return Q.imag(np.stack([dz, dr * np.sin(TWO_PI * Y), -dr * np.cos(TWO_PI * Y)], -1))

    def fy(Sg, Y):
        r, _, _ = rzphi(Sg)
        return Q.imag(np.stack([0 * r, TWO_PI * r * np.cos(TWO_PI * Y), TWO_PI * r * np.sin(TWO_PI * Y)], -1))

    return S.from_function(f, s, y, "R3", tangents=(fs, fy), boundary_flags={"y0": "mirror", "y1": "mirror"})


# ----------------------------------------------------------- generator


def _align_frame(f_vals, fx_vals=None):
    """Rigid motion putting the neck-circle centers on the i axis and the
    boundary in the ij-plane, with the surface above it.

    Returns (unit quaternion a, translation c) such that the aligned surface
    is a (f - c) a-bar.
    """
    neck_a = 0.5 * (f_vals[0, 0] + f_vals[0, -1])
    mid = f_vals.shape[0] // 2
    neck_b = 0.5 * (f_vals[mid, 0] + f_vals[mid, -1])
    axis = Q.vec(neck_b - neck_a)
    if np.linalg.norm(axis) < 1e-12:
        # cylinder: centers coincide only if the grid is degenerate along x
        raise IntegrationQualityError("cannot determine the unduloid axis from the neck circles")
    e1 = axis / np.linalg.norm(axis)
    bd = Q.vec(np.concatenate([f_vals[:, 0], f_vals[:, -1]]) - neck_a)
    bd = bd - np.outer(bd @ e1, e1)
    # boundary points span the mirror plane together with the axis
    e2 = bd[np.argmax(np.linalg.norm(bd, axis=1))]
    e2 = e2 / np.linalg.norm(e2)
    e3 = np.cross(e1, e2)
    interior = Q.vec(f_vals[:, f_vals.shape[1] // 2] - neck_a) @ e3
    if np.mean(interior) < 0:
        e2, e3 = -e2, -e3
    R = np.stack([e1, e2, e3])  # rows: new i, j, k expressed in old coordinates
    return Q.quaternion_from_matrix(R), neck_a


def generate_unduloid(n, resolution=DEFAULT_RESOLUTION, order=S.DEFAULT_ORDER, periods=1.0, chart="conformal"):
    """Half-unduloid of necksize n as the cousin of the spherical helicoid.

    The helicoid is sampled on x in [0, 2 pi periods], y in [-1/4, 1/4]
    (boundary rulings included) with exact tangents, integrated to R^3 and
    moved rigidly so the axis is the i axis through the origin, the
    boundary lies in the ij-plane and the half sits above it.  The same
    rotation is applied to the cousin so the pair stays related by
    d f~ = f~ df o J.
    """
    n = check_unduloid_necksize(n)
    params = HelicoidParams(n, (0.0, TWO_PI * periods), (-0.25, 0.25), resolution)
    ht = spherical_helicoid(params, exact_tangents=True, chart=chart)
    pair = C.integrate_to_r3(ht, order=order)
    a, c = _align_frame(pair.f.values)
    fv = Q.rotate(a, pair.f.values - c)
    fv[..., 0] = 0.0
    # df = beta is exact here because the helicoid tangents are analytic
    f_tan = tuple(Q.rotate(a, t) for t in C.connection_form(ht, order))
    f = pair.f.replace(values=fv, tangents=f_tan)
    ftv = Q.rotate(a, ht.values)
    ft_tan = tuple(Q.rotate(a, t) for t in ht.tangents)
    ft = ht.replace(values=ftv, tangents=ft_tan)
    extras = {"n": n, "rotation": a, "translation": c, "helicoid_params": params, "chart": chart}
    return C.CousinPair(f, ft, pair.base_point, pair.drift_log, pair.loop_residual_max, order, extras)


def boundary_hopf_points(pair, radius=CLUSTER_RADIUS):
    """k-Hopf images of the two boundary rulings (edges y0 and y1).

    Each ruling must project to a single point within ``radius``.
    """
    ft = pair.ftilde.values
    out = []
    for j in (0, -1):
        proj = Q.hopf_project(np.broadcast_to(Q.K, ft[:, j].shape), ft[:, j])
        center = Q.sphere_point(proj.mean(axis=0))
        spread = float(np.max(Q.angle(proj, center)))
        if spread > radius:
            raise IntegrationQualityError(
                f"boundary ruling {'y0' if j == 0 else 'y1'} does not project to a point (spread {spread:.3e})")
        out.append(center)
    return out[0], out[1]


# --------------------------------------------------------- measurements


def _line_lengths(g, axis):
    """Length of every coordinate line running along ``axis`` (0: x-lines, 1: y-lines)."""
    pts = g.points()
    seg = np.linalg.norm(np.diff(pts, axis=axis), axis=-1)
    return seg.sum(axis=axis)


def measure_necksize(g, axis=1):
    """Twice the length of the shortest half-parallel at a neck.

    Parallels are the coordinate lines along ``axis``.  A neck is a local
    minimum of parallel length strictly inside the family; ends do not
    count.  Lengths are polygon lengths with one Richardson step, and the
    minimum is refined by a parabola through its neighbours.
    """
    pts = np.moveaxis(g.points(), 1 - axis, 0)
    lengths = np.array([_polyline_length(line) for line in pts])
    inner = np.arange(1, len(lengths) - 1)
    is_min = (lengths[inner] <= lengths[inner - 1]) & (lengths[inner] <= lengths[inner + 1])
    if not np.any(is_min):
        raise IntegrationQualityError("no interior minimum of parallel length (no neck found)")
    k = inner[is_min][np.argmin(lengths[inner][is_min])]
    lo, mid, hi = lengths[k - 1], lengths[k], lengths[k + 1]
    curv = lo - 2 * mid + hi
    best = mid - (hi - lo) ** 2 / (8 * curv) if curv > 0 else mid
    return 2.0 * float(best)


def _polyline_length(line):
    fine = np.linalg.norm(np.diff(line, axis=0), axis=-1).sum()
    if len(line) % 2 == 1 and len(line) >= 5:
        coarse = np.linalg.norm(np.diff(line[::2], axis=0), axis=-1).sum()
        fine = fine + (fine - coarse) / 3.0
    return fine


def circumference_at(g, i):
    """Full circumference of the parallel through x-index i (twice the half-circle length)."""
    return 2.0 * float(_polyline_length(g.points()[i]))


def meridian_length(g, i0, i1, j=None):
    """Polygon length (one Richardson step) of the x-line through y-index j
    between x-indices i0 and i1, measured on the sampled values."""
    j = g.ny // 2 if j is None else j
    return float(_polyline_length(g.points()[i0:i1 + 1, j]))


def without_tangents(pair):
    """The pair with f's attached tangents dropped, so checks difference the samples."""
    return C.CousinPair(pair.f.replace(tangents=None), pair.ftilde, pair.base_point, pair.drift_log,
                        pair.loop_residual_max, pair.order, dict(pair.extras))


def profile_curve(g, j=None):
    """(z, r) of an aligned half-unduloid along its x-line through y-index j:
    axial coordinate (along i) and distance from the i axis."""
    j = g.ny // 2 if j is None else j
    p = g.points()[:, j]
    return p[:, 0], np.linalg.norm(p[:, 1:], axis=-1)


def profile_hausdorff(g, profile, j=None, dense=20001):
    """Hausdorff distance between the cousin meridian and the oracle meridian.

    Oracle points cover the same axial window, shifted so both necks sit at
    z = 0 and repeated periodically.
    """
    z, r = profile_curve(g, j)
    z = z - z[0]
    zmax = z.max()
    reps = int(np.ceil((zmax + 1e-9) / profile.period_height)) + 1 if profile.period_height > 0 else 1
    s = np.linspace(0.0, profile.period_arclength, dense)
    ro, zo, _ = profile.sample(s)
    oz = np.concatenate([zo + k * profile.period_height for k in range(reps)])
    orr = np.concatenate([ro] * reps)
    keep = (oz >= -1e-12) & (oz <= zmax + 1e-12)
    oracle = np.column_stack([oz[keep], orr[keep]])
    cous = np.column_stack([z, r])
    d1 = cKDTree(oracle).query(cous)[0].max()
    # oracle -> cousin uses segment distances; node distances would just measure the spacing
    d2 = _points_to_polyline(oracle, cous).max()
    return float(max(d1, d2))


def _points_to_polyline(points, poly):
    a, b = poly[:-1], poly[1:]
    ab = b - a
    L2 = np.sum(ab * ab, axis=1)
    out = np.empty(len(points))
    for k in range(0, len(points), 2048):
        p = points[k:k + 2048, None, :]
        t = np.clip(np.sum((p - a) * ab, axis=-1) / np.where(L2 > 0, L2, 1), 0, 1)
        proj = a + t[..., None] * ab
        out[k:k + 2048] = np.min(np.linalg.norm(p - proj, axis=-1), axis=1)
    return out
