"""Quaternion algebra on numpy arrays, S^3 as unit quaternions, Hopf maps.

A quaternion is any array whose last axis has length 4, ordered
``(w, x, y, z)`` for the components along ``1, i, j, k``.  Points of S^3 are
unit quaternions; points of S^2 are unit imaginary quaternions (``w == 0``).
All functions broadcast over leading axes and never modify their inputs.
"""

import numpy as np

from .errors import InvalidInputError

EPS_UNIT = 1e-9

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])


def quat(w=0.0, x=0.0, y=0.0, z=0.0):
    return np.stack(np.broadcast_arrays(*(np.asarray(c, dtype=float) for c in (w, x, y, z))), axis=-1)


def imag(v):
    """Embed 3-vectors as imaginary quaternions."""
    v = np.asarray(v, dtype=float)
    return np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)


def vec(q):
    """Imaginary part as a 3-vector."""
    return np.asarray(q, dtype=float)[..., 1:]


def qmul(p, q):
    """Hamilton product."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def qconj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm(q):
    return np.linalg.norm(np.asarray(q, dtype=float), axis=-1)


def qinv(q):
    q = np.asarray(q, dtype=float)
    return qconj(q) / np.sum(q * q, axis=-1, keepdims=True)


def qdot(p, q):
    """Euclidean inner product in R^4 (equals <p, q> on Im H)."""
    return np.sum(np.asarray(p, dtype=float) * np.asarray(q, dtype=float), axis=-1)


def commutator(p, q):
    return qmul(p, q) - qmul(q, p)


def qexp(v):
    """Exponential of an imaginary quaternion, exp(v) = cos|v| + v sin|v|/|v|."""
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v[..., 1:], axis=-1)
    # sinc avoids the 0/0 at theta = 0
    s = np.sinc(theta / np.pi)
    out = v * s[..., None]
    out[..., 0] = np.cos(theta)
    return out


def qlog(p):
    """Logarithm of a unit quaternion as an imaginary quaternion (principal branch)."""
    p = np.asarray(p, dtype=float)
    vn = np.linalg.norm(p[..., 1:], axis=-1)
    theta = np.arctan2(vn, p[..., 0])
    scale = np.where(vn > 0, theta / np.where(vn > 0, vn, 1.0), 1.0)
    out = p * scale[..., None]
    out[..., 0] = 0.0
    return out


def normalize(q):
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def renormalize_if_drifted(q, eps=EPS_UNIT):
    """Project back to S^3 only where the norm has drifted by more than eps/10."""
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    return np.where(np.abs(n - 1.0) > eps / 10, q / n, q)


def check_unit(p, name="p", eps=EPS_UNIT):
    p = np.asarray(p, dtype=float)
    if p.shape[-1:] != (4,):
        raise InvalidInputError(f"{name} must have a trailing axis of length 4, got shape {p.shape}")
    dev = np.abs(np.linalg.norm(p, axis=-1) - 1.0)
    if np.any(dev > eps):
        raise InvalidInputError(f"{name} is not a unit quaternion (norm deviation {dev.max():.3e})")
    return renormalize_if_drifted(p, eps)


def check_sphere_point(u, name="u", eps=EPS_UNIT):
    u = check_unit(u, name, eps)
    if np.any(np.abs(u[..., 0]) > eps):
        raise InvalidInputError(f"{name} must be imaginary (real part {np.abs(u[..., 0]).max():.3e})")
    u = u.copy()
    u[..., 0] = 0.0
    return u


def sphere_point(v):
    """Normalize a 3-vector (or imaginary quaternion) to a point of S^2."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] == 3:
        v = imag(v)
    v = v.copy()
    v[..., 0] = 0.0
    return normalize(v)


def angle(a, b):
    """Angle between vectors via atan2(|a x b|, a.b); accurate near 0 and pi.

    Works for 3-vectors or imaginary quaternions.  For general quaternions
    the R^4 angle is returned.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = np.sum(a * b, axis=-1)
    na2 = np.sum(a * a, axis=-1)
    nb2 = np.sum(b * b, axis=-1)
    # |a|^2|b|^2 - (a.b)^2 is |a x b|^2 in any dimension (Lagrange identity)
    # but loses accuracy for tiny angles, so use the explicit cross product in 3D
    if a.shape[-1] == 4 and np.allclose(a[..., 0], 0) and np.allclose(b[..., 0], 0):
        a, b = a[..., 1:], b[..., 1:]
    if a.shape[-1] == 3:
        c = np.linalg.norm(np.cross(a, b), axis=-1)
    else:
        c = np.sqrt(np.maximum(na2 * nb2 - d * d, 0.0))
    return np.arctan2(c, d)


def sphere_distance(p, q):
    return angle(p, q)


def rotation_quaternion(axis, theta):
    """Unit quaternion a with v -> a v a^{-1} the rotation by theta about axis."""
    axis = sphere_point(axis)
    theta = np.asarray(theta, dtype=float)
    return qexp(axis * (theta / 2)[..., None])


def rotate(a, v):
    """Conjugation a v a-bar; a rotation of Im H when a is a unit quaternion."""
    return qmul(qmul(a, v), qconj(a))


def rotation_matrix(a):
    """3x3 rotation matrix of conjugation by unit quaternion a."""
    a = normalize(a)
    cols = [vec(rotate(a, e)) for e in (I, J, K)]
    return np.stack(cols, axis=-1)


def quaternion_from_matrix(R):
    """Unit quaternion realizing the rotation matrix R (sign fixed by w >= 0)."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    if tr > 0:
        s = 2.0 * np.sqrt(1.0 + tr)
        q = [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
    else:
        m = int(np.argmax(np.diag(R)))
        n1, n2 = (m + 1) % 3, (m + 2) % 3
        s = 2.0 * np.sqrt(1.0 + R[m, m] - R[n1, n1] - R[n2, n2])
        q = [0.0] * 4
        q[0] = (R[n2, n1] - R[n1, n2]) / s
        q[1 + m] = 0.25 * s
        q[1 + n1] = (R[n1, m] + R[m, n1]) / s
        q[1 + n2] = (R[n2, m] + R[m, n2]) / s
    q = normalize(np.array(q))
    return q if q[0] >= 0 else -q


def hopf_project(u, p):
    """u-Hopf projection p u p-bar of S^3 onto S^2."""
    u = check_sphere_point(u, "u")
    p = check_unit(p, "p")
    out = qmul(qmul(p, u), qconj(p))
    out[..., 0] = 0.0
    return renormalize_if_drifted(out)


def hopf_flow(u, p, t):
    """Point at parameter t on the u-Hopf circle through p, p (cos t + u sin t)."""
    u = check_sphere_point(u, "u")
    p = check_unit(p, "p")
    t = np.asarray(t, dtype=float)
    e = np.cos(t)[..., None] * ONE + np.sin(t)[..., None] * u
    return renormalize_if_drifted(qmul(p, e))


def hopf_field(u, p):
    """The left-invariant u-Hopf field p -> p u."""
    return qmul(check_unit(p, "p"), check_sphere_point(u, "u"))


def project_foreign_circle(u, v, p, samples=64):
    """Pi_u sampled along the v-Hopf circle through p for t in [0, 2 pi).

    The image is the circle of spherical radius angle(u, v) about
    ``hopf_project(v, p)``, covered twice at speed 2 sin(angle(u, v)).
    """
    t = np.linspace(0.0, 2 * np.pi, int(samples), endpoint=False)
    pts = hopf_flow(v, p, t)
    u = check_sphere_point(u, "u")
    return hopf_project(np.broadcast_to(u, pts.shape), pts)


def foreign_circle_center(v, p):
    """Center of the Pi_u image of the v-Hopf circle through p (independent of u)."""
    return hopf_project(v, p)


def random_unit(rng, size=None):
    """Uniformly distributed points of S^3."""
    shape = (4,) if size is None else tuple(np.atleast_1d(size)) + (4,)
    return normalize(rng.standard_normal(shape))


def random_sphere_point(rng, size=None):
    """Uniformly distributed points of S^2 as imaginary quaternions."""
    shape = (3,) if size is None else tuple(np.atleast_1d(size)) + (3,)
    return sphere_point(rng.standard_normal(shape))
