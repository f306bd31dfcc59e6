"""Spherical triples, necksize trigonometry and force balancing.

Conventions used throughout:

* necksize n_i is the spherical distance from p_i to p_{i+1} (labels mod 3);
* canonical coordinates put the circle through the three points on a
  circle of latitude, p1 at longitude 0 and p2, p3 eastward of it;
* chirality "right" means positive canonical latitude, which is the same as
  det(p1, p2, p3) > 0.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import quat as Q
from .errors import InadmissibleError, InvalidInputError, NotHopfFiberError

EPS_DISTINCT = 1e-8
RHO_CLUSTER = 1e-3
SLACK_TOL = 1e-12
CHIRALITIES = ("left", "right")


def _as_vec3(p, name):
    p = np.asarray(p, dtype=float)
    if p.shape == (4,):
        if abs(p[0]) > Q.EPS_UNIT:
            raise InvalidInputError(f"{name} must be an imaginary quaternion")
        p = p[1:]
    if p.shape != (3,):
        raise InvalidInputError(f"{name} must be a 3-vector, got shape {p.shape}")
    nrm = np.linalg.norm(p)
    if not np.isfinite(nrm) or abs(nrm - 1.0) > 1e-6:
        raise InvalidInputError(f"{name} is not on the unit sphere (norm {nrm})")
    return p / nrm


@dataclass(frozen=True, eq=False)
class SphericalTriple:
    """Three labeled, pairwise distinct points of S^2 (stored as 3-vectors)."""

    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray

    def __post_init__(self):
        pts = [_as_vec3(p, f"p{k}") for k, p in enumerate((self.p1, self.p2, self.p3), 1)]
        for a in range(3):
            b = (a + 1) % 3
            if Q.angle(pts[a], pts[b]) <= EPS_DISTINCT:
                raise InvalidInputError(f"points p{a + 1} and p{b + 1} coincide")
        for name, p in zip(("p1", "p2", "p3"), pts):
            p.setflags(write=False)
            object.__setattr__(self, name, p)

    @property
    def points(self):
        return np.stack([self.p1, self.p2, self.p3])

    def rotated(self, R):
        """Image under a rotation given as a 3x3 matrix or a unit quaternion."""
        R = np.asarray(R, dtype=float)
        if R.shape == (4,):
            R = Q.rotation_matrix(R)
        return SphericalTriple(*(self.points @ R.T))

    def reflected(self):
        """Mirror image through the equatorial (xy) plane."""
        return SphericalTriple(*(self.points * np.array([1.0, 1.0, -1.0])))

    def determinant(self):
        return float(np.linalg.det(self.points))


class NecksizeVector(NamedTuple):
    n1: float
    n2: float
    n3: float


@dataclass(frozen=True)
class CanonicalTripleCoords:
    latitude: float
    lon2: float
    lon3: float

    def to_triple(self):
        c = np.cos(self.latitude)
        s = np.sin(self.latitude)
        return SphericalTriple(*(np.array([c * np.cos(lon), c * np.sin(lon), s]) for lon in (0.0, self.lon2, self.lon3)))


@dataclass(frozen=True)
class AdmissibilityVerdict:
    admissible: bool
    margin: float
    margins: dict

    def __bool__(self):
        return self.admissible


@dataclass(frozen=True, eq=False)
class ForceSystem:
    """Weights w_i and unit axis directions a_i in the ij-plane."""

    weights: np.ndarray
    axes: np.ndarray
    angles: dict

    @property
    def residual(self):
        return float(np.linalg.norm(self.weights @ self.axes))


# ------------------------------------------------------------- distances


def triple_distances(t):
    """NecksizeVector (d(p1,p2), d(p2,p3), d(p3,p1))."""
    p = t.points
    return NecksizeVector(*(float(Q.angle(p[k], p[(k + 1) % 3])) for k in range(3)))


def check_necksize_inequalities(n):
    """Spherical triangle inequalities n_i <= n_j + n_k and n1 + n2 + n3 <= 2 pi.

    Equality cases are admissible.  Slacks within 1e-12 of zero are
    reported as exactly zero.
    """
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or not np.all(np.isfinite(n)):
        raise InvalidInputError("necksizes must be three finite numbers")
    if np.any(n <= 0) or np.any(n > np.pi + SLACK_TOL):
        raise InvalidInputError(f"each necksize must lie in (0, pi], got {n.tolist()}")
    margins = {f"n{k + 1}": float(n[(k + 1) % 3] + n[(k + 2) % 3] - n[k]) for k in range(3)}
    margins["sum"] = float(2 * np.pi - n.sum())
    margins = {k: (0.0 if abs(v) <= SLACK_TOL else v) for k, v in margins.items()}
    margin = min(margins.values())
    return AdmissibilityVerdict(margin >= 0.0, margin, margins)


def triple_from_necksizes(n, chirality="right"):
    """A triple realizing the necksizes; the chiralities are mirror images.

    p1 = i, p2 in the ij-plane at distance n1, p3 above the plane for
    "right" and below for "left".
    """
    if chirality not in CHIRALITIES:
        raise InvalidInputError(f"chirality must be one of {CHIRALITIES}")
    verdict = check_necksize_inequalities(n)
    if not verdict:
        raise InadmissibleError(f"necksizes {list(map(float, n))} violate {min(verdict.margins, key=verdict.margins.get)}")
    n1, n2, n3 = map(float, n)
    p1 = np.array([1.0, 0.0, 0.0])
    p2 = np.array([np.cos(n1), np.sin(n1), 0.0])
    # Gram determinant of (p1, p2, p3) as a product over the slacks; equality
    # cases (snapped to zero slack) then give exactly planar triples
    m = verdict.margins
    gram = 4 * np.sin(m["sum"] / 2) * np.prod([np.sin(m[k] / 2) for k in ("n1", "n2", "n3")])
    sgn = 1.0 if chirality == "right" else -1.0
    if np.sin(n1) < 1e-15:
        p3 = np.array([np.cos(n3), np.sin(n3), 0.0])
    else:
        p3 = np.array([np.cos(n3), (np.cos(n2) - np.cos(n1) * np.cos(n3)) / np.sin(n1),
                       sgn * np.sqrt(max(gram, 0.0)) / np.sin(n1)])
    return SphericalTriple(p1, p2, p3)


# -------------------------------------------------------- canonical form


def _canonical_frame(t):
    """Rotation matrix taking the triple's circle pole to +z and p1 to longitude 0."""
    p = t.points
    c = np.cross(p[1] - p[0], p[2] - p[0])
    c /= np.linalg.norm(c)
    e1 = p[0] - np.dot(p[0], c) * c
    ln = np.linalg.norm(e1)
    if ln < EPS_DISTINCT:
        raise InvalidInputError("numerically coincident points: circle through the triple is degenerate")
    e1 /= ln
    return np.stack([e1, np.cross(c, e1), c])


def canonicalize_triple(t):
    """(latitude, lon2, lon3) with p1 at longitude 0 and p2, p3 proceeding eastward."""
    R = _canonical_frame(t)
    q = t.points @ R.T
    lat = float(np.arctan2(np.mean(q[:, 2]), np.mean(np.hypot(q[:, 0], q[:, 1]))))
    lon = np.mod(np.arctan2(q[:, 1], q[:, 0]), 2 * np.pi)
    lon2, lon3 = float(lon[1]), float(lon[2])
    if lon2 >= 2 * np.pi:
        lon2 = 0.0
    return CanonicalTripleCoords(lat, lon2, lon3)


def canonical_rotation(t):
    """The rotation (3x3 matrix) used by :func:`canonicalize_triple`."""
    return _canonical_frame(t)


# ----------------------------------------------------------------- forces


def end_weight(n, H=1.0):
    """Force magnitude n (1 - H n / 2 pi) of an end asymptotic to a surface of revolution."""
    n = np.asarray(n, dtype=float)
    if np.any(n <= 0):
        raise InvalidInputError("necksize must be positive")
    out = n * (1.0 - H * n / (2 * np.pi))
    return float(out) if out.ndim == 0 else out


def axis_angles_from_necksizes(n, H=1.0):
    """Angles between end axes for which the end forces balance.

    The weighted axes w_i a_i close up into a planar triangle, so
    cos theta_ij = (w_k^2 - w_i^2 - w_j^2) / (2 w_i w_j).  a_1 is put along
    i, a_2 counterclockwise and a_3 clockwise from it; the residual
    |sum w_i a_i| is then an honest check.
    """
    verdict = check_necksize_inequalities(n)
    if not verdict:
        raise InadmissibleError(f"necksizes {list(map(float, n))} are not admissible")
    w = np.array([end_weight(v, H) for v in n])
    for k in range(3):
        if w[k] > w[(k + 1) % 3] + w[(k + 2) % 3] + 1e-14:
            raise InadmissibleError(f"weights {w.tolist()} violate closure: such necksizes cannot balance")
    angles = {}
    for i, j in ((0, 1), (1, 2), (2, 0)):
        k = 3 - i - j
        c = (w[k] ** 2 - w[i] ** 2 - w[j] ** 2) / (2 * w[i] * w[j])
        angles[f"theta{i + 1}{j + 1}"] = float(np.arccos(np.clip(c, -1.0, 1.0)))
    t12, t31 = angles["theta12"], angles["theta31"]
    axes = np.array([[1.0, 0.0, 0.0], [np.cos(t12), np.sin(t12), 0.0], [np.cos(t31), -np.sin(t31), 0.0]])
    return ForceSystem(w, axes, angles)


# -------------------------------------------------------- classifying map


_EDGE_SLICES = {"x0": (0, slice(None)), "x1": (-1, slice(None)), "y0": (slice(None), 0), "y1": (slice(None), -1)}


def boundary_cluster(ftilde, edge, u=Q.K):
    """k-Hopf image of one grid edge: (centroid on S^2 as a 3-vector, spread in radians)."""
    vals = ftilde.values[_EDGE_SLICES[edge]]
    proj = Q.hopf_project(np.broadcast_to(Q.check_sphere_point(u), vals.shape), vals)
    center = Q.sphere_point(proj.mean(axis=0))
    return Q.vec(center), float(np.max(Q.angle(proj, center)))


def classify_boundary(ftilde, edges=None, radius=RHO_CLUSTER, u=Q.K):
    """Hopf-project each boundary component of a cousin grid to a point.

    ``edges`` lists the components in label order; by default the flagged
    edges of the grid in x0, x1, y0, y1 order.  Two components give a pair
    of 3-vectors, three give a :class:`SphericalTriple`.
    """
    if ftilde.ambient != "S3":
        raise InvalidInputError("classify_boundary needs an S3 grid")
    if edges is None:
        edges = [e for e in _EDGE_SLICES if e in ftilde.boundary_flags]
    if len(edges) not in (2, 3):
        raise InvalidInputError(f"need 2 or 3 boundary components, got {len(edges)}")
    pts = []
    for e in edges:
        c, spread = boundary_cluster(ftilde, e, u)
        if spread > radius:
            raise NotHopfFiberError(f"boundary {e} is not a Hopf fiber (cluster radius {spread:.3e} > {radius:g})")
        pts.append(c)
    return tuple(pts) if len(pts) == 2 else SphericalTriple(*pts)


# ----------------------------------------------------------------- records


def triple_record(t):
    """JSON-ready description of a triple."""
    n = triple_distances(t)
    c = canonicalize_triple(t)
    v = check_necksize_inequalities(n)
    return {
        "p1": t.p1.tolist(),
        "p2": t.p2.tolist(),
        "p3": t.p3.tolist(),
        "canonical": {"latitude": c.latitude, "lon2": c.lon2, "lon3": c.lon3},
        "necksizes": list(n),
        "necksize_convention": "n_i = dist(p_i, p_(i+1)), labels mod 3",
        "admissible": v.admissible,
        "margins": v.margins,
    }


def force_record(fs, n):
    return {
        "necksizes": [float(v) for v in n],
        "weights": fs.weights.tolist(),
        "axes": fs.axes.tolist(),
        "angles": fs.angles,
        "residual": fs.residual,
    }


def random_admissible_necksizes(rng, size=None):
    """Uniform samples from the admissible necksize region (rejection sampling)."""
    count = 1 if size is None else int(size)
    out = []
    while len(out) < count:
        n = rng.uniform(0.0, np.pi, 3)
        if np.all(n > 1e-6) and check_necksize_inequalities(n):
            out.append(n)
    return out[0] if size is None else np.array(out)
