import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import unduloid
from cousinlab import moduli as M
from cousinlab import quat as Q
from cousinlab.errors import InadmissibleError, InvalidInputError, NotHopfFiberError

seeds = st.integers(0, 2**32 - 1)


def random_triple(rng):
    while True:
        p = Q.vec(Q.random_sphere_point(rng, 3))
        try:
            return M.SphericalTriple(*p)
        except InvalidInputError:
            continue


@settings(max_examples=200, deadline=None)
@given(seeds, st.sampled_from(M.CHIRALITIES))
def test_necksizes_round_trip(seed, chirality):
    n = M.random_admissible_necksizes(np.random.default_rng(seed))
    t = M.triple_from_necksizes(n, chirality)
    assert np.allclose(M.triple_distances(t), n, atol=1e-12)
    det = t.determinant()
    assert (det > 0) == (chirality == "right") or abs(det) < 1e-12


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_distances_of_random_triples_are_admissible(seed):
    t = random_triple(np.random.default_rng(seed))
    assert M.check_necksize_inequalities(M.triple_distances(t)).admissible


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_canonical_coords_are_rotation_invariant(seed):
    rng = np.random.default_rng(seed)
    t = random_triple(rng)
    a = Q.random_unit(rng)
    c0, c1 = M.canonicalize_triple(t), M.canonicalize_triple(t.rotated(a))
    assert abs(c0.latitude - c1.latitude) < 1e-10
    assert abs(np.angle(np.exp(1j * (c0.lon2 - c1.lon2)))) < 1e-10
    assert abs(np.angle(np.exp(1j * (c0.lon3 - c1.lon3)))) < 1e-10


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_canonical_coords_reconstruct_triple_up_to_rotation(seed):
    t = random_triple(np.random.default_rng(seed))
    c = M.canonicalize_triple(t)
    back = c.to_triple()
    assert np.allclose(M.triple_distances(back), M.triple_distances(t), atol=1e-10)
    R = M.canonical_rotation(t)
    assert np.allclose(t.points @ R.T, back.points, atol=1e-10)
    assert np.sign(c.latitude) == np.sign(t.determinant())
    assert 0 < c.lon2 < c.lon3 < 2 * np.pi


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_reflection_flips_latitude(seed):
    t = random_triple(np.random.default_rng(seed))
    c0, c1 = M.canonicalize_triple(t), M.canonicalize_triple(t.reflected())
    assert abs(c0.latitude + c1.latitude) < 1e-10


def test_equilateral_triple():
    n = [np.pi / 3] * 3
    right = M.canonicalize_triple(M.triple_from_necksizes(n, "right"))
    left = M.canonicalize_triple(M.triple_from_necksizes(n, "left"))
    expect = np.arcsin(np.sqrt(2 / 3))
    assert abs(right.latitude - expect) < 1e-12
    assert abs(left.latitude + expect) < 1e-12
    assert np.allclose([right.lon2, right.lon3], [2 * np.pi / 3, 4 * np.pi / 3])


def test_equality_cases_are_planar():
    for n in ([np.pi / 2, np.pi / 2, np.pi], [0.5, 1.0, 1.5], [2.0, 2.0, 2 * np.pi - 4.0]):
        v = M.check_necksize_inequalities(n)
        assert v.admissible and v.margin == 0.0
        t = M.triple_from_necksizes(n)
        assert M.canonicalize_triple(t).latitude == 0.0 or abs(t.determinant()) < 1e-15


def test_inadmissible_necksizes():
    v = M.check_necksize_inequalities([0.5, 0.5, 2.0])
    assert not v
    assert v.margins["n3"] < 0
    with pytest.raises(InadmissibleError):
        M.triple_from_necksizes([0.5, 0.5, 2.0])
    assert not M.check_necksize_inequalities([3.0, 3.0, 3.0])
    for bad in ([0.0, 1, 1], [1, 1, 4.0], [1, 1], [np.nan, 1, 1]):
        with pytest.raises(InvalidInputError):
            M.check_necksize_inequalities(bad)
    with pytest.raises(InvalidInputError):
        M.triple_from_necksizes([1, 1, 1], "up")


def test_triple_validation():
    with pytest.raises(InvalidInputError):
        M.SphericalTriple([1, 0, 0], [1, 0, 0], [0, 1, 0])
    with pytest.raises(InvalidInputError):
        M.SphericalTriple([2, 0, 0], [0, 1, 0], [0, 0, 1])
    t = M.SphericalTriple(Q.I, Q.J, Q.K)
    assert np.isclose(t.determinant(), 1.0)


# ----------------------------------------------------------------- forces


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_forces_balance(seed):
    n = M.random_admissible_necksizes(np.random.default_rng(seed))
    try:
        fs = M.axis_angles_from_necksizes(n)
    except InadmissibleError:
        return
    assert fs.residual < 1e-12
    assert np.allclose(fs.weights, [M.end_weight(v) for v in n])
    assert np.allclose(np.linalg.norm(fs.axes, axis=1), 1)


def test_end_weight():
    assert np.isclose(M.end_weight(np.pi), np.pi / 2)
    assert np.isclose(M.end_weight(1.0, H=0), 1.0)
    with pytest.raises(InvalidInputError):
        M.end_weight(0.0)


def test_force_record_is_json_ready():
    fs = M.axis_angles_from_necksizes([1.0, 1.0, 1.0])
    rec = M.force_record(fs, [1.0, 1.0, 1.0])
    assert rec["residual"] < 1e-12
    for k in ("theta12", "theta23", "theta31"):
        assert np.isclose(rec["angles"][k], 2 * np.pi / 3)


# --------------------------------------------------------- classification


def test_classify_unduloid_boundary():
    n = np.pi / 2
    p, q = M.classify_boundary(unduloid(n).ftilde)
    assert abs(Q.angle(p, q) - n) < 1e-6


def test_classify_rejects_non_fibre():
    ft = unduloid(np.pi / 2).ftilde
    with pytest.raises(NotHopfFiberError):
        M.classify_boundary(ft, edges=["x0", "y0"])
    with pytest.raises(InvalidInputError):
        M.classify_boundary(ft, edges=["y0"])


def test_triple_record():
    t = M.triple_from_necksizes([1.0, 1.2, 1.4])
    rec = M.triple_record(t)
    assert np.allclose(rec["necksizes"], [1.0, 1.2, 1.4])
    assert rec["admissible"]
