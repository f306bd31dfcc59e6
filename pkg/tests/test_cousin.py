import functools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cousinlab import cousin as C
from cousinlab import quat as Q
from cousinlab import shapes
from cousinlab import surface as S
from cousinlab.errors import (InvalidInputError, NotIntegrableError, OrientationError,
                              PathError)


@functools.lru_cache(maxsize=None)
def sphere_pair():
    return C.integrate_to_s3(shapes.sphere_chart(h=0.01))


def test_sphere_cousin_is_minimal_and_isometric():
    pair = sphere_pair()
    assert pair.isometry_error() < 1e-4
    assert C.isometry_error(pair.f, pair.ftilde, ring=C.GATE_RING) < 1e-5
    # second derivatives use one-sided closures near the edge
    assert np.max(S.interior(S.minimal_residual_s3(pair.ftilde), 3)) < 1e-4
    assert pair.drift_log < 1e-12
    rep = pair.report()
    assert set(rep) == {"loop_residual_max", "isometry_error", "drift_log", "base_point"}


def test_sphere_cousin_is_a_great_sphere():
    # the cousin of a unit sphere is totally geodesic: f~ lies in a 3-plane through 0
    vals = sphere_pair().ftilde.values.reshape(-1, 4)
    sv = np.linalg.svd(vals, compute_uv=False)
    assert sv[-1] / sv[0] < 1e-6


def test_round_trip_recovers_input():
    pair = sphere_pair()
    f = pair.f.values
    back = C.integrate_to_r3(pair.ftilde, base_value=f[0, 0])
    assert np.max(Q.qnorm(back.f.values - f)) < 1e-5


def test_structure_relations():
    pair = sphere_pair()
    assert np.max(C.verify_normal_relation(pair)) < 1e-5
    assert np.max(S.interior(C.verify_shape_relation(pair), 3)) < 1e-4


def test_path_order_independence():
    g = shapes.sphere_chart(h=0.01)
    a = C.integrate_to_s3(g, path_order="row").ftilde.values
    b = C.integrate_to_s3(g, path_order="column").ftilde.values
    assert np.max(Q.qnorm(a - b)) < 1e-7


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 100), st.integers(0, 100))
def test_base_point_change_is_left_translation(i, j):
    g = shapes.sphere_chart(h=0.01)
    ref = sphere_pair().ftilde.values
    other = C.integrate_to_s3(g, base_point=(i, j)).ftilde.values
    a = Q.qmul(ref[i, j], Q.qconj(other[i, j]))
    assert np.max(Q.qnorm(Q.qmul(a, other) - ref)) < 1e-7


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_left_translation_gauge(seed):
    a = Q.random_unit(np.random.default_rng(seed))
    pair = C.left_translate(sphere_pair(), a)
    assert np.max(C.verify_normal_relation(pair)) < 1e-5
    f = pair.f.values
    back = C.integrate_to_r3(pair.ftilde, base_value=f[0, 0])
    assert np.max(Q.qnorm(back.f.values - f)) < 1e-5


def test_cylinder_cousin():
    pair = C.integrate_to_s3(shapes.cylinder(radius=0.5))
    assert pair.isometry_error() < 1e-6
    assert np.max(C.verify_normal_relation(pair)) < 1e-5


def test_plane_is_not_integrable():
    with pytest.raises(NotIntegrableError) as ei:
        C.integrate_to_s3(shapes.plane(41))
    assert str(ei.value).startswith("cousin:")


def test_clifford_torus_off_balance_is_not_integrable():
    with pytest.raises(NotIntegrableError):
        C.integrate_to_r3(shapes.clifford_torus(r1=0.6))


def test_reversed_orientation():
    g = shapes.sphere_chart(h=0.01)
    flipped = g.replace(values=np.swapaxes(g.values, 0, 1).copy())
    with pytest.raises(OrientationError):
        C.integrate_to_s3(flipped)


def test_bad_inputs():
    g = shapes.sphere_chart(h=0.01)
    with pytest.raises(InvalidInputError):
        C.integrate_to_s3(g, base_value=np.array([2.0, 0, 0, 0]))
    with pytest.raises(InvalidInputError):
        C.integrate_to_s3(shapes.clifford_torus())
    with pytest.raises(InvalidInputError):
        C.integrate_to_r3(g)


# ---------------------------------------------------------------- periods


def test_period_forms_agree_on_sphere():
    pair = sphere_pair()
    n = pair.f.nx
    path = C.staircase_path((0, 10), (n - 1, 70))
    for u in (Q.I, Q.J, Q.K):
        p_f, p_ft = C.period_forms(pair, path, u)
        assert abs(p_f - p_ft) < 1e-5
    assert np.isclose(C.period(pair, path, Q.K), p_f)


def test_staircase_path_shape():
    p = C.staircase_path((0, 0), (2, 3), first="y")
    assert p[0] == (0, 0) and p[-1] == (2, 3) and len(p) == 6
    assert p[1] == (0, 1)


def test_path_errors():
    pair = sphere_pair()
    with pytest.raises(PathError):
        C.period(pair, [(0, 0)])
    with pytest.raises(PathError):
        C.period(pair, [(0, 0), (2, 0)])
    with pytest.raises(PathError):
        C.period(pair, [(0, 5), (0, 6)])
    with pytest.raises(PathError):
        C.period(pair, [(-1, 0), (0, 0)])
