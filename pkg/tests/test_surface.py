import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cousinlab import quat as Q
from cousinlab import shapes
from cousinlab import surface as S
from cousinlab.errors import (DegenerateNodeError, GridTooSmallError, InvalidInputError,
                              NotConformalError)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 2), st.sampled_from([2, 4]), st.floats(0.05, 0.2))
def test_stencils_exact_on_low_degree_polynomials(deriv, order, h):
    # stencils of order p are exact for polynomials of degree p + deriv - 1
    x = np.arange(12) * h
    deg = order + deriv - 1
    a = x**deg
    exact = deg * x ** (deg - 1) if deriv == 1 else deg * (deg - 1) * x ** (deg - 2)
    assert np.allclose(S.diff(a, h, 0, deriv, order), exact, atol=1e-7)


@pytest.mark.parametrize("order", [2, 4])
def test_stencil_convergence_rate(order):
    errs = []
    for n in (40, 80, 160):
        x = np.linspace(0, 1, n + 1)
        d = S.diff(np.sin(3 * x), x[1] - x[0], 0, 1, order)
        errs.append(np.max(np.abs(d - 3 * np.cos(3 * x))))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > order - 0.3)


def test_sphere_mean_curvature_and_normal():
    g = shapes.sphere_chart(h=0.01)
    sf = S.shape_operator(g)
    assert np.max(np.abs(sf.H - 1)) < 1e-6
    assert np.max(np.abs(sf.principal_curvatures() - 1)) < 1e-5
    nu = S.normal(g)
    # inward: nu = -f on the unit sphere
    assert np.max(Q.qnorm(nu + g.values)) < 1e-7
    assert np.max(sf.self_adjointness()) < 1e-6


def test_sphere_radius_scaling():
    g = shapes.sphere_chart(h=0.01, radius=2.0)
    assert np.max(np.abs(S.mean_curvature(g) - 0.5)) < 1e-6


def test_cylinder_principal_curvatures():
    g = shapes.cylinder(radius=0.5)
    k = S.shape_operator(g).principal_curvatures()
    assert np.max(np.abs(k[..., 0])) < 1e-6
    assert np.max(np.abs(k[..., 1] - 2)) < 1e-6
    assert np.max(np.abs(S.mean_curvature(g) - 1)) < 1e-6
    assert np.max(S.cmc_residual(g)) < 1e-5


def test_cmc_residual_convergence_on_sphere():
    errs = []
    hs = (0.04, 0.02, 0.01)
    for h in hs:
        errs.append(np.max(S.cmc_residual(shapes.sphere_chart(h=h))))
    slopes = np.diff(np.log(errs)) / np.diff(np.log(hs))
    assert np.all(slopes >= 1.9), slopes


def test_clifford_torus_minimal_only_when_balanced():
    g = shapes.clifford_torus(r1=np.sqrt(0.5))
    assert S.is_conformal(g)
    assert np.max(S.minimal_residual_s3(g)) < 1e-6
    g = shapes.clifford_torus(r1=0.6)
    assert np.max(S.minimal_residual_s3(g)) > 0.1


def test_great_sphere_is_minimal_in_s3():
    g = shapes.sphere_chart_s3(h=0.01)
    assert np.max(S.minimal_residual_s3(g)) < 1e-5


def test_plane_is_flat():
    g = shapes.plane(21)
    sf = S.shape_operator(g)
    assert np.max(np.abs(sf.S)) < 1e-12
    assert np.max(np.abs(sf.A2)) < 1e-12


def test_J_squares_to_minus_one_and_rotates_isometrically(rng):
    g = shapes.sphere_chart(h=0.02)
    m = S.metric(g)
    Jm = S.J_matrix(m)
    assert np.allclose(Jm @ Jm, -np.eye(2), atol=1e-12)
    X = rng.normal(size=g.shape + (2,))
    a, b = S.push_forward(g, X), S.push_forward(g, S.apply_J(g, X, m=m))
    assert np.allclose(Q.qnorm(a), Q.qnorm(b), rtol=1e-10)
    assert np.max(np.abs(Q.qdot(a, b))) < 1e-10
    # orientation: (df X, df JX, nu) positively oriented
    trip = np.einsum("...i,...i->...", np.cross(a[..., 1:], b[..., 1:]), S.normal(g)[..., 1:])
    assert np.all(trip > 0)


def test_J_with_nonconformal_metric():
    x = np.linspace(0, 1, 11)
    g = S.from_function(lambda X, Y: np.stack([2 * X + Y, Y, 0 * X], -1), x, x)
    m = S.metric(g)
    X = np.zeros(g.shape + (2,))
    X[..., 0] = 1
    a, b = S.push_forward(g, X), S.push_forward(g, S.apply_J(g, X, m=m))
    assert np.allclose(Q.qnorm(a), Q.qnorm(b))
    assert np.max(np.abs(Q.qdot(a, b))) < 1e-12


def test_laplace_beltrami_of_position_is_mean_curvature_vector():
    g = shapes.sphere_chart(h=0.01)
    lap = np.stack([S.laplace_beltrami(g, g.values[..., k]) for k in range(1, 4)], -1)
    nu = S.normal(g)[..., 1:]
    assert np.max(np.abs(S.interior(lap - 2 * nu, 3))) < 1e-5


def test_translation_jacobi_field():
    g = shapes.sphere_chart(h=0.01)
    u = S.normal(g)[..., 3]
    assert np.max(np.abs(S.interior(S.jacobi_residual(g, u), 3))) < 1e-4


def test_left_trivialized_normal_in_s3_is_tangent_to_sphere():
    g = shapes.clifford_torus(r1=np.sqrt(0.5))
    nu = S.normal(g)
    fx, fy = S.derivatives(g)
    assert np.max(np.abs(Q.qdot(nu, g.values))) < 1e-12
    assert np.max(np.abs(Q.qdot(nu, fx))) < 1e-8
    assert np.max(np.abs(Q.qdot(nu, fy))) < 1e-8


# ----------------------------------------------------------------- errors


def test_grid_too_small():
    g = shapes.plane(4)
    with pytest.raises(GridTooSmallError):
        S.shape_operator(g)
    with pytest.raises(GridTooSmallError):
        S.derivatives(shapes.plane(2))


def test_degenerate_node_reports_location():
    x = np.arange(-5, 6) * 0.2
    g = S.from_function(lambda X, Y: np.stack([X**2, Y, 0 * X], -1), x, x)
    with pytest.raises(DegenerateNodeError) as ei:
        S.normal(g)
    assert tuple(ei.value.node)[0] == 5


def test_not_conformal():
    x = np.linspace(0, 1, 11)
    g = S.from_function(lambda X, Y: np.stack([2 * X, Y, 0 * X], -1), x, x)
    assert not S.is_conformal(g)
    with pytest.raises(NotConformalError):
        S.cmc_residual(g)


def test_wrong_ambient_and_order():
    with pytest.raises(InvalidInputError):
        S.minimal_residual_s3(shapes.plane(21))
    with pytest.raises(InvalidInputError):
        S.cmc_residual(shapes.clifford_torus())
    with pytest.raises(InvalidInputError):
        S.diff(np.zeros(10), 0.1, 0, 1, order=3)


def test_s3_grid_must_be_on_sphere():
    x = np.linspace(0, 1, 5)
    with pytest.raises(InvalidInputError):
        S.from_function(lambda X, Y: np.stack([X, Y, 0 * X, 0 * X], -1), x, x, ambient="S3")
