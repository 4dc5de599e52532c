import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import FRAMED_SURFACES, random_points, rel_close
from surfr4.errors import DegeneratePointError
from surfr4.frame import (INVARIANT_NAMES, allied_mean_curvature, connection_matrices,
                          frenet_residual, geometric_frame, pointwise_frame)
from surfr4.pointwise import invariant_record
from surfr4.surface_jets import catalog, evaluate_jet


def test_clifford_torus_frame_values():
    torus = catalog("clifford_torus", [1.0])
    u = np.linspace(0.1, 6.0, 7)
    f = geometric_frame(torus, (u, 0.5 * u))
    r = 1 / np.sqrt(2)
    np.testing.assert_allclose(f.nu1, r, atol=1e-12)
    np.testing.assert_allclose(f.nu2, r, atol=1e-12)
    np.testing.assert_allclose(np.abs(f.mu), r, atol=1e-12)
    np.testing.assert_allclose(f.lam, 0, atol=1e-12)
    for name in ("gamma1", "gamma2", "beta1", "beta2"):
        np.testing.assert_allclose(getattr(f, name), 0, atol=1e-7)


@pytest.mark.parametrize("name,params", FRAMED_SURFACES)
def test_frame_is_positively_oriented_orthonormal(name, params, rng):
    model = catalog(name, params)
    p = random_points(model, 10, rng, margin=0.1)
    f = pointwise_frame(model, p)
    Z = f.matrix()
    np.testing.assert_allclose(Z @ np.swapaxes(Z, -1, -2), np.broadcast_to(np.eye(4), Z.shape),
                               atol=1e-12)
    assert np.all(np.linalg.det(Z) > 0)


@pytest.mark.parametrize("name,params", FRAMED_SURFACES)
def test_frame_identities(name, params, rng):
    model = catalog(name, params)
    p = random_points(model, 10, rng, margin=0.1)
    f = pointwise_frame(model, p)
    rec = invariant_record(evaluate_jet(model, p))
    scale = np.abs(f.nu1) + np.abs(f.nu2) + np.abs(f.mu)
    floor = np.max(scale) ** 2
    assert rel_close(rec.k, -4 * f.nu1 * f.nu2 * f.mu ** 2, 1e-9, floor).all()
    assert rel_close(rec.kappa, (f.nu1 - f.nu2) * f.mu, 1e-9, floor).all()
    assert rel_close(rec.K, f.nu1 * f.nu2 - f.lam ** 2 - f.mu ** 2, 1e-9, floor).all()
    assert rel_close(rec.H_norm, np.abs(f.nu1 + f.nu2) / 2, 1e-9, np.max(scale)).all()


@pytest.mark.parametrize("name,params", [("generic_graph", []), ("meridian_cmc", [1.0, 0.5])])
def test_frenet_residual_is_second_order(name, params):
    model = catalog(name, params)
    (u0, u1), (v0, v1) = model.domain
    p = (np.array([0.6 * u0 + 0.4 * u1]), np.array([0.5 * (v0 + v1)]))
    res = [max(np.max(r) for r in frenet_residual(model, p, step=h)) for h in (4e-3, 2e-3, 1e-3)]
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(orders > 1.8), res


def test_hints_fix_signs():
    model = catalog("generic_graph")
    p = (np.array(0.1), np.array(0.1))
    f = pointwise_frame(model, p)
    g = pointwise_frame(model, p, {"x": -f.x, "y": -f.y, "b": -f.b})
    np.testing.assert_allclose(g.x, -f.x)
    np.testing.assert_allclose(g.y, -f.y)
    np.testing.assert_allclose(g.b, -f.b)
    assert float(g.nu1) == pytest.approx(-float(f.nu1))
    # the (x, y) turn and (b, l) turn stay positively oriented
    assert np.linalg.det(g.matrix()) > 0


def test_flipped_frame():
    model = catalog("generic_graph")
    f = geometric_frame(model, (np.array(0.1), np.array(-0.1)))
    g = f.flipped()
    assert float(g.nu1) == -float(f.nu1) and float(g.beta2) == -float(f.beta2)
    assert float(g.gamma1) == float(f.gamma1)
    np.testing.assert_allclose(g.matrix()[2:], -f.matrix()[2:])


def test_default_sign_makes_b_along_H():
    model = catalog("generic_graph")
    u, v = np.meshgrid(np.linspace(-0.4, 0.4, 5), np.linspace(-0.4, 0.4, 5))
    f = pointwise_frame(model, (u, v))
    assert np.all(f.nu1 + f.nu2 > 0)


def test_degenerate_points_rejected():
    with pytest.raises(DegeneratePointError):
        pointwise_frame(catalog("holomorphic_graph"), (np.array(0.1), np.array(0.2)))
    with pytest.raises(DegeneratePointError):
        pointwise_frame(catalog("sphere3"), (np.array(0.1), np.array(0.2)))


def test_connection_matrices_are_skew():
    f = geometric_frame(catalog("generic_graph"), (np.array(0.1), np.array(-0.1)))
    P, Q = connection_matrices(f)
    np.testing.assert_allclose(P, -P.T, atol=0)
    np.testing.assert_allclose(Q, -Q.T, atol=0)
    assert set(f.invariants()) == set(INVARIANT_NAMES)


@given(st.floats(-0.4, 0.4), st.floats(-0.4, 0.4))
def test_allied_mean_curvature(u0, v0):
    model = catalog("generic_graph")
    f = pointwise_frame(model, (np.array(u0), np.array(v0)))
    rec = invariant_record(evaluate_jet(model, (np.array(u0), np.array(v0))))
    a = allied_mean_curvature(f)
    # |a(H)| = sqrt(kappa^2 - k) |lam| / 2 and a(H) is normal, along l
    expect = 0.5 * np.sqrt(float(rec.kappa ** 2 - rec.k)) * abs(float(f.lam))
    assert float(np.linalg.norm(a)) == pytest.approx(expect, rel=1e-9, abs=1e-14)
    assert abs(float(a @ f.x)) < 1e-14 and abs(float(a @ f.b)) < 1e-14
