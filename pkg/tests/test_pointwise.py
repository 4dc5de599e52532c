import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial.transform import Rotation

import oracles
from helpers import rel_close
from surfr4.errors import DegeneratePointError, InputError
from surfr4.pointwise import (ALL_PRINCIPAL, PointClass, TangentDirection, asymptotic_directions,
                              geodesic_torsion, invariant_record, normal_connection_commutator,
                              normal_curvature, orthogonal_direction, principal_directions,
                              principal_normal_curvatures, zeta)
from surfr4.surface_jets import SurfaceJet, catalog, evaluate_jet, from_coordinates

NAMES = ("k", "kappa", "K", "H_norm")

ORACLE_CASES = [
    ("clifford_torus", [1.0], oracles.torus(), [(0.3, 1.1), (2.0, 5.5), (4.4, 0.2)]),
    ("holomorphic_graph", [], oracles.holomorphic_graph(), [(0.0, 0.0), (0.4, -0.7), (-0.9, 0.2)]),
    ("generic_graph", [], oracles.generic_graph(), [(0.1, -0.2), (-0.4, 0.4), (0.3, 0.3)]),
    ("graph", [0.7, -0.3, 0.2, 0.1, 0.9, -0.4], oracles.quadratic_graph(0.7, -0.3, 0.2, 0.1, 0.9, -0.4),
     [(0.2, 0.5), (-0.6, -0.1)]),
    ("sphere3", [], oracles.sphere3(), [(0.2, 0.4), (-1.0, 3.0)]),
    ("meridian_sphere", [0.5], oracles.sphere_meridian(0.5), [(1.0, 0.7), (2.2, 3.1)]),
]


def _jet(model, p):
    return evaluate_jet(model, (np.array(p[0]), np.array(p[1])))


@pytest.mark.parametrize("name,params,coords,points", ORACLE_CASES)
def test_invariants_against_symbolic_oracle(name, params, coords, points):
    model = catalog(name, params)
    for p in points:
        ref = oracles.invariants(coords, p)
        rec = invariant_record(_jet(model, p))
        for q in NAMES + ("L", "M", "N"):
            got = getattr(rec.second, q) if q in "LMN" else getattr(rec, q)
            assert rel_close(got, ref[q], 1e-9), (name, p, q, float(got), ref[q])


@pytest.mark.parametrize("name,params,coords,points", ORACLE_CASES)
def test_principal_normal_curvatures_are_characteristic_roots(name, params, coords, points):
    model = catalog(name, params)
    for p in points:
        ref = sorted(oracles.principal_normal_curvatures(oracles.invariants(coords, p)))
        got = sorted(principal_normal_curvatures(_jet(model, p)))
        assert rel_close(got, ref, 1e-8).all()


def test_golden_values():
    rec = invariant_record(_jet(catalog("clifford_torus", [1.0]), (0.7, 2.0)))
    assert (float(rec.k), float(rec.kappa), float(rec.K)) == pytest.approx((-1, 0, 0), abs=1e-12)
    assert float(rec.H_norm) == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert rec.point_class == PointClass.HYPERBOLIC
    rec = invariant_record(_jet(catalog("holomorphic_graph"), (0.0, 0.0)))
    assert (float(rec.k), abs(float(rec.kappa)), float(rec.K), float(rec.H_norm)) == \
        pytest.approx((64, 8, -8, 0), abs=1e-12)
    assert rec.point_class == PointClass.ELLIPTIC


def test_sphere_in_hyperplane_is_flat(rng):
    model = catalog("sphere3")
    u = rng.uniform(-1.3, 1.3, 50)
    v = rng.uniform(0, 6, 50)
    rec = invariant_record(evaluate_jet(model, (u, v)))
    assert np.all(rec.point_class == PointClass.FLAT)


def _rigid(jet, R, t):
    moved = {name: getattr(jet, name) @ R.T for name in ("z_u", "z_v", "z_uu", "z_uv", "z_vv")}
    return SurfaceJet(z=jet.z @ R.T + t, order=2, **moved)


@given(st.integers(0, 2 ** 31 - 1), st.floats(-0.45, 0.45), st.floats(-0.45, 0.45))
def test_invariance_under_ambient_motions(seed, u0, v0):
    gen = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(gen.normal(size=(4, 4)))
    jet = _jet(catalog("generic_graph"), (u0, v0))
    a = invariant_record(jet)
    b = invariant_record(_rigid(jet, Q, gen.normal(size=4)))
    orientation = np.sign(np.linalg.det(Q))
    for q in ("k", "K", "H_norm"):
        assert rel_close(getattr(b, q), getattr(a, q), 1e-9)
    # the normal curvature changes sign with the ambient orientation
    assert rel_close(b.kappa, orientation * a.kappa, 1e-9)


@given(st.floats(-0.4, 0.4), st.floats(-0.4, 0.4), st.floats(0.5, 2.0), st.floats(-1.0, 1.0),
       st.floats(0.5, 2.0))
def test_invariance_under_reparameterization(u0, v0, a, b, d):
    """Affine substitution (u, v) = (a s + b t, d t) preserves every invariant."""
    base = catalog("generic_graph")
    phi = lambda u, v: 0.5 * u * u - 0.2 * v * v + 0.2 * u ** 3 + 0.1 * u * v * v
    psi = lambda u, v: 0.8 * u * v + 0.3 * v * v + 0.1 * v ** 3 - 0.15 * u * u * v
    def z(s, t):
        u, v = a * s + b * t, d * t
        return (u, v, phi(u, v), psi(u, v))
    re = from_coordinates(z, ((-5, 5), (-5, 5)), "reparam")
    t0 = v0 / d
    s0 = (u0 - b * t0) / a
    r1 = invariant_record(_jet(base, (u0, v0)))
    r2 = invariant_record(_jet(re, (s0, t0)))
    for q in NAMES:
        assert rel_close(getattr(r2, q), getattr(r1, q), 1e-8)
    assert rel_close(sorted([r1.nu_prime, r1.nu_doubleprime]),
                     sorted([r2.nu_prime, r2.nu_doubleprime]), 1e-8).all()


def test_batched_record_matches_pointwise(rng):
    model = catalog("meridian_cmc", [1.0, 0.5])
    (u0, u1), (v0, v1) = model.domain
    u = rng.uniform(u0 + 0.1, u1 - 0.1, 6)
    v = rng.uniform(v0, v1, 6)
    batch = invariant_record(evaluate_jet(model, (u, v)))
    for n in range(6):
        single = invariant_record(_jet(model, (u[n], v[n])))
        for q in NAMES:
            assert float(getattr(single, q)) == pytest.approx(getattr(batch, q)[n], abs=1e-13)


@pytest.mark.parametrize("p", [(0.1, -0.2), (-0.3, 0.35), (0.4, 0.1)])
def test_principal_directions_properties(p):
    jet = _jet(catalog("generic_graph"), p)
    g1, g2 = principal_directions(jet)
    rec = invariant_record(jet)
    # principal tangents carry zero geodesic torsion, are orthogonal and realize nu', nu''
    assert abs(geodesic_torsion(jet, g1)) < 1e-12
    assert abs(geodesic_torsion(jet, g2)) < 1e-12
    assert abs(zeta(jet, g1, g2)) < 1e-12
    assert normal_curvature(jet, g1) == pytest.approx(float(rec.nu_prime), abs=1e-12)
    assert normal_curvature(jet, g2) == pytest.approx(float(rec.nu_doubleprime), abs=1e-12)
    og = orthogonal_direction(jet, g1)
    assert abs(normal_curvature(jet, og) - normal_curvature(jet, g2)) < 1e-12


@given(st.floats(0.0, np.pi))
def test_normal_curvature_is_between_principal_values(theta):
    jet = _jet(catalog("generic_graph"), (0.2, -0.1))
    g1, g2 = principal_directions(jet)
    g = TangentDirection(np.cos(theta) * g1.lam + np.sin(theta) * g2.lam,
                         np.cos(theta) * g1.mu + np.sin(theta) * g2.mu)
    n1, n2 = principal_normal_curvatures(jet)
    # Euler-type formula for the normal curvature
    assert normal_curvature(jet, g) == pytest.approx(
        n1 * np.cos(theta) ** 2 + n2 * np.sin(theta) ** 2, abs=1e-12)


def test_all_principal_at_minimal_points():
    assert principal_directions(_jet(catalog("holomorphic_graph"), (0.3, 0.2))) == ALL_PRINCIPAL


def test_asymptotic_directions():
    torus = catalog("clifford_torus", [1.0])
    jet = _jet(torus, (0.5, 0.5))
    dirs = asymptotic_directions(jet)
    assert len(dirs) == 2
    for g in dirs:
        assert abs(normal_curvature(jet, g)) < 1e-12
    assert asymptotic_directions(_jet(catalog("holomorphic_graph"), (0.1, 0.1))) == []
    with pytest.raises(DegeneratePointError):
        asymptotic_directions(_jet(catalog("sphere3"), (0.1, 0.1)))


def test_cylinder_over_plane_curve_is_flat():
    rec = invariant_record(_jet(catalog("graph", [1.0, 0, 0, 0, 0, 0]), (0.2, 0.3)))
    assert rec.point_class == PointClass.FLAT


def test_parabolic_point_has_one_asymptotic_direction():
    # phi = u^2, psi = uv: L != 0 = M = N at the origin
    model = catalog("graph", [1.0, 0.0, 0.0, 0.0, 1.0, 0.0])
    jet = _jet(model, (0.0, 0.0))
    rec = invariant_record(jet)
    assert rec.point_class == PointClass.PARABOLIC
    (g,) = asymptotic_directions(jet)
    assert abs(normal_curvature(jet, g)) < 1e-12


def test_zero_direction_rejected():
    jet = _jet(catalog("generic_graph"), (0.0, 0.0))
    with pytest.raises(InputError):
        normal_curvature(jet, TangentDirection(0.0, 0.0))


@given(st.floats(-0.45, 0.45), st.floats(-0.45, 0.45))
def test_commutator_equals_kappa(u0, v0):
    jet = _jet(catalog("generic_graph"), (u0, v0))
    assert float(normal_connection_commutator(jet)) == pytest.approx(
        float(invariant_record(jet).kappa), abs=1e-12)


@given(st.floats(-0.45, 0.45), st.floats(-0.45, 0.45))
def test_minimal_gap_nonnegative(u0, v0):
    rec = invariant_record(_jet(catalog("generic_graph"), (u0, v0)))
    assert float(rec.kappa ** 2 - rec.k) >= -1e-12
    # k and kappa from the principal normal curvatures
    assert rel_close(rec.k, rec.nu_prime * rec.nu_doubleprime, 1e-10)
    assert rel_close(rec.kappa, 0.5 * (rec.nu_prime + rec.nu_doubleprime), 1e-10)
