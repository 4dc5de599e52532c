import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from helpers import SWEEP_SURFACES, random_points
from surfr4.errors import DomainError, ImmersionError, InputError
from surfr4.surface_jets import (catalog, catalog_names, check_immersion, evaluate_jet,
                                 finite_difference_jet, from_coordinates, sampled_surface)

DERIVS = ("z_u", "z_v", "z_uu", "z_uv", "z_vv")


@pytest.mark.parametrize("name,params", SWEEP_SURFACES)
def test_analytic_jet_matches_finite_differences(name, params, rng):
    model = catalog(name, params)
    p = random_points(model, 8, rng, margin=0.1)
    jet = evaluate_jet(model, p, order=3)
    scale = model.size()
    errs = []
    for h in (2e-3 * scale, 1e-3 * scale):
        fd = finite_difference_jet(model, p, h=h)
        errs.append(max(np.max(np.abs(getattr(fd, d) - getattr(jet, d))) for d in DERIVS))
    # second-order differences: halving h cuts the error by about 4
    assert errs[1] < 1e-4
    assert errs[1] < errs[0] / 3 or errs[1] < 1e-9


def test_third_derivatives_match_finite_differences():
    model = catalog("generic_graph")
    p = (np.array([0.1, -0.2]), np.array([0.05, 0.3]))
    jet = evaluate_jet(model, p, order=3)
    fd = finite_difference_jet(model, p, h=1e-3, order=3)
    for name in ("z_uuu", "z_uuv", "z_uvv", "z_vvv"):
        np.testing.assert_allclose(getattr(fd, name), getattr(jet, name), atol=1e-5)


def test_jet_against_symbolic_oracle():
    model = catalog("clifford_torus", [1.0])
    inv = oracles.invariants(oracles.torus(), (0.4, 1.3))
    jet = evaluate_jet(model, (np.array(0.4), np.array(1.3)))
    E = float(jet.z_u @ jet.z_u)
    assert E == pytest.approx(inv["E"], abs=1e-14)
    assert float(jet.z_u @ jet.z_v) == pytest.approx(inv["F"], abs=1e-14)


def test_periodic_wrap_and_domain():
    torus = catalog("clifford_torus", [1.0])
    a = evaluate_jet(torus, (np.array(0.3), np.array(0.2)))
    b = evaluate_jet(torus, (np.array(0.3 + 4 * np.pi), np.array(0.2 - 2 * np.pi)))
    np.testing.assert_allclose(a.z, b.z, atol=1e-12)
    graph = catalog("generic_graph")
    with pytest.raises(DomainError):
        evaluate_jet(graph, (np.array(0.9), np.array(0.0)))


def test_catalog_selectors():
    assert {"clifford_torus", "holomorphic_graph", "sphere3", "generic_graph",
            "meridian_cmc"} <= set(catalog_names())
    with pytest.raises(InputError):
        catalog("no_such_surface")
    with pytest.raises(InputError):
        catalog("clifford_torus", [1.0, 2.0])
    with pytest.raises(InputError):
        evaluate_jet(catalog("sphere3"), (0.1, 0.1), order=4)


def test_immersion_check_rejects_degenerate_jets():
    cone = from_coordinates(lambda u, v: (u * np.cos(v), u * np.sin(v), u, 0 * u),
                            ((0.0, 1.0), (0.0, 6.0)), "cone")
    with pytest.raises(ImmersionError):
        evaluate_jet(cone, (np.array(0.0), np.array(1.0)))
    check_immersion(evaluate_jet(cone, (np.array(0.5), np.array(1.0))))


@given(st.floats(-0.8, 0.8), st.floats(-0.8, 0.8))
def test_sampled_surface_reproduces_analytic_jet(u0, v0):
    model = catalog("holomorphic_graph")
    u = np.linspace(-1, 1, 41)
    v = np.linspace(-1, 1, 41)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    sampled = sampled_surface(u, v, model.point(uu, vv))
    a = evaluate_jet(model, (np.array(u0), np.array(v0)))
    b = evaluate_jet(sampled, (np.array(u0), np.array(v0)))
    # quadratic coordinates are reproduced exactly by the quintic spline
    for d in DERIVS:
        np.testing.assert_allclose(getattr(b, d), getattr(a, d), atol=1e-9)


def test_sampled_surface_shape_checks():
    with pytest.raises(InputError):
        sampled_surface(np.arange(5.0), np.arange(5.0), np.zeros((5, 4, 4)))
    with pytest.raises(InputError):
        sampled_surface(np.arange(3.0), np.arange(3.0), np.zeros((3, 3, 4)))
