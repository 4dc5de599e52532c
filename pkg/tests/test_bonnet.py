import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import observed_orders
from surfr4.bonnet import (aligned_rms, compatibility_defect, derive_metric_from_invariants,
                           frame_matrices, path_independence, reconstruct, rigid_align)
from surfr4.errors import DegeneratePointError, InputError, ThresholdError
from surfr4.net import InvariantFieldGrid, build_net
from surfr4.surface_jets import catalog

R2 = 1 / np.sqrt(2)


def torus_reference(n, d, seed=(1.0, 1.0)):
    """Clifford torus sampled along its principal lines, which run at 45 degrees to (u, v)."""
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    u = seed[0] + d * R2 * (i - j)
    v = seed[1] + d * R2 * (j + i)
    return np.stack([np.cos(u), np.sin(u), np.cos(v), np.sin(v)], axis=-1)


def random_rotation(rng, n=4):
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


@pytest.fixture(scope="module")
def torus_grid():
    return InvariantFieldGrid.constant(21, 21, 0.1, 0.1, nu1=R2, nu2=R2, mu=-R2)


@pytest.fixture(scope="module")
def cmc_nets():
    model = catalog("meridian_cmc", [1.0, 0.5])
    (u0, u1), (v0, v1) = model.domain
    seed = (0.5 * (u0 + u1), 0.5 * (v0 + v1))
    return [build_net(model, seed, n, n, d, d) for n, d in ((9, 0.02), (17, 0.01), (33, 0.005))]


def test_constant_torus_grid_round_trip(torus_grid):
    patch = reconstruct(torus_grid)
    rms = aligned_rms(patch.positions, torus_reference(21, 0.1))
    assert rms < 1e-8, rms


def test_opposite_mu_sign_gives_a_mirror_image():
    grid = InvariantFieldGrid.constant(21, 21, 0.1, 0.1, nu1=R2, nu2=R2, mu=R2)
    rms = aligned_rms(reconstruct(grid).positions, torus_reference(21, 0.1))
    assert rms > 1e-2


def test_measured_torus_net_round_trip():
    grid = build_net(catalog("clifford_torus", [1.0]), (1.0, 1.0), 21, 21, 0.1, 0.1)
    patch = reconstruct(grid)
    assert aligned_rms(patch.positions, grid.positions) < 1e-8
    np.testing.assert_allclose(grid.positions, torus_reference(21, 0.1), atol=1e-10)


def test_meridian_round_trip_converges(cmc_nets):
    rms = [aligned_rms(reconstruct(g).positions, g.positions) for g in cmc_nets]
    orders = observed_orders(rms)
    assert np.all(orders >= 1.8), rms


@pytest.mark.parametrize("stepper", ["expm", "rk4"])
def test_gram_drift_is_negligible(stepper, torus_grid, cmc_nets):
    for grid in (torus_grid, *cmc_nets):
        assert reconstruct(grid, stepper=stepper).gram_drift() < 1e-9


def test_steppers_agree_to_discretization_error(cmc_nets):
    gaps = []
    for g in cmc_nets:
        a, b = reconstruct(g, stepper="expm"), reconstruct(g, stepper="rk4")
        gaps.append(np.max(np.abs(a.positions - b.positions)))
    assert gaps[-1] < 1e-6
    assert np.all(observed_orders(gaps) >= 1.8), gaps


def test_equivariance_under_ambient_motion(cmc_nets, rng):
    g = cmc_nets[0]
    R = random_rotation(rng)
    t = rng.normal(size=4)
    base = reconstruct(g)
    moved = reconstruct(g, initial_frame=np.eye(4) @ R.T, initial_point=t)
    np.testing.assert_allclose(moved.positions, base.positions @ R.T + t, atol=1e-10)
    np.testing.assert_allclose(moved.frames, base.frames @ R.T, atol=1e-10)


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_equivariance_on_constant_grid(seed):
    rng = np.random.default_rng(seed)
    grid = InvariantFieldGrid.constant(6, 5, 0.2, 0.3, nu1=R2, nu2=R2, mu=-R2)
    R, t = random_rotation(rng), rng.normal(size=4)
    Z0 = random_rotation(rng)
    base = reconstruct(grid, initial_frame=Z0)
    moved = reconstruct(grid, initial_frame=Z0 @ R.T, initial_point=t)
    np.testing.assert_allclose(moved.positions, base.positions @ R.T + t, atol=1e-10)


def test_reconstructed_tangents_match_frame(cmc_nets):
    g = cmc_nets[2]
    patch = reconstruct(g)
    assert patch.tangent_defect(g) < 1e-3


def test_path_independence(torus_grid, cmc_nets):
    gap_z, gap_Z = path_independence(torus_grid)
    assert gap_z < 1e-12 and gap_Z < 1e-12
    gaps = [path_independence(g)[0] for g in cmc_nets]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-5


def test_frame_matrices_are_skew_and_compatible(torus_grid, cmc_nets):
    for grid in (torus_grid, cmc_nets[2]):
        pair = frame_matrices(grid)
        for M in (pair.A, pair.B):
            np.testing.assert_allclose(M, -np.swapaxes(M, -1, -2), atol=1e-15)
    assert np.max(np.abs(compatibility_defect(frame_matrices(torus_grid), 0.1, 0.1))) < 1e-14
    defect = compatibility_defect(frame_matrices(cmc_nets[2]), cmc_nets[2].du, cmc_nets[2].dv)
    assert np.max(np.abs(defect[1:-1, 1:-1])) < 1e-3


def test_threshold_violation_raises_with_location(torus_grid):
    bumped = torus_grid.nu1.copy()
    bumped[7, 12] += 1e-2
    with pytest.raises(ThresholdError, match=r"\(7, 1[123]\)|\([678], 12\)"):
        reconstruct(torus_grid.with_fields(nu1=bumped))


def test_invalid_initial_data(torus_grid):
    with pytest.raises(InputError):
        reconstruct(torus_grid, initial_frame=2 * np.eye(4))
    with pytest.raises(InputError):
        reconstruct(torus_grid, initial_frame=np.diag([1.0, 1.0, 1.0, -1.0]))
    with pytest.raises(InputError):
        reconstruct(torus_grid, initial_point=np.zeros(3))
    with pytest.raises(InputError):
        reconstruct(torus_grid, path="diagonal")
    with pytest.raises(InputError):
        reconstruct(torus_grid.with_fields(sqrtE=None))
    with pytest.raises(InputError):
        reconstruct(torus_grid.with_fields(sqrtG=-torus_grid.sqrtG))


def test_derived_metric_agrees_with_measured(cmc_nets):
    g = cmc_nets[1]
    derived = derive_metric_from_invariants(g)
    inner = (slice(1, -1), slice(1, -1))
    np.testing.assert_allclose(derived.sqrtE[inner], g.sqrtE[inner], atol=2e-4)
    np.testing.assert_allclose(derived.sqrtG[inner], g.sqrtG[inner], atol=2e-4)


def test_derived_metric_requires_general_class(torus_grid):
    with pytest.raises(DegeneratePointError, match="general class"):
        derive_metric_from_invariants(torus_grid)


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_rigid_align_recovers_motion(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(30, 4))
    R, t = random_rotation(rng), rng.normal(size=4) * 3
    Rf, tf, rms = rigid_align(X @ R.T + t, X)
    np.testing.assert_allclose(Rf, R, atol=1e-10)
    np.testing.assert_allclose(tf, t, atol=1e-10)
    assert rms < 1e-12
    assert np.linalg.det(Rf) > 0


def test_rigid_align_never_reflects(rng):
    X = rng.normal(size=(20, 4))
    mirror = X * [1, 1, 1, -1]
    R, _, rms = rigid_align(mirror, X)
    assert np.linalg.det(R) > 0
    assert rms > 1e-3


def test_rigid_align_handles_planar_point_sets(rng):
    # a 3-dimensional point set fixes the rotation only up to the orthogonal line
    X = np.concatenate([rng.normal(size=(15, 3)), np.zeros((15, 1))], axis=1)
    R = random_rotation(rng)
    _, _, rms = rigid_align(X @ R.T, X)
    assert rms < 1e-12


def test_rigid_align_errors(rng):
    with pytest.raises(InputError):
        rigid_align(np.zeros((5, 4)), np.zeros((6, 4)))
    with pytest.raises(InputError):
        rigid_align(np.ones((3, 4)), np.ones((3, 4)))
    line = np.outer(np.arange(6.0), [1, 2, 0, 0])
    with pytest.raises(DegeneratePointError):
        rigid_align(line, line)
