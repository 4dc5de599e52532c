"""Reconstruction of a surface from its invariant fields, and rigid alignment in R^4.

The frame rows Z = (x, y, b, l) satisfy Z_u = A Z and Z_v = B Z with skew
A, B built from sqrt(E), sqrt(G) and the eight invariants; the position
satisfies z_u = sqrt(E) x and z_v = sqrt(G) y.  Steps use the matrix
exponential of the midpoint generator, so frames stay orthonormal to
roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import DegeneratePointError, InputError, ThresholdError
from .frame import connection_matrices
from .net import _derivatives, check_integrability, metric_quotients

DEFAULT_THRESHOLD = 1e-3
ORTHONORMAL_TOL = 1e-9
GENERAL_TOL = 1e-8
PATHS = ("u_first", "v_first")
STEPPERS = ("expm", "rk4")


@dataclass
class FrameMatrixPair:
    """A and B on every node, shape ``(nu, nv, 4, 4)``."""

    A: np.ndarray
    B: np.ndarray


def frame_matrices(grid):
    P, Q = connection_matrices(grid)
    return FrameMatrixPair(grid.sqrtE[..., None, None] * P, grid.sqrtG[..., None, None] * Q)


def compatibility_defect(pair, du, dv):
    """A_v - B_u + AB - BA on every node (one-sided stencils at the border)."""
    _, A_v = _derivatives(pair.A, du, dv)
    B_u, _ = _derivatives(pair.B, du, dv)
    return A_v - B_u + pair.A @ pair.B - pair.B @ pair.A


@dataclass
class ReconstructedPatch:
    positions: np.ndarray           # (nu, nv, 4)
    frames: np.ndarray              # (nu, nv, 4, 4), rows x, y, b, l
    compatibility_residual: float
    integrability_residual: float
    du: float
    dv: float
    path: str = "u_first"

    @property
    def shape(self):
        return self.positions.shape[:2]

    def gram_drift(self):
        """max |Z Z^T - I| over all stored frames."""
        gram = self.frames @ np.swapaxes(self.frames, -1, -2)
        return float(np.max(np.abs(gram - np.eye(4))))

    def tangent_defect(self, grid):
        """Max of |z_u - sqrt(E) x| and |z_v - sqrt(G) y| at interior nodes."""
        z_u, z_v = _derivatives(self.positions, self.du, self.dv)
        du_ = z_u - grid.sqrtE[..., None] * self.frames[..., 0, :]
        dv_ = z_v - grid.sqrtG[..., None] * self.frames[..., 1, :]
        inner = (slice(1, -1), slice(1, -1))
        return float(max(np.max(np.abs(du_[inner])), np.max(np.abs(dv_[inner]))))


def _check_initial(frame, point):
    frame = np.eye(4) if frame is None else np.asarray(frame, dtype=float)
    point = np.zeros(4) if point is None else np.asarray(point, dtype=float)
    if frame.shape != (4, 4) or point.shape != (4,):
        raise InputError("initial frame must be 4 x 4 and initial point a 4-vector")
    if np.max(np.abs(frame @ frame.T - np.eye(4))) > ORTHONORMAL_TOL:
        raise InputError("initial frame is not orthonormal")
    if np.linalg.det(frame) <= 0:
        raise InputError("initial frame is not positively oriented")
    return frame, point


def _segment_integral(M, h):
    """(exp(hM), int_0^h exp(sM) ds) for a batch of 4 x 4 generators."""
    n = M.shape[:-2]
    big = np.zeros(n + (8, 8))
    big[..., :4, :4] = M * h
    big[..., :4, 4:] = h * np.eye(4)
    E = expm(big)
    return E[..., :4, :4], E[..., :4, 4:]


def _rk4_step(M0, M1, h):
    """Classical RK4 for Z' = M(s) Z with M linear in s, then a polar projection."""
    Mm = 0.5 * (M0 + M1)
    I = np.eye(4)
    k1 = M0
    k2 = Mm @ (I + 0.5 * h * k1)
    k3 = Mm @ (I + 0.5 * h * k2)
    k4 = M1 @ (I + h * k3)
    step = I + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    # Simpson for the integral of Z along the step, Hermite value at the midpoint
    mid = 0.5 * (I + step) + h / 8 * (M0 - M1 @ step)
    integral = h / 6 * (I + 4 * mid + step)
    return step, integral


def _march(M, speed, row, Z0, z0, h, stepper):
    """Integrate Z' = M Z and z' = speed * Z[row] along the first axis of ``M``.

    ``M`` has shape ``(n, batch, 4, 4)`` and ``speed`` shape ``(n, batch)``;
    returns frames ``(n, batch, 4, 4)`` and positions ``(n, batch, 4)``.
    """
    n = M.shape[0]
    Z = np.empty(M.shape)
    z = np.empty(M.shape[:-1])
    Z[0], z[0] = Z0, z0
    for k in range(n - 1):
        if stepper == "expm":
            step, integral = _segment_integral(0.5 * (M[k] + M[k + 1]), h)
        else:
            step, integral = _rk4_step(M[k], M[k + 1], h)
        Zk = Z[k]
        new = step @ Zk
        if stepper == "rk4":
            U, _, Vt = np.linalg.svd(new)
            new = U @ Vt
        Z[k + 1] = new
        s_mid = 0.5 * (speed[k] + speed[k + 1])
        z[k + 1] = z[k] + s_mid[..., None] * (integral @ Zk)[..., row, :]
    return Z, z


def reconstruct(grid, initial_frame=None, initial_point=None, threshold=DEFAULT_THRESHOLD,
                path="u_first", stepper="expm"):
    """Integrate the frame and position systems over the grid.

    Node (0, 0) carries ``initial_frame`` (rows x, y, b, l; identity by
    default) and ``initial_point``.  With ``path="u_first"`` the row v = 0 is
    integrated in u first and every column then in v; ``"v_first"`` is the
    transposed order.  Raises ThresholdError when the largest integrability
    residual of the grid exceeds ``threshold``.
    """
    if path not in PATHS:
        raise InputError(f"path must be one of {PATHS}")
    if stepper not in STEPPERS:
        raise InputError(f"stepper must be one of {STEPPERS}")
    if grid.sqrtE is None or grid.sqrtG is None:
        raise InputError("grid lacks sqrtE/sqrtG; derive them first")
    if np.any(grid.sqrtE <= 0) or np.any(grid.sqrtG <= 0):
        raise InputError("sqrtE and sqrtG must be positive")
    Z0, z0 = _check_initial(initial_frame, initial_point)
    report = check_integrability(grid)
    if not report.max_residual <= threshold:
        name = max(report.max_abs, key=report.max_abs.get)
        raise ThresholdError(
            f"integrability residual {report.max_residual:.3e} exceeds {threshold:g} "
            f"({name} at node {report.worst[name]})")

    pair = frame_matrices(grid)
    A, B, sE, sG = pair.A, pair.B, grid.sqrtE, grid.sqrtG
    if path == "v_first":
        A, B = np.swapaxes(B, 0, 1), np.swapaxes(A, 0, 1)
        sE, sG = sG.T, sE.T
        h_first, h_second, rows = grid.dv, grid.du, (1, 0)
    else:
        h_first, h_second, rows = grid.du, grid.dv, (0, 1)
    spine_Z, spine_z = _march(A[:, :1], sE[:, :1], rows[0], Z0, z0, h_first, stepper)
    Z, z = _march(np.swapaxes(B, 0, 1), sG.T, rows[1], spine_Z[:, 0], spine_z[:, 0],
                  h_second, stepper)
    Z, z = np.swapaxes(Z, 0, 1), np.swapaxes(z, 0, 1)
    if path == "v_first":
        Z, z = np.swapaxes(Z, 0, 1), np.swapaxes(z, 0, 1)

    defect = compatibility_defect(pair, grid.du, grid.dv)[1:-1, 1:-1]
    compat = float(np.max(np.abs(defect))) if defect.size else 0.0
    return ReconstructedPatch(z, Z, compat, report.max_residual, grid.du, grid.dv, path)


def path_independence(grid, initial_frame=None, initial_point=None, threshold=DEFAULT_THRESHOLD):
    """Far-corner position and frame gaps between the two integration orders."""
    a = reconstruct(grid, initial_frame, initial_point, threshold, "u_first")
    b = reconstruct(grid, initial_frame, initial_point, threshold, "v_first")
    return (float(np.linalg.norm(a.positions[-1, -1] - b.positions[-1, -1])),
            float(np.max(np.abs(a.frames[-1, -1] - b.frames[-1, -1]))))


def derive_metric_from_invariants(grid, tol=GENERAL_TOL):
    """Fill sqrtE and sqrtG from the quotients of the mu-derivatives.

    Requires the general class (mu_u mu_v nonzero at every node) and positive
    quotients; otherwise raises DegeneratePointError.
    """
    mu_u, mu_v, den_u, den_v = metric_quotients(grid)
    scale = tol * (1 + float(np.max(np.abs(grid.mu))))
    for name, num, den in (("mu_u", mu_u, den_u), ("mu_v", mu_v, den_v)):
        bad = np.abs(num) <= scale
        if np.any(bad):
            node = tuple(int(k) for k in np.argwhere(bad)[0])
            raise DegeneratePointError(f"{name} vanishes at node {node}; grid not in the general class")
        bad = np.abs(den) <= scale
        if np.any(bad):
            node = tuple(int(k) for k in np.argwhere(bad)[0])
            raise DegeneratePointError(f"denominator for {name} vanishes at node {node}")
    sqrtE, sqrtG = mu_u / den_u, mu_v / den_v
    for name, q in (("sqrtE", sqrtE), ("sqrtG", sqrtG)):
        if np.any(q <= 0):
            node = tuple(int(k) for k in np.argwhere(q <= 0)[0])
            raise DegeneratePointError(f"derived {name} is not positive at node {node}")
    return grid.with_fields(sqrtE=sqrtE, sqrtG=sqrtG)


def rigid_align(candidate, reference):
    """Proper rotation R and translation t minimizing |candidate - (reference R^T + t)|.

    Returns ``(R, t, rms)``.  Point arrays may have any leading shape.
    """
    X = np.asarray(reference, dtype=float).reshape(-1, 4)
    Y = np.asarray(candidate, dtype=float).reshape(-1, 4)
    if np.shape(candidate) != np.shape(reference):
        raise InputError("candidate and reference must have the same shape")
    if X.shape[0] < 4:
        raise InputError("need at least 4 points to align")
    cx, cy = X.mean(axis=0), Y.mean(axis=0)
    Xc, Yc = X - cx, Y - cy
    sv = np.linalg.svd(Xc, compute_uv=False)
    if sv[0] == 0 or sv[2] <= 1e-12 * sv[0]:
        raise DegeneratePointError("reference points are degenerate (centered rank < 3)")
    U, _, Vt = np.linalg.svd(Xc.T @ Yc)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    R = Vt.T @ np.diag([1.0, 1.0, 1.0, d]) @ U.T
    t = cy - R @ cx
    rms = float(np.sqrt(np.mean(np.sum((X @ R.T + t - Y) ** 2, axis=-1))))
    return R, t, rms


def aligned_rms(candidate, reference):
    return rigid_align(candidate, reference)[2]
